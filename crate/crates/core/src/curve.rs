//! Closed piecewise-smooth curves on `S^2`: evaluation, line integrals,
//! length, design-residual certificates and covering radius.
//!
//! Every segment carries its own local parametrization `tau in [0, 1]` and
//! a slice `[s0, s1]` of the global parameter range `[0, 1]`. Line integrals
//! are computed per segment in the local parameter, so they do not depend on
//! how the global range is split.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{tennis_point_xyz, tennis_velocity, TennisParams};
use crate::geometry::{
    distance3, dot3, fibonacci_resolution, norm3, CircleFrame, CoveringEstimate, NearestIndex,
    SphericalCap, UnitVector,
};
use crate::polynomial::{monomial_basis, sphere_monomial_integral, MonomialIndex, PowerTable};
use crate::quadrature::{integrate, Integral};

/// Default absolute tolerance for curve integrals.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Maximum geodesic gap allowed at segment joins and at closure.
pub const CLOSURE_TOL: f64 = 1e-9;

/// Design residual below which a curve counts as certified.
pub const CURVE_CERTIFY_THRESHOLD: f64 = 1e-8;

const DOMAIN_TOL: f64 = 1e-12;

/// Arc of a cap boundary circle between two angles of its frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleArc {
    pub frame: CircleFrame,
    pub radius: f64,
    pub theta_start: f64,
    pub theta_end: f64,
}

impl CircleArc {
    pub fn new(cap: &SphericalCap, frame: CircleFrame, theta_start: f64, theta_end: f64) -> Self {
        Self {
            frame,
            radius: cap.radius(),
            theta_start,
            theta_end,
        }
    }

    /// `+1` when the arc runs counterclockwise around the cap center.
    pub fn orientation(&self) -> i8 {
        if self.theta_end >= self.theta_start {
            1
        } else {
            -1
        }
    }

    pub fn length(&self) -> f64 {
        self.frame.sin_r * (self.theta_end - self.theta_start).abs()
    }
}

/// A piece `gamma^(k,a)([start, end])` of a tennis-family curve; `end <
/// start` traverses it backwards.
#[derive(Debug, Clone, PartialEq)]
pub struct TennisArc {
    pub params: TennisParams,
    pub start: f64,
    pub end: f64,
}

/// Local point-and-velocity map on `[0, 1]`.
pub type ArcFn = dyn Fn(f64) -> ([f64; 3], [f64; 3]) + Send + Sync;

/// A segment given by an arbitrary parametrization `tau -> (point,
/// d point / d tau)` on `[0, 1]`.
#[derive(Clone)]
pub struct CallbackArc {
    pub eval: Arc<ArcFn>,
}

impl fmt::Debug for CallbackArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CallbackArc")
    }
}

#[derive(Debug, Clone)]
pub enum SegmentKind {
    CircleArc(CircleArc),
    Tennis(TennisArc),
    Callback(CallbackArc),
}

impl SegmentKind {
    /// Point and derivative with respect to the local parameter.
    pub fn local(&self, tau: f64) -> ([f64; 3], [f64; 3]) {
        match self {
            SegmentKind::CircleArc(arc) => {
                let dtheta = arc.theta_end - arc.theta_start;
                let theta = arc.theta_start + tau * dtheta;
                let t = arc.frame.tangent(theta);
                (
                    arc.frame.point(theta),
                    [t[0] * dtheta, t[1] * dtheta, t[2] * dtheta],
                )
            }
            SegmentKind::Tennis(arc) => {
                let span = arc.end - arc.start;
                let s = arc.start + tau * span;
                let v = tennis_velocity(&arc.params, s);
                (
                    tennis_point_xyz(&arc.params, s),
                    [v[0] * span, v[1] * span, v[2] * span],
                )
            }
            SegmentKind::Callback(arc) => (arc.eval)(tau),
        }
    }

    /// The same trajectory traversed in the opposite direction.
    pub fn reversed(&self) -> SegmentKind {
        match self {
            SegmentKind::CircleArc(arc) => SegmentKind::CircleArc(CircleArc {
                theta_start: arc.theta_end,
                theta_end: arc.theta_start,
                ..arc.clone()
            }),
            SegmentKind::Tennis(arc) => SegmentKind::Tennis(TennisArc {
                start: arc.end,
                end: arc.start,
                params: arc.params,
            }),
            SegmentKind::Callback(arc) => {
                let inner = arc.eval.clone();
                SegmentKind::Callback(CallbackArc {
                    eval: Arc::new(move |tau| {
                        let (p, v) = inner(1.0 - tau);
                        (p, [-v[0], -v[1], -v[2]])
                    }),
                })
            }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            SegmentKind::CircleArc(_) => "circle-arc",
            SegmentKind::Tennis(_) => "tennis",
            SegmentKind::Callback(_) => "callback",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CurveSegment {
    pub kind: SegmentKind,
    pub domain: (f64, f64),
}

impl CurveSegment {
    fn tau(&self, s: f64) -> f64 {
        let (a, b) = self.domain;
        ((s - a) / (b - a)).clamp(0.0, 1.0)
    }

    pub fn point(&self, s: f64) -> [f64; 3] {
        self.kind.local(self.tau(s)).0
    }

    /// Speed with respect to the global parameter.
    pub fn speed(&self, s: f64) -> f64 {
        norm3(&self.kind.local(self.tau(s)).1) / (self.domain.1 - self.domain.0)
    }

    pub fn start_point(&self) -> [f64; 3] {
        self.kind.local(0.0).0
    }

    pub fn end_point(&self) -> [f64; 3] {
        self.kind.local(1.0).0
    }
}

/// Ordered segments tiling the global parameter range `[0, 1]`.
#[derive(Debug, Clone)]
pub struct PiecewiseCurve {
    segments: Vec<CurveSegment>,
    closed: bool,
    length: OnceLock<f64>,
}

impl PiecewiseCurve {
    /// Validates domains (contiguous, covering `[0, 1]`), joins, closure,
    /// and that sampled points lie on the sphere with positive speed.
    pub fn new(segments: Vec<CurveSegment>, closed: bool) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidCurve("curve has no segments".into()));
        }
        if (segments[0].domain.0).abs() > DOMAIN_TOL
            || (segments[segments.len() - 1].domain.1 - 1.0).abs() > DOMAIN_TOL
        {
            return Err(Error::InvalidCurve(
                "segment domains must span [0, 1]".into(),
            ));
        }
        for (i, seg) in segments.iter().enumerate() {
            if !(seg.domain.1 > seg.domain.0) {
                return Err(Error::InvalidCurve(format!(
                    "segment {i} has an empty domain"
                )));
            }
            if let Some(next) = segments.get(i + 1) {
                if (next.domain.0 - seg.domain.1).abs() > DOMAIN_TOL {
                    return Err(Error::InvalidCurve(format!(
                        "domains of segments {i} and {} are not contiguous",
                        i + 1
                    )));
                }
                let gap = distance3(&seg.end_point(), &next.start_point());
                if gap > CLOSURE_TOL {
                    return Err(Error::Discontinuous {
                        index: i,
                        next: i + 1,
                        gap,
                    });
                }
            }
            for j in 0..=16 {
                let (p, v) = seg.kind.local(j as f64 / 16.0);
                let n = norm3(&p);
                if (n - 1.0).abs() > 1e-10 {
                    return Err(Error::InvalidCurve(format!(
                        "segment {i} ({}) leaves the sphere (norm {n})",
                        seg.kind.name()
                    )));
                }
                if !(norm3(&v) > 0.0) {
                    return Err(Error::InvalidCurve(format!("segment {i} has zero speed")));
                }
            }
        }
        if closed {
            let gap = distance3(
                &segments[segments.len() - 1].end_point(),
                &segments[0].start_point(),
            );
            if gap > CLOSURE_TOL {
                return Err(Error::OpenCurve { gap });
            }
        }
        Ok(Self {
            segments,
            closed,
            length: OnceLock::new(),
        })
    }

    /// Builds a curve from consecutive pieces, giving each a share of `[0, 1]`
    /// proportional to `weights` (typically the piece lengths).
    pub fn from_pieces(pieces: Vec<SegmentKind>, weights: &[f64], closed: bool) -> Result<Self> {
        if pieces.len() != weights.len() {
            return Err(Error::InvalidArgument(
                "one weight per piece required".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidArgument(
                "piece weights must be positive".into(),
            ));
        }
        let mut acc = 0.0;
        let n = pieces.len();
        let segments = pieces
            .into_iter()
            .zip(weights)
            .enumerate()
            .map(|(i, (kind, w))| {
                let s0 = acc / total;
                acc += w;
                let s1 = if i + 1 == n { 1.0 } else { acc / total };
                CurveSegment {
                    kind,
                    domain: (s0, s1),
                }
            })
            .collect();
        Self::new(segments, closed)
    }

    pub fn segments(&self) -> &[CurveSegment] {
        &self.segments
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    fn segment_at(&self, s: f64) -> Result<&CurveSegment> {
        if !(-DOMAIN_TOL..=1.0 + DOMAIN_TOL).contains(&s) {
            return Err(Error::ParameterOutOfRange {
                s,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let i = self
            .segments
            .partition_point(|seg| seg.domain.1 < s)
            .min(self.segments.len() - 1);
        Ok(&self.segments[i])
    }

    pub fn point(&self, s: f64) -> Result<[f64; 3]> {
        Ok(self.segment_at(s)?.point(s))
    }

    pub fn speed(&self, s: f64) -> Result<f64> {
        Ok(self.segment_at(s)?.speed(s))
    }

    /// Same trajectory with every segment reversed and the segment order
    /// flipped.
    pub fn reversed(&self) -> Result<Self> {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|seg| CurveSegment {
                kind: seg.kind.reversed(),
                domain: (1.0 - seg.domain.1, 1.0 - seg.domain.0),
            })
            .collect();
        Self::new(segments, self.closed)
    }

    /// Integrates the `dim`-component function `f` against arc length,
    /// segment by segment.
    pub fn integrate_vector<F>(&self, dim: usize, f: F, tol: f64) -> Result<Integral>
    where
        F: Fn(&[f64; 3], &mut [f64]) + Sync,
    {
        let parts = self.segment_integrals(dim, &f, tol)?;
        let mut values = vec![0.0; dim];
        let mut error_estimate = 0.0;
        let mut panels = 0;
        for part in parts {
            for (v, p) in values.iter_mut().zip(&part.values) {
                *v += p;
            }
            error_estimate += part.error_estimate;
            panels += part.panels;
        }
        Ok(Integral {
            values,
            error_estimate,
            panels,
        })
    }

    /// Per-segment integrals; each segment gets `tol / segment count`.
    pub fn segment_integrals<F>(&self, dim: usize, f: &F, tol: f64) -> Result<Vec<Integral>>
    where
        F: Fn(&[f64; 3], &mut [f64]) + Sync,
    {
        let seg_tol = tol / self.segments.len() as f64;
        self.segments
            .par_iter()
            .map(|seg| {
                integrate(
                    |tau, out: &mut [f64]| {
                        let (p, v) = seg.kind.local(tau);
                        f(&p, out);
                        let speed = norm3(&v);
                        out.iter_mut().for_each(|o| *o *= speed);
                    },
                    0.0,
                    1.0,
                    dim,
                    seg_tol,
                )
            })
            .collect()
    }

    /// `int_gamma f` with respect to arc length.
    pub fn line_integral<F>(&self, f: F, tol: f64) -> Result<f64>
    where
        F: Fn(&[f64; 3]) -> f64 + Sync,
    {
        self.integrate_vector(1, |p, out: &mut [f64]| out[0] = f(p), tol)
            .map(|r| r.values[0])
    }

    /// Curve length, cached after the first evaluation.
    pub fn length(&self) -> Result<f64> {
        if let Some(l) = self.length.get() {
            return Ok(*l);
        }
        let l = self.line_integral(|_| 1.0, DEFAULT_TOL)?;
        Ok(*self.length.get_or_init(|| l))
    }

    /// Samples `n >= 2` points at `s_i = i / (n - 1)`.
    pub fn sample(&self, n: usize) -> Result<Vec<TraceRow>> {
        if n < 2 {
            return Err(Error::InvalidArgument("need at least two samples".into()));
        }
        (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                let seg = self.segment_at(s)?;
                Ok(TraceRow {
                    s,
                    point: seg.point(s),
                    speed: seg.speed(s),
                })
            })
            .collect()
    }
}

/// The equator `(cos 2 pi s, sin 2 pi s, 0)`.
pub fn great_circle() -> PiecewiseCurve {
    let segment = CurveSegment {
        kind: SegmentKind::Callback(CallbackArc {
            eval: Arc::new(|tau| {
                let th = 2.0 * PI * tau;
                (
                    [th.cos(), th.sin(), 0.0],
                    [-2.0 * PI * th.sin(), 2.0 * PI * th.cos(), 0.0],
                )
            }),
        }),
        domain: (0.0, 1.0),
    };
    PiecewiseCurve::new(vec![segment], true).expect("equator is a valid closed curve")
}

pub fn curve_point(c: &PiecewiseCurve, s: f64) -> Result<UnitVector> {
    UnitVector::normalize(c.point(s)?.to_vec())
}

pub fn line_integral<F>(c: &PiecewiseCurve, f: F, tol: f64) -> Result<f64>
where
    F: Fn(&[f64; 3]) -> f64 + Sync,
{
    c.line_integral(f, tol)
}

/// Length by adaptive quadrature at `tol`; the first result is cached on
/// the curve.
pub fn curve_length(c: &PiecewiseCurve, tol: f64) -> Result<f64> {
    if let Some(l) = c.length.get() {
        return Ok(*l);
    }
    let l = c.line_integral(|_| 1.0, tol)?;
    Ok(*c.length.get_or_init(|| l))
}

/// Residuals of equal-weight (points) or arc-length (curves) averages
/// against exact sphere moments, one per monomial of degree `<= t`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureReport {
    pub degree: usize,
    pub residuals: Vec<(MonomialIndex, f64)>,
    pub max_residual: f64,
    /// Curve length, when the report certifies a curve.
    pub length: Option<f64>,
}

impl QuadratureReport {
    pub(crate) fn from_averages(
        degree: usize,
        basis: Vec<MonomialIndex>,
        averages: &[f64],
        length: Option<f64>,
    ) -> Self {
        let residuals: Vec<(MonomialIndex, f64)> = basis
            .into_iter()
            .zip(averages)
            .map(|(m, avg)| (m, (avg - sphere_monomial_integral(&m)).abs()))
            .collect();
        let max_residual = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
        Self {
            degree,
            residuals,
            max_residual,
            length,
        }
    }

    /// Monomial with the largest residual.
    pub fn worst(&self) -> Option<(MonomialIndex, f64)> {
        self.residuals.iter().copied().fold(
            None,
            |best: Option<(MonomialIndex, f64)>, r| match best {
                Some(b) if b.1 >= r.1 => Some(b),
                _ => Some(r),
            },
        )
    }

    pub fn residual_of(&self, m: &MonomialIndex) -> Option<f64> {
        self.residuals.iter().find(|r| r.0 == *m).map(|r| r.1)
    }

    pub fn passes(&self, threshold: f64) -> bool {
        self.max_residual <= threshold
    }
}

/// Certificate of exactness on polynomials of degree `<= t`:
/// `|(1/len) int_gamma m - int_S2 m|` for every monomial `m`.
pub fn design_residual(c: &PiecewiseCurve, t: usize, tol: f64) -> Result<QuadratureReport> {
    if !c.is_closed() {
        return Err(Error::InvalidCurve(
            "design residual needs a closed curve".into(),
        ));
    }
    let basis = monomial_basis(t);
    let n = basis.len();
    let integral = c.integrate_vector(
        n + 1,
        |p, out: &mut [f64]| {
            let table = PowerTable::new(p, t);
            out[0] = 1.0;
            for (o, m) in out[1..].iter_mut().zip(&basis) {
                *o = table.eval(m);
            }
        },
        tol,
    )?;
    let length = integral.values[0];
    let averages: Vec<f64> = integral.values[1..].iter().map(|v| v / length).collect();
    Ok(QuadratureReport::from_averages(
        t,
        basis,
        &averages,
        Some(length),
    ))
}

/// Sup over a Fibonacci probe mesh of the distance to a dense sample of the
/// curve. The error bar adds the mesh covering radius and half the largest
/// gap between consecutive curve samples.
pub fn curve_covering_radius(c: &PiecewiseCurve, mesh_size: usize) -> Result<CoveringEstimate> {
    if mesh_size < 100 {
        return Err(Error::InvalidArgument(
            "mesh size must be at least 100".into(),
        ));
    }
    let h = fibonacci_resolution(mesh_size);
    let spacing = h / 4.0;
    let mut samples = Vec::new();
    let mut max_gap: f64 = 0.0;
    for seg in &c.segments {
        let seg_len = integrate(
            |tau, out: &mut [f64]| out[0] = norm3(&seg.kind.local(tau).1),
            0.0,
            1.0,
            1,
            1e-10,
        )?
        .values[0];
        let n = ((seg_len / spacing).ceil() as usize).max(1) * 2;
        let mut prev = seg.kind.local(0.0).0;
        samples.push(prev);
        for j in 1..=n {
            let p = seg.kind.local(j as f64 / n as f64).0;
            max_gap = max_gap.max(distance3(&prev, &p));
            samples.push(p);
            prev = p;
        }
    }
    let index = NearestIndex::new(samples);
    Ok(CoveringEstimate {
        radius: index.farthest_over_mesh(mesh_size),
        resolution: h + 0.5 * max_gap,
    })
}

/// One row of a sampled trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub s: f64,
    pub point: [f64; 3],
    pub speed: f64,
}

/// Writes `s,x,y,z,speed` rows with a header line, plus a `value` column
/// when `values` is given.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], values: Option<&[f64]>, out: W) -> Result<()> {
    if let Some(v) = values {
        if v.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                left: rows.len(),
                right: v.len(),
            });
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["s", "x", "y", "z", "speed"];
    if values.is_some() {
        header.push("value");
    }
    w.write_record(&header)?;
    for (i, r) in rows.iter().enumerate() {
        let mut fields: Vec<String> = [r.s, r.point[0], r.point[1], r.point[2], r.speed]
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect();
        if let Some(v) = values {
            fields.push(format!("{:.16e}", v[i]));
        }
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// JSON document

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum SegmentParams {
    CircleArc {
        center: [f64; 3],
        radius: f64,
        u: [f64; 3],
        v: [f64; 3],
        theta_start: f64,
        theta_end: f64,
        orientation: i8,
    },
    Tennis {
        k: u32,
        a: f64,
        start: f64,
        end: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDocument {
    #[serde(flatten)]
    pub params: SegmentParams,
    pub domain: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDocument {
    pub segments: Vec<SegmentDocument>,
    pub closed: bool,
    pub length: f64,
}

impl CurveDocument {
    pub fn from_curve(c: &PiecewiseCurve) -> Result<Self> {
        let segments = c
            .segments
            .iter()
            .map(|seg| {
                let params = match &seg.kind {
                    SegmentKind::CircleArc(arc) => SegmentParams::CircleArc {
                        center: arc.frame.center,
                        radius: arc.radius,
                        u: arc.frame.u,
                        v: arc.frame.v,
                        theta_start: arc.theta_start,
                        theta_end: arc.theta_end,
                        orientation: arc.orientation(),
                    },
                    SegmentKind::Tennis(arc) => SegmentParams::Tennis {
                        k: arc.params.k(),
                        a: arc.params.a(),
                        start: arc.start,
                        end: arc.end,
                    },
                    SegmentKind::Callback(_) => {
                        return Err(Error::InvalidCurve(
                            "callback segments cannot be exported".into(),
                        ))
                    }
                };
                Ok(SegmentDocument {
                    params,
                    domain: [seg.domain.0, seg.domain.1],
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            segments,
            closed: c.closed,
            length: c.length()?,
        })
    }

    pub fn to_curve(&self) -> Result<PiecewiseCurve> {
        let segments = self
            .segments
            .iter()
            .map(|doc| {
                let kind = match doc.params {
                    SegmentParams::CircleArc {
                        center,
                        radius,
                        u,
                        v,
                        theta_start,
                        theta_end,
                        orientation,
                    } => {
                        let frame_ok = [
                            (dot3(&center, &center) - 1.0).abs(),
                            (dot3(&u, &u) - 1.0).abs(),
                            (dot3(&v, &v) - 1.0).abs(),
                            dot3(&u, &v).abs(),
                            dot3(&u, &center).abs(),
                            dot3(&v, &center).abs(),
                        ]
                        .iter()
                        .all(|e| *e <= 1e-9);
                        if !frame_ok {
                            return Err(Error::InvalidCurve(
                                "circle frame is not orthonormal".into(),
                            ));
                        }
                        let arc_orientation = if theta_end >= theta_start { 1 } else { -1 };
                        if orientation != arc_orientation {
                            return Err(Error::InvalidCurve(
                                "orientation disagrees with angle range".into(),
                            ));
                        }
                        let cap =
                            SphericalCap::new(UnitVector::normalize(center.to_vec())?, radius)?;
                        let (sin_r, cos_r) = radius.sin_cos();
                        let frame = CircleFrame {
                            center,
                            offset: [center[0] * cos_r, center[1] * cos_r, center[2] * cos_r],
                            u,
                            v,
                            cos_r,
                            sin_r,
                        };
                        SegmentKind::CircleArc(CircleArc::new(&cap, frame, theta_start, theta_end))
                    }
                    SegmentParams::Tennis { k, a, start, end } => SegmentKind::Tennis(TennisArc {
                        params: TennisParams::new(k, a)?,
                        start,
                        end,
                    }),
                };
                Ok(CurveSegment {
                    kind,
                    domain: (doc.domain[0], doc.domain[1]),
                })
            })
            .collect::<Result<_>>()?;
        PiecewiseCurve::new(segments, self.closed)
    }

    /// Compact JSON with every number written to 17 significant digits.
    pub fn to_json_string(&self) -> Result<String> {
        to_json_17(self)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Writes floats as `d.dddddddddddddddde±x` (17 significant digits).
struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
}

/// Serializes any value with the 17-digit float format.
pub fn to_json_17<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn load_curve(path: &Path) -> Result<PiecewiseCurve> {
    let text = std::fs::read_to_string(path)?;
    CurveDocument::from_json_str(&text)?.to_curve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cap_boundary_frame;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    pub(crate) fn circle(center: [f64; 3], r: f64) -> PiecewiseCurve {
        let cap = SphericalCap::new(UnitVector::normalize(center.to_vec()).unwrap(), r).unwrap();
        let frame = cap_boundary_frame(&cap).unwrap();
        let arc = CircleArc::new(&cap, frame, 0.0, 2.0 * PI);
        PiecewiseCurve::new(
            vec![CurveSegment {
                kind: SegmentKind::CircleArc(arc),
                domain: (0.0, 1.0),
            }],
            true,
        )
        .unwrap()
    }

    fn equator() -> PiecewiseCurve {
        PiecewiseCurve::new(
            vec![CurveSegment {
                kind: SegmentKind::Callback(CallbackArc {
                    eval: Arc::new(|tau| {
                        let th = 2.0 * PI * tau;
                        (
                            [th.cos(), th.sin(), 0.0],
                            [-2.0 * PI * th.sin(), 2.0 * PI * th.cos(), 0.0],
                        )
                    }),
                }),
                domain: (0.0, 1.0),
            }],
            true,
        )
        .unwrap()
    }

    /// Equator split into three circle arcs of unequal parameter share.
    fn split_equator() -> PiecewiseCurve {
        let cap = SphericalCap::new(UnitVector::axis(3, 2), FRAC_PI_2 - 1e-13).unwrap();
        let frame = cap_boundary_frame(&cap).unwrap();
        let cuts = [0.0, 1.0, 2.5, 2.0 * PI];
        let pieces: Vec<SegmentKind> = cuts
            .windows(2)
            .map(|w| SegmentKind::CircleArc(CircleArc::new(&cap, frame, w[0], w[1])))
            .collect();
        PiecewiseCurve::from_pieces(pieces, &[0.2, 0.5, 0.3], true).unwrap()
    }

    #[test]
    fn point_examples() {
        let c = equator();
        let p = c.point(0.0).unwrap();
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-15);
        for i in 0..=50 {
            let q = curve_point(&c, i as f64 / 50.0).unwrap();
            assert_abs_diff_eq!(norm3(&q.xyz().unwrap()), 1.0, epsilon = 1e-10);
        }
        assert!(distance3(&c.point(0.0).unwrap(), &c.point(1.0).unwrap()) < 1e-12);
        assert!(matches!(
            c.point(1.5),
            Err(Error::ParameterOutOfRange { .. })
        ));
    }

    #[test]
    fn integral_examples() {
        let c = equator();
        assert_abs_diff_eq!(curve_length(&c, 1e-12).unwrap(), 2.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(
            line_integral(&c, |p| p[2], 1e-12).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        for r in [0.1, 0.8, 1.4] {
            let b = circle([0.0, 0.6, 0.8], r);
            assert_abs_diff_eq!(b.length().unwrap(), 2.0 * PI * r.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn additivity_and_reversal() {
        let c = split_equator();
        let f = |p: &[f64; 3], out: &mut [f64]| out[0] = p[0] * p[0] + 0.3 * p[1] + 1.0;
        let whole = c.integrate_vector(1, f, 1e-13).unwrap().values[0];
        let parts: f64 = c
            .segment_integrals(1, &f, 1e-13)
            .unwrap()
            .iter()
            .map(|i| i.values[0])
            .sum();
        assert_abs_diff_eq!(whole, parts, epsilon = 1e-12 * whole.abs());
        assert_abs_diff_eq!(whole, PI + 2.0 * PI, epsilon = 1e-11);
        let back = c.reversed().unwrap();
        let rev = back.integrate_vector(1, f, 1e-13).unwrap().values[0];
        assert_abs_diff_eq!(whole, rev, epsilon = 1e-12);
        // reparametrizing the global range leaves the integral unchanged
        assert_abs_diff_eq!(c.length().unwrap(), 2.0 * PI, epsilon = 1e-11);
    }

    #[test]
    fn construction_rejects_bad_curves() {
        let cap = SphericalCap::new(UnitVector::axis(3, 2), 0.5).unwrap();
        let frame = cap_boundary_frame(&cap).unwrap();
        let half = SegmentKind::CircleArc(CircleArc::new(&cap, frame, 0.0, PI));
        assert!(matches!(
            PiecewiseCurve::from_pieces(vec![half.clone()], &[1.0], true),
            Err(Error::OpenCurve { .. })
        ));
        assert!(PiecewiseCurve::from_pieces(vec![half.clone()], &[1.0], false).is_ok());
        let other = SegmentKind::CircleArc(CircleArc::new(&cap, frame, 0.5, 2.0 * PI));
        assert!(matches!(
            PiecewiseCurve::from_pieces(vec![half, other], &[1.0, 1.0], false),
            Err(Error::Discontinuous { .. })
        ));
        assert!(PiecewiseCurve::new(vec![], true).is_err());
    }

    #[test]
    fn residual_examples() {
        let c = equator();
        let r1 = design_residual(&c, 1, 1e-12).unwrap();
        assert!(r1.max_residual <= 1e-10);
        let r0 = design_residual(&circle([0.3, 0.4, 0.866], 0.3), 0, 1e-12).unwrap();
        assert!(r0.max_residual <= 1e-12);
        let r2 = design_residual(&c, 2, 1e-12).unwrap();
        let z2 = r2.residual_of(&MonomialIndex::xyz(0, 0, 2)).unwrap();
        assert_abs_diff_eq!(z2, 1.0 / 3.0, epsilon = 1e-12);
        assert_eq!(r2.worst().unwrap().0, MonomialIndex::xyz(0, 0, 2));
        assert_eq!(
            r2.max_residual,
            r2.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
        );
    }

    #[test]
    fn covering_radius_of_equator() {
        let est = curve_covering_radius(&equator(), 4000).unwrap();
        assert!((est.radius - FRAC_PI_2).abs() <= est.resolution, "{est:?}");
        assert!(curve_covering_radius(&equator(), 10).is_err());
    }

    #[test]
    fn json_round_trip_and_digits() {
        let c = split_equator();
        let doc = CurveDocument::from_curve(&c).unwrap();
        let text = doc.to_json_string().unwrap();
        assert!(text.contains("\"kind\":\"circle-arc\""));
        assert!(text.contains("e0"));
        let back = CurveDocument::from_json_str(&text).unwrap();
        assert_eq!(back, doc);
        let c2 = back.to_curve().unwrap();
        for i in 0..=20 {
            let s = i as f64 / 20.0;
            assert_eq!(c.point(s).unwrap(), c2.point(s).unwrap());
        }
        assert!(CurveDocument::from_curve(&equator()).is_err());
    }

    #[test]
    fn trace_csv_shape() {
        let rows = equator().sample(1000).unwrap();
        assert_eq!(rows.len(), 1000);
        assert!(rows.windows(2).all(|w| w[0].s < w[1].s));
        assert!(distance3(&rows[0].point, &rows[999].point) < 1e-6);
        let mut buf = Vec::new();
        write_trace_csv(&rows[..3], None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("s,x,y,z,speed\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
