//! Recovering polynomials from their values along a design curve.
//!
//! On a `2t`-design curve the arc-length average of `f k_x` with the
//! degree-`t` reproducing kernel `k_x` returns `f(x)` for every `f` of
//! degree `<= t`. The continuous form uses adaptive quadrature; traces of
//! finitely many samples use a periodic trapezoid rule in the curve
//! parameter.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::curve::{design_residual, PiecewiseCurve, CURVE_CERTIFY_THRESHOLD, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::geometry::{dot3, fibonacci_points, UnitVector};
use crate::harmonics::{orthonormal_basis, KernelSpec};
use crate::polynomial::SphericalPolynomial;

/// Smallest accepted reciprocal condition number of the evaluation system.
pub const MIN_RCOND: f64 = 1e-10;

/// Relative trace misfit above which the samples are reported as not
/// coming from a polynomial of the requested degree.
pub const SPAN_TOL: f64 = 1e-6;

/// Fails unless `c` integrates all polynomials of degree `<= degree`
/// exactly (within [`CURVE_CERTIFY_THRESHOLD`]); returns the residual.
pub fn require_design(c: &PiecewiseCurve, degree: usize) -> Result<f64> {
    let r = design_residual(c, degree, DEFAULT_TOL)?.max_residual;
    if r > CURVE_CERTIFY_THRESHOLD {
        return Err(Error::Uncertified {
            degree,
            residual: r,
        });
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsevalReport {
    /// `(1/len) int_gamma f^2`.
    pub lhs: f64,
    /// `int_S2 f^2` from exact moments.
    pub rhs: f64,
    pub gap: f64,
    /// Design residual of the curve at degree `2t`.
    pub certificate: f64,
}

/// Compares the curve average of `f^2` with its sphere average, for `f` of
/// degree `<= t` on a `2t`-design curve.
pub fn parseval_check(
    c: &PiecewiseCurve,
    f: &SphericalPolynomial,
    t: usize,
) -> Result<ParsevalReport> {
    if f.max_term_degree() > t {
        return Err(Error::InvalidArgument(format!(
            "polynomial of degree {} exceeds t = {t}",
            f.max_term_degree()
        )));
    }
    let certificate = require_design(c, 2 * t)?;
    let lhs = c.line_integral(|p| f.eval(p).powi(2), DEFAULT_TOL)? / c.length()?;
    let rhs = f.mul(f).sphere_integral();
    Ok(ParsevalReport {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        certificate,
    })
}

/// `(1/len) int_gamma f k_x` at every `x`, in one pass over the curve.
pub fn reconstruct_many<F>(
    c: &PiecewiseCurve,
    f: F,
    t: usize,
    xs: &[[f64; 3]],
    tol: f64,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64; 3]) -> f64 + Sync,
{
    let kernel = KernelSpec::sphere(t);
    let integral = c.integrate_vector(
        xs.len() + 1,
        |p, out: &mut [f64]| {
            let v = f(p);
            out[0] = 1.0;
            for (o, x) in out[1..].iter_mut().zip(xs) {
                *o = v * kernel.eval_inner(dot3(p, x));
            }
        },
        tol,
    )?;
    let len = integral.values[0];
    Ok(integral.values[1..].iter().map(|v| v / len).collect())
}

/// Kernel reconstruction of `f` at `x` from its values along `c`.
pub fn reconstruct_at<F>(c: &PiecewiseCurve, f: F, t: usize, x: &UnitVector) -> Result<f64>
where
    F: Fn(&[f64; 3]) -> f64 + Sync,
{
    Ok(reconstruct_many(c, f, t, &[x.xyz()?], DEFAULT_TOL)?[0])
}

/// Samples of a scalar field along a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTrace {
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    pub points: Vec<[f64; 3]>,
    pub speeds: Vec<f64>,
}

impl CurveTrace {
    /// Attaches positions and speeds from `c` to given samples. Parameters
    /// must increase strictly within `[0, 1]`.
    pub fn from_values(c: &PiecewiseCurve, s: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if s.len() != values.len() {
            return Err(Error::DimensionMismatch {
                left: s.len(),
                right: values.len(),
            });
        }
        if s.len() < 2 {
            return Err(Error::InvalidArgument(
                "a trace needs at least two samples".into(),
            ));
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) || s[0] < 0.0 || s[s.len() - 1] > 1.0 {
            return Err(Error::InvalidArgument(
                "trace parameters must increase strictly within [0, 1]".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("trace values must be finite".into()));
        }
        let points = s
            .iter()
            .map(|&si| c.point(si))
            .collect::<Result<Vec<_>>>()?;
        let speeds = s
            .iter()
            .map(|&si| c.speed(si))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            s,
            values,
            points,
            speeds,
        })
    }

    /// `n` samples of `f` at `s_i = i / n`.
    pub fn sample<F>(c: &PiecewiseCurve, n: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64; 3]) -> f64,
    {
        let s: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let values = s
            .iter()
            .map(|&si| c.point(si).map(|p| f(&p)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(c, s, values)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Periodic trapezoid weights; a final sample at `s = 1` repeats the
    /// one at `s = 0` and gets weight zero.
    fn weights(&self, stride: usize) -> Vec<(usize, f64)> {
        let mut idx: Vec<usize> = (0..self.len()).step_by(stride).collect();
        if idx.len() > 1 && self.s[0] == 0.0 && self.s[*idx.last().unwrap()] == 1.0 {
            idx.pop();
        }
        let m = idx.len();
        idx.iter()
            .enumerate()
            .map(|(k, &i)| {
                let next = if k + 1 < m {
                    self.s[idx[k + 1]]
                } else {
                    self.s[idx[0]] + 1.0
                };
                let prev = if k > 0 {
                    self.s[idx[k - 1]]
                } else {
                    self.s[idx[m - 1]] - 1.0
                };
                (i, 0.5 * (next - prev) * self.speeds[i])
            })
            .collect()
    }

    /// Discrete kernel reconstruction at each `x`, using every `stride`-th
    /// sample.
    fn kernel_values(&self, t: usize, xs: &[[f64; 3]], stride: usize) -> Vec<f64> {
        let kernel = KernelSpec::sphere(t);
        let w = self.weights(stride);
        let len: f64 = w.iter().map(|(_, wi)| wi).sum();
        xs.par_iter()
            .map(|x| {
                w.iter()
                    .map(|&(i, wi)| {
                        wi * self.values[i] * kernel.eval_inner(dot3(&self.points[i], x))
                    })
                    .sum::<f64>()
                    / len
            })
            .collect()
    }
}

/// Reads the `s` and `value` columns of a trace CSV (other columns are
/// ignored).
pub fn read_value_trace(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("missing column '{name}'"),
            })
    };
    let (si, vi) = (col("s")?, col("value")?);
    let (mut s, mut values) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let field = |k: usize| -> Result<f64> {
            let raw = record.get(k).unwrap_or("");
            raw.trim().parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: format!("invalid number '{raw}'"),
            })
        };
        s.push(field(si)?);
        values.push(field(vi)?);
    }
    Ok((s, values))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub degree: usize,
    /// The recovered polynomial in monomial form.
    pub polynomial: SphericalPolynomial,
    /// Coefficients in [`orthonormal_basis`] order.
    pub coefficients: Vec<f64>,
    /// Condition number of the evaluation system.
    pub condition: f64,
    /// Largest `|p(gamma(s_i)) - value_i|` over the trace.
    pub trace_residual: f64,
    /// Largest coefficient change when every other sample is dropped.
    pub error_estimate: f64,
    /// Whether the trace is consistent with a polynomial of this degree.
    pub in_span: bool,
}

/// Degree-`t` polynomial recovered from a trace: the kernel formula is
/// applied at `(t+1)^2` Fibonacci points and the interpolation system in
/// the orthonormal harmonic basis is solved by SVD.
pub fn reconstruct_coeffs(trace: &CurveTrace, t: usize) -> Result<Reconstruction> {
    let basis = orthonormal_basis(t)?;
    let n = basis.len();
    let nodes = fibonacci_points(n);
    let v = DMatrix::from_fn(n, n, |i, j| basis[j].eval(&nodes[i]));
    let svd = v.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let rcond = smin / smax;
    if !(rcond > MIN_RCOND) {
        return Err(Error::RankDeficient { rcond });
    }
    let solve = |stride: usize| -> Result<Vec<f64>> {
        let rhs = DVector::from_vec(trace.kernel_values(t, &nodes, stride));
        let c = svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::Eigen(e.to_string()))?;
        Ok(c.iter().copied().collect())
    };
    let coefficients = solve(1)?;
    let error_estimate = if trace.len() >= 8 {
        let coarse = solve(2)?;
        coarse
            .iter()
            .zip(&coefficients)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let mut polynomial = SphericalPolynomial::zero(t);
    for (q, c) in basis.iter().zip(&coefficients) {
        polynomial = polynomial.add(&q.scale(*c));
    }
    let polynomial = polynomial.pruned(0.0);
    let trace_residual = trace
        .points
        .par_iter()
        .zip(&trace.values)
        .map(|(p, v)| (polynomial.eval(p) - v).abs())
        .reduce(|| 0.0, f64::max);
    let scale = trace.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Ok(Reconstruction {
        degree: t,
        polynomial,
        coefficients,
        condition: smax / smin,
        trace_residual,
        error_estimate,
        in_span: trace_residual <= SPAN_TOL * scale + error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_design_curve;
    use crate::families::{solve_design_param, tennis_curve, DEFAULT_SOLVE_TOL};
    use crate::points::{builtin_design, BuiltinDesign};
    use crate::polynomial::{monomial_basis, MonomialIndex};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn tennis2() -> PiecewiseCurve {
        tennis_curve(2, solve_design_param(2, DEFAULT_SOLVE_TOL).unwrap()).unwrap()
    }

    fn ico_curve() -> PiecewiseCurve {
        let x = builtin_design(BuiltinDesign::Icosahedron).unwrap();
        assemble_design_curve(&x, 5, None).unwrap().curve
    }

    fn equator() -> PiecewiseCurve {
        tennis_curve(1, 1.0).unwrap()
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..2.0 * PI);
        let r = (1.0 - z * z).sqrt();
        [r * phi.cos(), r * phi.sin(), z]
    }

    fn random_poly(rng: &mut ChaCha8Rng, t: usize) -> SphericalPolynomial {
        SphericalPolynomial::from_terms(
            t,
            monomial_basis(t)
                .into_iter()
                .map(|m| (m, rng.gen_range(-1.0..1.0))),
        )
        .unwrap()
    }

    #[test]
    fn parseval_examples() {
        let one = SphericalPolynomial::constant(1.0);
        assert!(parseval_check(&equator(), &one, 0).unwrap().gap <= 1e-12);
        let z = SphericalPolynomial::monomial(MonomialIndex::xyz(0, 0, 1));
        let rep = parseval_check(&tennis2(), &z, 1).unwrap();
        assert!(rep.gap <= 1e-8, "{rep:?}");
        assert_abs_diff_eq!(rep.rhs, 1.0 / 3.0, epsilon = 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ico = ico_curve();
        for _ in 0..3 {
            let f = random_poly(&mut rng, 2);
            assert!(parseval_check(&ico, &f, 2).unwrap().gap <= 1e-8);
        }
        // the equator is not a 2-design
        assert!(matches!(
            parseval_check(&equator(), &z, 1),
            Err(Error::Uncertified { degree: 2, .. })
        ));
    }

    #[test]
    fn reconstruct_at_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = tennis2();
        let xs: Vec<[f64; 3]> = (0..100).map(|_| random_unit(&mut rng)).collect();
        let ones = reconstruct_many(&c, |_| 1.0, 1, &xs, 1e-12).unwrap();
        assert!(ones.iter().all(|v| (v - 1.0).abs() <= 1e-10));
        let got = reconstruct_many(&c, |p| p[0], 1, &xs, 1e-12).unwrap();
        for (g, x) in got.iter().zip(&xs) {
            assert_abs_diff_eq!(*g, x[0], epsilon = 1e-6);
        }
        let ico = ico_curve();
        let f = random_poly(&mut rng, 2);
        let xs: Vec<[f64; 3]> = (0..50).map(|_| random_unit(&mut rng)).collect();
        let got = reconstruct_many(&ico, |p| f.eval(p), 2, &xs, 1e-12).unwrap();
        let sup = got
            .iter()
            .zip(&xs)
            .map(|(g, x)| (g - f.eval(x)).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 1e-6, "{sup}");
        let x = UnitVector::from_xyz(xs[0]).unwrap();
        assert_abs_diff_eq!(
            reconstruct_at(&ico, |p| f.eval(p), 2, &x).unwrap(),
            got[0],
            epsilon = 1e-12
        );
    }

    #[test]
    fn reconstruction_is_linear_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = ico_curve();
        let (f, g) = (random_poly(&mut rng, 2), random_poly(&mut rng, 2));
        let xs: Vec<[f64; 3]> = (0..20).map(|_| random_unit(&mut rng)).collect();
        let rf = reconstruct_many(&c, |p| f.eval(p), 2, &xs, 1e-12).unwrap();
        let rg = reconstruct_many(&c, |p| g.eval(p), 2, &xs, 1e-12).unwrap();
        let rfg =
            reconstruct_many(&c, |p| 2.0 * f.eval(p) - 0.5 * g.eval(p), 2, &xs, 1e-12).unwrap();
        for i in 0..xs.len() {
            assert_abs_diff_eq!(rfg[i], 2.0 * rf[i] - 0.5 * rg[i], epsilon = 1e-10);
        }
        // reconstructing a degree-3 function gives some p in Pi_2; doing it again returns p
        let h = |p: &[f64; 3]| p[2].powi(3) + p[0] * p[1];
        let trace = CurveTrace::sample(&c, 20_000, h).unwrap();
        let p = reconstruct_coeffs(&trace, 2).unwrap().polynomial;
        let once = reconstruct_many(&c, |q| p.eval(q), 2, &xs, 1e-12).unwrap();
        for (v, x) in once.iter().zip(&xs) {
            assert_abs_diff_eq!(*v, p.eval(x), epsilon = 2e-10);
        }
    }

    #[test]
    fn degree_sharpness_witness() {
        // t = 1 on the 2-design tennis curve, f = z^2
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let xs: Vec<[f64; 3]> = (0..20).map(|_| random_unit(&mut rng)).collect();
        let got = reconstruct_many(&tennis2(), |p| p[2] * p[2], 1, &xs, 1e-12).unwrap();
        let gap = got
            .iter()
            .zip(&xs)
            .map(|(g, x)| (g - x[2] * x[2]).abs())
            .fold(0.0, f64::max);
        assert!(gap > 1e-3);
        // t = 2 on the icosahedron curve, f = z^3
        let got = reconstruct_many(&ico_curve(), |p| p[2].powi(3), 2, &xs, 1e-12).unwrap();
        let gap = got
            .iter()
            .zip(&xs)
            .map(|(g, x)| (g - x[2].powi(3)).abs())
            .fold(0.0, f64::max);
        assert!(gap > 1e-3);
    }

    #[test]
    fn coefficient_recovery() {
        let c = equator();
        let trace = CurveTrace::sample(&c, 64, |_| 1.0).unwrap();
        let rec = reconstruct_coeffs(&trace, 0).unwrap();
        assert_abs_diff_eq!(
            rec.polynomial.coefficient(&MonomialIndex::CONSTANT),
            1.0,
            epsilon = 1e-12
        );
        assert!(rec.in_span);

        let trace = CurveTrace::sample(&c, 64, |p| p[2]).unwrap();
        let rec = reconstruct_coeffs(&trace, 0).unwrap();
        assert!(rec.polynomial.coefficient(&MonomialIndex::CONSTANT).abs() <= 1e-12);
        assert!(
            rec.in_span,
            "z vanishes on the equator, so the trace is constant"
        );
        let trace = CurveTrace::sample(&c, 64, |p| p[0]).unwrap();
        let rec = reconstruct_coeffs(&trace, 0).unwrap();
        assert!(rec.polynomial.coefficient(&MonomialIndex::CONSTANT).abs() <= 1e-12);
        assert!(!rec.in_span);

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ico = ico_curve();
        let f = random_poly(&mut rng, 2);
        let n = 40 * 4 * ico.segments().len();
        let trace = CurveTrace::sample(&ico, n, |p| f.eval(p)).unwrap();
        let rec = reconstruct_coeffs(&trace, 2).unwrap();
        let diff = rec.polynomial.sub(&f);
        // compare as functions on the sphere: the monomial form is not unique there
        let err = fibonacci_points(500)
            .iter()
            .map(|p| diff.eval(p).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-5, "{err} {rec:?}");
        assert!(rec.in_span);
        assert!(rec.error_estimate < 1e-3);
        let basis = orthonormal_basis(2).unwrap();
        for (q, c) in basis.iter().zip(&rec.coefficients) {
            assert_abs_diff_eq!(*c, f.mul(q).sphere_integral(), epsilon = 1e-5);
        }
    }

    #[test]
    fn trace_csv_round_trip() {
        let c = equator();
        let rows = c.sample(50).unwrap();
        let values: Vec<f64> = rows.iter().map(|r| r.point[0] + 0.25).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        crate::curve::write_trace_csv(&rows, Some(&values), std::fs::File::create(&path).unwrap())
            .unwrap();
        let (s, v) = read_value_trace(&path).unwrap();
        assert_eq!(v, values);
        assert_eq!(s, rows.iter().map(|r| r.s).collect::<Vec<_>>());
        std::fs::write(&path, "s,x\n0,1\n").unwrap();
        assert!(matches!(read_value_trace(&path), Err(Error::Parse { .. })));
        std::fs::write(&path, "s,value\n0,1\n0.5,abc\n").unwrap();
        assert!(matches!(
            read_value_trace(&path),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn trace_validation() {
        let c = equator();
        assert!(CurveTrace::from_values(&c, vec![0.0, 0.5, 0.5], vec![1.0; 3]).is_err());
        assert!(CurveTrace::from_values(&c, vec![0.0, 0.5], vec![1.0]).is_err());
        assert!(CurveTrace::from_values(&c, vec![0.0, 1.5], vec![1.0; 2]).is_err());
        assert!(CurveTrace::from_values(&c, vec![0.0, 0.5], vec![1.0, f64::NAN]).is_err());
        // a closing sample at s = 1 is not double counted
        let s: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let vals = vec![1.0; 101];
        let t = CurveTrace::from_values(&c, s, vals).unwrap();
        let w: f64 = t.weights(1).iter().map(|x| x.1).sum();
        assert_abs_diff_eq!(w, 2.0 * PI, epsilon = 1e-12);
    }
}
