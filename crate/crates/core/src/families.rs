//! The tennis-ball family
//!
//! `gamma(s) = (a cos 2 pi s + (1-a) cos 2 pi (2k-1) s,
//!              a sin 2 pi s - (1-a) sin 2 pi (2k-1) s,
//!              2 sqrt(a(1-a)) sin 2 pi k s)`
//!
//! and the solve for the parameter `a_k` that turns it into a design curve.

use std::f64::consts::PI;

use crate::curve::{CurveSegment, PiecewiseCurve, SegmentKind, TennisArc};
use crate::error::{Error, Result};
use crate::geometry::UnitVector;

/// Spectrum length used by [`eta`] before any doubling.
pub const DEFAULT_SPECTRUM_LEN: usize = 32;

/// Largest allowed `|c_N|`.
pub const SPECTRUM_TAIL: f64 = 1e-14;

/// Default bisection tolerance on `|eta(a) - 1/3|`.
pub const DEFAULT_SOLVE_TOL: f64 = 1e-12;

const MAX_SAMPLES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TennisParams {
    k: u32,
    a: f64,
}

impl TennisParams {
    /// `k >= 1`, `a in [0, 1]`.
    pub fn new(k: u32, a: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidArgument(format!(
                "a must lie in [0, 1], got {a}"
            )));
        }
        Ok(Self { k, a })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    fn m(&self) -> f64 {
        (2 * self.k - 1) as f64
    }

    fn height(&self) -> f64 {
        2.0 * (self.a * (1.0 - self.a)).sqrt()
    }
}

pub(crate) fn tennis_point_xyz(p: &TennisParams, s: f64) -> [f64; 3] {
    let w = 2.0 * PI * s;
    let (a, m) = (p.a, p.m());
    [
        a * w.cos() + (1.0 - a) * (m * w).cos(),
        a * w.sin() - (1.0 - a) * (m * w).sin(),
        p.height() * (p.k as f64 * w).sin(),
    ]
}

/// `d gamma / ds`.
pub fn tennis_velocity(p: &TennisParams, s: f64) -> [f64; 3] {
    let w = 2.0 * PI * s;
    let (a, m, k) = (p.a, p.m(), p.k as f64);
    let tau = 2.0 * PI;
    [
        -tau * (a * w.sin() + (1.0 - a) * m * (m * w).sin()),
        tau * (a * w.cos() - (1.0 - a) * m * (m * w).cos()),
        tau * k * p.height() * (k * w).cos(),
    ]
}

pub fn tennis_point(p: &TennisParams, s: f64) -> Result<UnitVector> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::ParameterOutOfRange {
            s,
            lo: 0.0,
            hi: 1.0,
        });
    }
    UnitVector::normalize(tennis_point_xyz(p, s).to_vec())
}

/// Constants of the squared-speed law `|gamma'(s)|^2 = alpha + beta cos(4 pi k s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedParams {
    pub alpha: f64,
    pub beta: f64,
    /// `alpha - beta` from its own closed form, for cross-checking.
    pub difference: f64,
}

pub fn speed_params(p: &TennisParams) -> SpeedParams {
    let (a, k) = (p.a, p.k as f64);
    let pi2 = 4.0 * PI * PI;
    let m = 2.0 * k - 1.0;
    let alpha =
        pi2 * (m * m - 2.0 * a * (3.0 * k * k - 4.0 * k + 1.0) + 2.0 * a * a * (k - 1.0).powi(2));
    let beta = 2.0 * pi2 * a * (1.0 - a) * (k - 1.0).powi(2);
    let difference = pi2 * (a * a + m * m * (1.0 - a).powi(2) + 2.0 * a * (1.0 - a) * m);
    SpeedParams {
        alpha,
        beta,
        difference,
    }
}

/// Cosine coefficients of the speed: `|gamma'(s)| = sum_n c_n cos(4 pi k n s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedSpectrum {
    pub alpha: f64,
    pub beta: f64,
    /// `c_0, ..., c_N`; `c_0` is the curve length.
    pub fourier: Vec<f64>,
}

impl SpeedSpectrum {
    pub fn length(&self) -> f64 {
        self.fourier[0]
    }
}

/// Computes `c_0..c_n_max` by the periodic trapezoid rule, doubling the
/// sample count until the coefficients settle.
pub fn speed_fourier(p: &TennisParams, n_max: usize) -> Result<SpeedSpectrum> {
    let sp = speed_params(p);
    if !(sp.alpha - sp.beta > 0.0) {
        return Err(Error::Domain(
            "speed vanishes somewhere on the curve".into(),
        ));
    }
    let coeffs = |m: usize| -> Vec<f64> {
        let samples: Vec<f64> = (0..m)
            .map(|j| (sp.alpha + sp.beta * (2.0 * PI * j as f64 / m as f64).cos()).sqrt())
            .collect();
        (0..=n_max)
            .map(|n| {
                let sum: f64 = samples
                    .iter()
                    .enumerate()
                    .map(|(j, f)| f * (2.0 * PI * ((n * j) % m) as f64 / m as f64).cos())
                    .sum();
                if n == 0 {
                    sum / m as f64
                } else {
                    2.0 * sum / m as f64
                }
            })
            .collect()
    };
    let mut m = (4 * (n_max + 1)).next_power_of_two().max(64);
    let mut prev = coeffs(m);
    loop {
        m *= 2;
        let next = coeffs(m);
        let change = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        prev = next;
        if change <= 4.0 * f64::EPSILON * prev[0] || m >= MAX_SAMPLES {
            break;
        }
    }
    let tail = prev[n_max].abs();
    if n_max > 0 && tail >= SPECTRUM_TAIL {
        return Err(Error::SpectrumTail { n: n_max, tail });
    }
    Ok(SpeedSpectrum {
        alpha: sp.alpha,
        beta: sp.beta,
        fourier: prev,
    })
}

/// Spectrum with a tail below [`SPECTRUM_TAIL`], doubling `N` as needed.
pub fn converged_spectrum(p: &TennisParams) -> Result<SpeedSpectrum> {
    let mut n = DEFAULT_SPECTRUM_LEN;
    loop {
        match speed_fourier(p, n) {
            Err(Error::SpectrumTail { .. }) if n < 4096 => n *= 2,
            other => return other,
        }
    }
}

/// `eta(a) = 2a(1-a)(1 - c_1 / (2 c_0))`, the arc-length average of `z^2`.
pub fn eta(p: &TennisParams) -> Result<f64> {
    let spec = converged_spectrum(p)?;
    let a = p.a;
    Ok(2.0 * a * (1.0 - a) * (1.0 - 0.5 * spec.fourier[1] / spec.fourier[0]))
}

/// Bisection on `[1/2, 1]` for `eta(a) = 1/3`.
pub fn solve_design_param(k: u32, tol: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "design solve needs k >= 2, got {k}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let g = |a: f64| -> Result<f64> { Ok(eta(&TennisParams::new(k, a)?)? - 1.0 / 3.0) };
    let (mut lo, mut hi) = (0.5, 1.0);
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(Error::SignCondition {
            eta_low: g_lo + 1.0 / 3.0,
            eta_high: g_hi + 1.0 / 3.0,
        });
    }
    loop {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if gm.abs() <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// The whole family member as a closed single-segment curve.
pub fn tennis_curve(k: u32, a: f64) -> Result<PiecewiseCurve> {
    let params = TennisParams::new(k, a)?;
    let sp = speed_params(&params);
    if !(sp.alpha - sp.beta > 0.0) {
        return Err(Error::Domain(
            "speed vanishes somewhere on the curve".into(),
        ));
    }
    PiecewiseCurve::new(
        vec![CurveSegment {
            kind: SegmentKind::Tennis(TennisArc {
                params,
                start: 0.0,
                end: 1.0,
            }),
            domain: (0.0, 1.0),
        }],
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{curve_length, design_residual};
    use crate::geometry::norm3;
    use crate::polynomial::MonomialIndex;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    // Independent reference values (adaptive quadrature of the speed and a
    // bracketing root finder, outside this crate).
    const A2: f64 = 0.7777999002629709;
    const A3: f64 = 0.7660487581673753;
    const A4: f64 = 0.7583593417467129;
    const L2: f64 = 9.786008023998663;
    const L3: f64 = 14.232063520282061;

    #[test]
    fn point_examples() {
        for k in 1..5 {
            for a in [0.0, 0.3, 1.0] {
                let p = tennis_point(&TennisParams::new(k, a).unwrap(), 0.0).unwrap();
                assert_abs_diff_eq!(p.coords()[0], 1.0, epsilon = 1e-15);
            }
        }
        let eq = TennisParams::new(1, 1.0).unwrap();
        for s in [0.1, 0.37, 0.8] {
            let p = tennis_point_xyz(&eq, s);
            assert_abs_diff_eq!(p[0], (2.0 * PI * s).cos(), epsilon = 1e-15);
            assert_abs_diff_eq!(p[1], (2.0 * PI * s).sin(), epsilon = 1e-15);
            assert_eq!(p[2], 0.0);
        }
        let p = TennisParams::new(2, 0.7).unwrap();
        assert_abs_diff_eq!(norm3(&tennis_point_xyz(&p, 0.3)), 1.0, epsilon = 1e-12);
        assert!(tennis_point(&p, 1.1).is_err());
        assert!(TennisParams::new(0, 0.5).is_err());
        assert!(TennisParams::new(2, 1.5).is_err());
    }

    #[test]
    fn velocity_matches_finite_differences() {
        let p = TennisParams::new(3, 0.62).unwrap();
        let h = 1e-6;
        for s in [0.05, 0.41, 0.77] {
            let fwd = tennis_point_xyz(&p, s + h);
            let bwd = tennis_point_xyz(&p, s - h);
            let v = tennis_velocity(&p, s);
            for i in 0..3 {
                assert_abs_diff_eq!(v[i], (fwd[i] - bwd[i]) / (2.0 * h), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn speed_law_examples() {
        assert_eq!(speed_params(&TennisParams::new(3, 0.0).unwrap()).beta, 0.0);
        let pi2 = 4.0 * PI * PI;
        for k in 1..6 {
            let sp = speed_params(&TennisParams::new(k, 0.5).unwrap());
            let kf = k as f64;
            assert_abs_diff_eq!(sp.alpha - sp.beta, pi2 * kf * kf, epsilon = 1e-10);
            assert_abs_diff_eq!(
                sp.alpha + sp.beta,
                pi2 * (2.0 * kf * kf - 2.0 * kf + 1.0),
                epsilon = 1e-10
            );
        }
        // squared speed of the actual curve against the law
        for (k, a) in [(2, 0.3), (4, 0.81)] {
            let p = TennisParams::new(k, a).unwrap();
            let sp = speed_params(&p);
            assert_abs_diff_eq!(sp.alpha - sp.beta, sp.difference, epsilon = 1e-10);
            for s in [0.0, 0.13, 0.6] {
                let v = tennis_velocity(&p, s);
                let law = sp.alpha + sp.beta * (4.0 * PI * k as f64 * s).cos();
                assert_abs_diff_eq!(v.iter().map(|x| x * x).sum::<f64>(), law, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn spectrum_examples() {
        for a in [0.0, 1.0] {
            let spec = speed_fourier(&TennisParams::new(3, a).unwrap(), 8).unwrap();
            assert!(spec.fourier[1..].iter().all(|c| c.abs() < 1e-14));
        }
        let spec = converged_spectrum(&TennisParams::new(2, A2).unwrap()).unwrap();
        assert_abs_diff_eq!(spec.length(), L2, epsilon = 1e-9);
        let half = converged_spectrum(&TennisParams::new(2, 0.5).unwrap()).unwrap();
        assert!(0.5 * half.fourier[1] / half.fourier[0] <= 1.0 / (2.0 * PI));
        assert!(matches!(
            speed_fourier(&TennisParams::new(2, 0.5).unwrap(), 2),
            Err(Error::SpectrumTail { .. })
        ));
    }

    #[test]
    fn spectrum_reconstructs_speed() {
        let p = TennisParams::new(3, 0.55).unwrap();
        let spec = converged_spectrum(&p).unwrap();
        for s in [0.0, 0.021, 0.3, 0.9] {
            let series: f64 = spec
                .fourier
                .iter()
                .enumerate()
                .map(|(n, c)| c * (4.0 * PI * 3.0 * n as f64 * s).cos())
                .sum();
            assert_abs_diff_eq!(series, norm3(&tennis_velocity(&p, s)), epsilon = 1e-12);
        }
    }

    #[test]
    fn c0_equals_adaptive_length() {
        for (k, a) in [(2, A2), (3, A3), (5, 0.6)] {
            let spec = converged_spectrum(&TennisParams::new(k, a).unwrap()).unwrap();
            let len = curve_length(&tennis_curve(k, a).unwrap(), 1e-12).unwrap();
            assert_abs_diff_eq!(spec.length(), len, epsilon = 1e-10);
        }
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta(&TennisParams::new(2, 0.0).unwrap()).unwrap(), 0.0);
        assert_eq!(eta(&TennisParams::new(2, 1.0).unwrap()).unwrap(), 0.0);
        for k in 2..7 {
            assert!(eta(&TennisParams::new(k, 0.5).unwrap()).unwrap() > 1.0 / 3.0);
        }
        for (k, a) in [(2, 0.6), (3, 0.9), (4, 0.52)] {
            let c = tennis_curve(k, a).unwrap();
            let zz = c.line_integral(|p| p[2] * p[2], 1e-13).unwrap() / c.length().unwrap();
            assert_abs_diff_eq!(
                eta(&TennisParams::new(k, a).unwrap()).unwrap(),
                zz,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn eta_is_continuous_on_the_bracket() {
        for k in [2, 3] {
            let vals: Vec<f64> = (0..=500)
                .map(|i| {
                    eta(&TennisParams::new(k, (0.5 + i as f64 * 1e-3).min(1.0)).unwrap()).unwrap()
                })
                .collect();
            assert!(vals.windows(2).all(|w| (w[1] - w[0]).abs() < 1e-2));
            assert!(vals.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn solve_recovers_reference_parameters() {
        let a2 = solve_design_param(2, DEFAULT_SOLVE_TOL).unwrap();
        let a3 = solve_design_param(3, DEFAULT_SOLVE_TOL).unwrap();
        let a4 = solve_design_param(4, DEFAULT_SOLVE_TOL).unwrap();
        assert_abs_diff_eq!(a2, 0.7778, epsilon = 2e-3);
        assert_abs_diff_eq!(a3, 0.7660, epsilon = 2e-3);
        assert_abs_diff_eq!(a2, A2, epsilon = 1e-9);
        assert_abs_diff_eq!(a3, A3, epsilon = 1e-9);
        assert_abs_diff_eq!(a4, A4, epsilon = 1e-9);
        assert!(solve_design_param(1, 1e-12).is_err());
        assert!(solve_design_param(2, 0.0).is_err());
    }

    #[test]
    fn design_certificates() {
        let c2 = tennis_curve(2, solve_design_param(2, DEFAULT_SOLVE_TOL).unwrap()).unwrap();
        let r = design_residual(&c2, 2, 1e-13).unwrap();
        assert!(r.max_residual <= 1e-8, "{r:?}");
        assert_abs_diff_eq!(r.length.unwrap(), L2, epsilon = 1e-9);
        let r3 = design_residual(&c2, 3, 1e-13).unwrap();
        assert!(r3.max_residual > 1e-3);

        for (k, len) in [(3, Some(L3)), (4, None)] {
            let c = tennis_curve(k, solve_design_param(k, DEFAULT_SOLVE_TOL).unwrap()).unwrap();
            let r = design_residual(&c, 3, 1e-13).unwrap();
            assert!(r.max_residual <= 1e-8, "k={k} {r:?}");
            if let Some(l) = len {
                assert_abs_diff_eq!(r.length.unwrap(), l, epsilon = 1e-9);
            }
        }
        let eq = tennis_curve(1, 1.0).unwrap();
        assert_abs_diff_eq!(eq.length().unwrap(), 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn odd_moments_and_symmetry() {
        let m = |x, y, z| MonomialIndex::xyz(x, y, z);
        for (k, a) in [(2, 0.65), (3, 0.7), (4, 0.9)] {
            let c = tennis_curve(k, a).unwrap();
            let r = design_residual(&c, 3, 1e-13).unwrap();
            let mut odd = vec![
                m(1, 1, 0),
                m(1, 0, 1),
                m(0, 1, 1),
                m(1, 0, 0),
                m(0, 1, 0),
                m(0, 0, 1),
            ];
            if k >= 3 {
                odd.extend(
                    crate::polynomial::monomial_basis(3)
                        .into_iter()
                        .filter(|q| q.degree() == 3),
                );
            }
            for q in odd {
                assert!(r.residual_of(&q).unwrap() <= 1e-9, "k={k} {q}");
            }
            let xx = c.line_integral(|p| p[0] * p[0], 1e-13).unwrap();
            let yy = c.line_integral(|p| p[1] * p[1], 1e-13).unwrap();
            assert_abs_diff_eq!(xx, yy, epsilon = 1e-9);
        }
    }

    proptest! {
        #[test]
        fn family_stays_on_sphere(k in 1u32..8, a in 0.0f64..=1.0, s in 0.0f64..=1.0) {
            let p = TennisParams::new(k, a).unwrap();
            prop_assert!((norm3(&tennis_point_xyz(&p, s)) - 1.0).abs() <= 1e-12);
            let sp = speed_params(&p);
            prop_assert!(sp.alpha - sp.beta > 0.0);
        }
    }
}
