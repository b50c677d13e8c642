//! Quadrature for `int_{R^3} f(x) e^{-|x|} dx` from a design curve scaled
//! to the nodes of a generalized Gauss-Laguerre rule.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use crate::curve::{PiecewiseCurve, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::polynomial::{sphere_monomial_integral, MonomialIndex, SphericalPolynomial};
use crate::sampling::require_design;

/// Gauss rule for the weight `r^alpha e^{-r}` on `(0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreRule {
    pub order: usize,
    pub alpha: f64,
    /// Ascending.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LaguerreRule {
    /// `sum_j w_j g(r_j)`.
    pub fn apply<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| w * g(*r))
            .sum()
    }
}

/// `(L_n^alpha(r), L_{n-1}^alpha(r))` by the three-term recurrence.
fn laguerre_pair(n: usize, alpha: f64, r: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 1..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0 + alpha - r) * cur - (kf - 1.0 + alpha) * prev) / kf;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Nodes start from the eigenvalues of the Jacobi matrix of the Laguerre
/// recurrence (Golub-Welsch) and are polished by Newton steps on
/// `L_n^alpha`. Weights come from
/// `w = Gamma(n + alpha + 1) r / (n! (n + alpha)^2 L_{n-1}^alpha(r)^2)`,
/// which keeps the small weights of the far nodes accurate in relative
/// terms.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Result<LaguerreRule> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "rule order must be at least 1".into(),
        ));
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be non-negative, got {alpha}"
        )));
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jacobi[(i, i)] = 2.0 * i as f64 + alpha + 1.0;
        if i + 1 < n {
            let b = ((i + 1) as f64 * (i as f64 + 1.0 + alpha)).sqrt();
            jacobi[(i, i + 1)] = b;
            jacobi[(i + 1, i)] = b;
        }
    }
    let eig = SymmetricEigen::try_new(jacobi, f64::EPSILON, 10_000).ok_or_else(|| {
        Error::Eigen(format!(
            "tridiagonal eigensolve for order {n} did not converge"
        ))
    })?;
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let nf = n as f64;
    let scale = (ln_gamma(nf + alpha + 1.0) - ln_gamma(nf + 1.0)).exp();
    let mut weights = Vec::with_capacity(n);
    for r in nodes.iter_mut() {
        for _ in 0..8 {
            let (ln, lm) = laguerre_pair(n, alpha, *r);
            // r L_n' = n L_n - (n + alpha) L_{n-1}
            let deriv = (nf * ln - (nf + alpha) * lm) / *r;
            let step = ln / deriv;
            *r -= step;
            if step.abs() <= 4.0 * f64::EPSILON * *r {
                break;
            }
        }
        let (_, lm) = laguerre_pair(n, alpha, *r);
        weights.push(scale * *r / ((nf + alpha).powi(2) * lm * lm));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes[0] <= 0.0 {
        return Err(Error::Eigen(format!(
            "Laguerre nodes of order {n} collapsed while polishing"
        )));
    }
    Ok(LaguerreRule {
        order: n,
        alpha,
        nodes,
        weights,
    })
}

/// `int_{R^3} x^a y^b z^c e^{-|x|} dx = (a+b+c+2)! * 4 pi * (sphere average)`.
pub fn rd_exact_moment(m: &MonomialIndex) -> f64 {
    let avg = sphere_monomial_integral(m);
    if avg == 0.0 {
        return 0.0;
    }
    let radial: f64 = (1..=m.degree() + 2).map(|k| k as f64).product();
    radial * 4.0 * PI * avg
}

/// Exact value of the weighted integral for a polynomial.
pub fn rd_exact_integral(f: &SphericalPolynomial) -> f64 {
    f.terms().map(|(m, c)| c * rd_exact_moment(m)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdQuadrature {
    pub value: f64,
    pub rule: LaguerreRule,
    /// Euclidean line integral of `f` over each scaled curve `r_j gamma`.
    pub ring_integrals: Vec<f64>,
    pub curve_length: f64,
}

/// `4 pi / len(gamma) * sum_j (w_j / r_j) int_{r_j gamma} f` with the
/// order-`n` rule for `r^2 e^{-r}`. Exact for `f` of degree `<= t` when
/// `gamma` is a `t`-design curve and `2n - 1 >= t`.
pub fn rd_weighted_integral(
    f: &SphericalPolynomial,
    c: &PiecewiseCurve,
    t: usize,
    n: usize,
) -> Result<RdQuadrature> {
    if f.max_term_degree() > t {
        return Err(Error::InvalidArgument(format!(
            "polynomial of degree {} exceeds t = {t}",
            f.max_term_degree()
        )));
    }
    if 2 * n < t + 1 {
        return Err(Error::DegreeOrderMismatch {
            degree: t,
            order: n,
            needed: (t + 1).div_ceil(2),
        });
    }
    require_design(c, t)?;
    let rule = gauss_laguerre(n, 2.0)?;
    let nodes = rule.nodes.clone();
    let integral = c.integrate_vector(
        n + 1,
        |p, out: &mut [f64]| {
            out[0] = 1.0;
            for (o, r) in out[1..].iter_mut().zip(&nodes) {
                *o = r * f.eval(&[r * p[0], r * p[1], r * p[2]]);
            }
        },
        DEFAULT_TOL,
    )?;
    let curve_length = integral.values[0];
    let ring_integrals = integral.values[1..].to_vec();
    let value = 4.0 * PI / curve_length
        * ring_integrals
            .iter()
            .zip(rule.nodes.iter().zip(&rule.weights))
            .map(|(ring, (r, w))| w / r * ring)
            .sum::<f64>();
    Ok(RdQuadrature {
        value,
        rule,
        ring_integrals,
        curve_length,
    })
}
