//! Legendre and Gegenbauer polynomials, harmonic subspaces of `S^2`, cap
//! boundary averages and the reproducing kernel of polynomials of degree
//! at most `t`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::UnitVector;
use crate::polynomial::{sphere_basis, MonomialIndex, SphericalPolynomial};

const ARG_SLACK: f64 = 1e-12;

fn check_unit_interval(u: f64) -> Result<f64> {
    if !(u.abs() <= 1.0 + ARG_SLACK) {
        return Err(Error::Domain(format!("argument {u} outside [-1, 1]")));
    }
    Ok(u.clamp(-1.0, 1.0))
}

/// Legendre polynomial `P_k(u)` by the three-term recurrence.
pub fn legendre_p(k: usize, u: f64) -> Result<f64> {
    let u = check_unit_interval(u)?;
    let (mut p0, mut p1) = (1.0, u);
    if k == 0 {
        return Ok(1.0);
    }
    for n in 1..k {
        let n = n as f64;
        let p2 = ((2.0 * n + 1.0) * u * p1 - n * p0) / (n + 1.0);
        p0 = p1;
        p1 = p2;
    }
    Ok(p1)
}

/// Gegenbauer polynomial `C_k^lambda(u)`, the coefficient of `r^k` in
/// `(1 - 2ru + r^2)^(-lambda)`.
pub fn gegenbauer_p(lambda: f64, k: usize, u: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "Gegenbauer parameter must be positive, got {lambda}"
        )));
    }
    let u = check_unit_interval(u)?;
    Ok(gegenbauer_all(lambda, k, u)[k])
}

/// `C_0^lambda(u), ..., C_k^lambda(u)`.
fn gegenbauer_all(lambda: f64, k: usize, u: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(1.0);
    if k >= 1 {
        out.push(2.0 * lambda * u);
    }
    for n in 2..=k {
        let nf = n as f64;
        let next = (2.0 * (nf + lambda - 1.0) * u * out[n - 1]
            - (nf + 2.0 * lambda - 2.0) * out[n - 2])
            / nf;
        out.push(next);
    }
    out
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension of the space of degree-`k` spherical harmonics on `S^d`,
/// `(2k + d - 1)/(d - 1) * C(k + d - 2, d - 2)`.
pub fn hk_dimension(d: usize, k: usize) -> u128 {
    assert!(d >= 2, "harmonic dimension needs d >= 2");
    if k == 0 {
        return 1;
    }
    let (d, k) = (d as u64, k as u64);
    (2 * k + d - 1) as u128 * binomial(k + d - 2, d - 2) / (d - 1) as u128
}

/// Factor `c_k(r)` with `average over the circle at distance r from x of f
/// = c_k(r) f(x)` for every degree-`k` harmonic `f` on `S^2`. Equals
/// `P_k(cos r)`.
pub fn samko_constant(k: usize, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < FRAC_PI_2) {
        return Err(Error::InvalidRadius(r));
    }
    legendre_p(k, r.cos())
}

/// Zonal kernel `sum_k b_k C_k^lambda(<x, y>)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub degree: usize,
    pub coefficients: Vec<f64>,
    pub lambda: f64,
}

impl KernelSpec {
    /// Reproducing kernel of polynomials of degree `<= t` on `S^2` for the
    /// normalized surface measure: `b_k = 2k + 1`, `lambda = 1/2`.
    pub fn sphere(t: usize) -> Self {
        Self {
            degree: t,
            coefficients: (0..=t).map(|k| (2 * k + 1) as f64).collect(),
            lambda: 0.5,
        }
    }

    /// Kernel value as a function of `u = <x, y>`.
    pub fn eval_inner(&self, u: f64) -> f64 {
        let u = u.clamp(-1.0, 1.0);
        gegenbauer_all(self.lambda, self.degree, u)
            .iter()
            .zip(&self.coefficients)
            .map(|(p, b)| p * b)
            .sum()
    }
}

pub fn reproducing_kernel(spec: &KernelSpec, x: &UnitVector, y: &UnitVector) -> Result<f64> {
    let a = x.xyz()?;
    let b = y.xyz()?;
    Ok(spec.eval_inner(a[0] * b[0] + a[1] * b[1] + a[2] * b[2]))
}

fn odd_double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// Component in the degree-`k` harmonics of a homogeneous polynomial of
/// degree `k`:
/// `sum_j (-1)^j (2k-2j-1)!! / ((2j)!! (2k-1)!!) |x|^{2j} Lap^j p`.
/// The remainder `p - h` restricts on the sphere to a polynomial of degree
/// `k - 2`.
pub fn harmonic_part(p: &SphericalPolynomial) -> Result<SphericalPolynomial> {
    let k = p.max_term_degree();
    if p.terms().any(|(m, c)| *c != 0.0 && m.degree() != k) {
        return Err(Error::Domain(
            "harmonic_part needs a homogeneous polynomial".into(),
        ));
    }
    let r2 = SphericalPolynomial::from_terms(
        2,
        [
            (MonomialIndex::xyz(2, 0, 0), 1.0),
            (MonomialIndex::xyz(0, 2, 0), 1.0),
            (MonomialIndex::xyz(0, 0, 2), 1.0),
        ],
    )?;
    let k = k as i64;
    let mut out = SphericalPolynomial::zero(k as usize);
    let mut lap = p.clone();
    let mut r_pow = SphericalPolynomial::constant(1.0);
    let mut even_fact = 1.0;
    for j in 0..=(k / 2) {
        if j > 0 {
            lap = lap.laplacian();
            r_pow = r_pow.mul(&r2);
            even_fact *= (2 * j) as f64;
        }
        let c =
            odd_double_factorial(2 * k - 2 * j - 1) / (even_fact * odd_double_factorial(2 * k - 1));
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        out = out.add(&r_pow.mul(&lap).scale(sign * c));
    }
    Ok(out.pruned(0.0))
}

/// Orthonormal basis of the degree-`k` harmonics on `S^2` (normalized
/// measure), `2k + 1` polynomials.
///
/// Built from the harmonic parts of the monomials of degree `k` with
/// `z`-exponent at most one, orthonormalized with the exact Gram matrix.
pub fn orthonormal_harmonics(k: usize) -> Result<Vec<SphericalPolynomial>> {
    let parts: Vec<SphericalPolynomial> = sphere_basis(k)
        .into_iter()
        .filter(|m| m.degree() == k)
        .map(|m| harmonic_part(&SphericalPolynomial::monomial(m)))
        .collect::<Result<_>>()?;
    let n = parts.len();
    let gram = DMatrix::from_fn(n, n, |i, j| parts[i].inner(&parts[j]));
    let chol = gram.cholesky().ok_or_else(|| {
        Error::Eigen(format!(
            "harmonic Gram matrix of degree {k} not positive definite"
        ))
    })?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Eigen("singular Cholesky factor".into()))?;
    Ok((0..n)
        .map(|i| {
            (0..=i).fold(SphericalPolynomial::zero(k), |acc, j| {
                acc.add(&parts[j].scale(l_inv[(i, j)]))
            })
        })
        .collect())
}

/// Orthonormal basis of polynomials of degree `<= t` on `S^2`, ordered by
/// harmonic degree; `(t + 1)^2` elements.
pub fn orthonormal_basis(t: usize) -> Result<Vec<SphericalPolynomial>> {
    let mut out = Vec::with_capacity((t + 1) * (t + 1));
    for k in 0..=t {
        out.extend(orthonormal_harmonics(k)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cap_boundary_frame, SphericalCap};
    use crate::polynomial::monomial_basis;
    use crate::quadrature::{gauss_legendre_rule, integrate_scalar};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..2.0 * PI);
        let r = (1.0 - z * z).sqrt();
        [r * phi.cos(), r * phi.sin(), z]
    }

    fn random_harmonic(k: usize, rng: &mut ChaCha8Rng) -> SphericalPolynomial {
        let basis = orthonormal_harmonics(k).unwrap();
        basis.iter().fold(SphericalPolynomial::zero(k), |acc, q| {
            acc.add(&q.scale(rng.gen_range(-1.0..1.0)))
        })
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_p(0, 0.3).unwrap(), 1.0);
        assert_eq!(legendre_p(1, 0.5).unwrap(), 0.5);
        assert_abs_diff_eq!(legendre_p(2, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            legendre_p(3, 0.2).unwrap(),
            0.5 * (5.0 * 0.008 - 0.6),
            epsilon = 1e-15
        );
        assert!(legendre_p(2, 1.5).is_err());
    }

    #[test]
    fn gegenbauer_examples() {
        assert_eq!(gegenbauer_p(1.3, 0, 0.4).unwrap(), 1.0);
        assert_abs_diff_eq!(
            gegenbauer_p(1.3, 1, 0.4).unwrap(),
            2.0 * 1.3 * 0.4,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            gegenbauer_p(0.5, 4, 0.3).unwrap(),
            legendre_p(4, 0.3).unwrap(),
            epsilon = 1e-15
        );
        assert!(gegenbauer_p(0.0, 2, 0.1).is_err());
        assert!(gegenbauer_p(-1.0, 2, 0.1).is_err());
    }

    #[test]
    fn gegenbauer_matches_generating_function() {
        // coefficients of (1 - 2ru + r^2)^(-lambda) by direct series expansion
        let (lambda, u) = (1.5, 0.35);
        let n = 8;
        // (1 - w)^(-lambda) with w = 2ru - r^2, expanded as a power series in r
        let mut w = vec![0.0; n + 1];
        w[1] = 2.0 * u;
        w[2] = -1.0;
        let mut series = vec![0.0; n + 1];
        let mut w_pow = vec![0.0; n + 1];
        w_pow[0] = 1.0;
        let mut binom = 1.0;
        for m in 0..=n {
            for i in 0..=n {
                series[i] += binom * w_pow[i];
            }
            binom *= (lambda + m as f64) / (m as f64 + 1.0);
            let mut next = vec![0.0; n + 1];
            for i in 0..=n {
                for j in 0..=n - i {
                    next[i + j] += w_pow[i] * w[j];
                }
            }
            w_pow = next;
        }
        for (k, &expected) in series.iter().enumerate().take(n + 1) {
            assert_abs_diff_eq!(
                gegenbauer_p(lambda, k, u).unwrap(),
                expected,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn gegenbauer_half_is_legendre() {
        for k in 0..=10 {
            for i in 0..=20 {
                let u = -1.0 + i as f64 * 0.1;
                assert_abs_diff_eq!(
                    gegenbauer_p(0.5, k, u).unwrap(),
                    legendre_p(k, u).unwrap(),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(hk_dimension(2, 0), 1);
        assert_eq!(hk_dimension(2, 2), 5);
        assert_eq!(hk_dimension(3, 1), 4);
        for k in 0..10 {
            assert_eq!(hk_dimension(2, k), 2 * k as u128 + 1);
            assert_eq!(hk_dimension(3, k), (k as u128 + 1).pow(2));
        }
    }

    #[test]
    fn harmonic_part_is_harmonic_and_orthogonal_to_lower_degrees() {
        for k in 0..=8 {
            for m in monomial_basis(k).into_iter().filter(|m| m.degree() == k) {
                let h = harmonic_part(&SphericalPolynomial::monomial(m)).unwrap();
                let lap = h.laplacian();
                assert!(lap.terms().all(|(_, c)| c.abs() < 1e-9), "{m}");
                for low in monomial_basis(k.saturating_sub(1)) {
                    if k == 0 {
                        break;
                    }
                    let ip = h.inner(&SphericalPolynomial::monomial(low));
                    assert!(ip.abs() < 1e-12, "{m} vs {low}: {ip}");
                }
            }
        }
    }

    #[test]
    fn orthonormal_basis_is_orthonormal() {
        let basis = orthonormal_basis(4).unwrap();
        assert_eq!(basis.len(), 25);
        for (i, p) in basis.iter().enumerate() {
            for (j, q) in basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(p.inner(q), expect, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn samko_examples() {
        assert_eq!(samko_constant(0, 0.3).unwrap(), 1.0);
        assert!(samko_constant(2, 0.0).is_err());
        assert!(samko_constant(2, FRAC_PI_2).is_err());
        // k = 1 with f = z around e3: the circle average of z is cos r
        for r in [0.2, 0.7, 1.3] {
            let cap = SphericalCap::new(UnitVector::axis(3, 2), r).unwrap();
            let frame = cap_boundary_frame(&cap).unwrap();
            let avg = integrate_scalar(|th| frame.point(th)[2], 0.0, 2.0 * PI, 1e-13).unwrap()
                / (2.0 * PI);
            assert_abs_diff_eq!(avg, samko_constant(1, r).unwrap(), epsilon = 1e-12);
            assert_abs_diff_eq!(samko_constant(1, r).unwrap(), r.cos(), epsilon = 1e-15);
        }
    }

    fn circle_average(f: &SphericalPolynomial, x: [f64; 3], r: f64) -> f64 {
        let cap = SphericalCap::new(UnitVector::from_xyz(x).unwrap(), r).unwrap();
        let frame = cap_boundary_frame(&cap).unwrap();
        integrate_scalar(|th| f.eval(&frame.point(th)), 0.0, 2.0 * PI, 1e-13).unwrap() / (2.0 * PI)
    }

    #[test]
    fn samko_identity_degree_four() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_harmonic(4, &mut rng);
        for _ in 0..10 {
            let x = random_unit(&mut rng);
            let avg = circle_average(&f, x, 0.7);
            assert_abs_diff_eq!(
                avg,
                samko_constant(4, 0.7).unwrap() * f.eval(&x),
                epsilon = 1e-10
            );
        }
    }

    fn surface_integral(f: impl Fn(&[f64; 3]) -> f64) -> f64 {
        let (nodes, weights) = gauss_legendre_rule(20);
        let nphi = 48;
        let mut acc = 0.0;
        for (z, w) in nodes.iter().zip(&weights) {
            let r = (1.0 - z * z).sqrt();
            for j in 0..nphi {
                let phi = 2.0 * PI * j as f64 / nphi as f64;
                acc += w * f(&[r * phi.cos(), r * phi.sin(), *z]) / nphi as f64;
            }
        }
        acc / 2.0
    }

    #[test]
    fn kernel_examples() {
        let x = UnitVector::from_xyz([0.6, 0.0, 0.8]).unwrap();
        let y = UnitVector::from_xyz([0.0, 1.0, 0.0]).unwrap();
        assert_eq!(
            reproducing_kernel(&KernelSpec::sphere(0), &x, &y).unwrap(),
            1.0
        );
        assert_abs_diff_eq!(
            reproducing_kernel(&KernelSpec::sphere(2), &x, &x).unwrap(),
            9.0,
            epsilon = 1e-14
        );
        let f = |p: &[f64; 3]| 0.3 - 1.2 * p[0] + 0.7 * p[2];
        let spec = KernelSpec::sphere(1);
        let xs = x.xyz().unwrap();
        let v = surface_integral(|p| {
            f(p) * spec.eval_inner(p[0] * xs[0] + p[1] * xs[1] + p[2] * xs[2])
        });
        assert_abs_diff_eq!(v, f(&xs), epsilon = 1e-10);
        assert!(
            reproducing_kernel(&spec, &UnitVector::axis(4, 0), &UnitVector::axis(4, 1)).is_err()
        );
    }

    #[test]
    fn kernel_reproduces_random_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for t in 0..=4 {
            let spec = KernelSpec::sphere(t);
            let f = SphericalPolynomial::from_terms(
                t,
                monomial_basis(t)
                    .into_iter()
                    .map(|m| (m, rng.gen_range(-1.0..1.0))),
            )
            .unwrap();
            for _ in 0..20 {
                let x = random_unit(&mut rng);
                let v = surface_integral(|p| {
                    f.eval(p) * spec.eval_inner(p[0] * x[0] + p[1] * x[1] + p[2] * x[2])
                });
                assert_abs_diff_eq!(v, f.eval(&x), epsilon = 1e-8);
            }
        }
    }
}
