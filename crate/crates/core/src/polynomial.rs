//! Polynomials in three variables and their exact moments on `S^2`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents `(a, b, c)` of the monomial `x^a y^b z^c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MonomialIndex {
    pub exponents: [u32; 3],
}

impl MonomialIndex {
    pub const CONSTANT: MonomialIndex = MonomialIndex {
        exponents: [0, 0, 0],
    };

    pub const fn xyz(a: u32, b: u32, c: u32) -> Self {
        Self {
            exponents: [a, b, c],
        }
    }

    /// Builds an index from a slice of exponents; only three variables are
    /// supported.
    pub fn new(exponents: &[u32]) -> Result<Self> {
        match exponents {
            &[a, b, c] => Ok(Self::xyz(a, b, c)),
            _ => Err(Error::UnsupportedDimension {
                expected: 2,
                found: exponents.len().saturating_sub(1),
            }),
        }
    }

    pub fn degree(&self) -> usize {
        self.exponents.iter().map(|&e| e as usize).sum()
    }

    pub fn eval(&self, p: &[f64; 3]) -> f64 {
        let [a, b, c] = self.exponents;
        p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32)
    }

    fn mul(&self, other: &Self) -> Self {
        Self {
            exponents: std::array::from_fn(|i| self.exponents[i] + other.exponents[i]),
        }
    }
}

impl fmt::Display for MonomialIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (name, &e) in ["x", "y", "z"].iter().zip(&self.exponents) {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        Ok(())
    }
}

fn double_factorial_odd(n: i64) -> Option<u128> {
    // n!! for odd n >= -1
    let mut acc: u128 = 1;
    let mut k = n;
    while k > 1 {
        acc = acc.checked_mul(k as u128)?;
        k -= 2;
    }
    Some(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact integral of a monomial over `S^2` with respect to the normalized
/// surface measure.
///
/// Zero if any exponent is odd; for exponents `(2a, 2b, 2c)` the value is
/// `(2a-1)!! (2b-1)!! (2c-1)!! / (2a+2b+2c+1)!!`.
pub fn sphere_monomial_integral(m: &MonomialIndex) -> f64 {
    if m.exponents.iter().any(|e| e % 2 == 1) {
        return 0.0;
    }
    let [a, b, c] = m.exponents.map(|e| e as i64);
    let exact = (|| {
        let mut num: u128 = 1;
        for e in [a, b, c] {
            num = num.checked_mul(double_factorial_odd(e - 1)?)?;
        }
        let den = double_factorial_odd(a + b + c + 1)?;
        let g = gcd(num, den);
        Some((num / g) as f64 / (den / g) as f64)
    })();
    exact.unwrap_or_else(|| {
        // very high degree: accumulate as a product of ratios
        let mut factors: Vec<f64> = Vec::new();
        for e in [a, b, c] {
            let mut k = e - 1;
            while k > 1 {
                factors.push(k as f64);
                k -= 2;
            }
        }
        let mut dens: Vec<f64> = Vec::new();
        let mut k = a + b + c + 1;
        while k > 1 {
            dens.push(k as f64);
            k -= 2;
        }
        let mut v = 1.0;
        let (mut i, mut j) = (0, 0);
        while i < factors.len() || j < dens.len() {
            if v <= 1.0 && i < factors.len() || j >= dens.len() {
                v *= factors[i];
                i += 1;
            } else {
                v /= dens[j];
                j += 1;
            }
        }
        v
    })
}

/// All monomial indices of total degree at most `t`, in lexicographic order
/// of their exponent triples.
pub fn monomial_basis(t: usize) -> Vec<MonomialIndex> {
    let t = t as u32;
    let mut out = Vec::with_capacity((t as usize + 1) * (t as usize + 2) * (t as usize + 3) / 6);
    for a in 0..=t {
        for b in 0..=(t - a) {
            for c in 0..=(t - a - b) {
                out.push(MonomialIndex::xyz(a, b, c));
            }
        }
    }
    out
}

/// Monomials of degree at most `t` with `z`-exponent at most one. On the
/// sphere they form a basis of the restriction of polynomials of degree
/// `<= t`; there are `(t + 1)^2` of them.
pub fn sphere_basis(t: usize) -> Vec<MonomialIndex> {
    monomial_basis(t)
        .into_iter()
        .filter(|m| m.exponents[2] <= 1)
        .collect()
}

/// Evaluates all monomials of `basis` at `p`, given that every exponent is
/// at most `max_exp`.
pub(crate) struct PowerTable {
    powers: [Vec<f64>; 3],
}

impl PowerTable {
    pub(crate) fn new(p: &[f64; 3], max_exp: usize) -> Self {
        let powers = std::array::from_fn(|i| {
            let mut v = Vec::with_capacity(max_exp + 1);
            let mut acc = 1.0;
            for _ in 0..=max_exp {
                v.push(acc);
                acc *= p[i];
            }
            v
        });
        Self { powers }
    }

    pub(crate) fn eval(&self, m: &MonomialIndex) -> f64 {
        let [a, b, c] = m.exponents;
        self.powers[0][a as usize] * self.powers[1][b as usize] * self.powers[2][c as usize]
    }
}

/// A real polynomial in `x, y, z` with a declared degree bound `t`. Used both
/// as a function on `S^2` and, in the weighted rules, on `R^3`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "PolynomialDocument", try_from = "PolynomialDocument")]
pub struct SphericalPolynomial {
    degree: usize,
    terms: BTreeMap<MonomialIndex, f64>,
}

/// JSON form: `{"degree": t, "terms": [{"exponents": [a, b, c], "coefficient": v}]}`;
/// `degree` defaults to the largest term degree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    pub terms: Vec<TermDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermDocument {
    pub exponents: [u32; 3],
    pub coefficient: f64,
}

impl From<SphericalPolynomial> for PolynomialDocument {
    fn from(p: SphericalPolynomial) -> Self {
        Self {
            degree: Some(p.degree),
            terms: p
                .terms
                .iter()
                .map(|(m, c)| TermDocument {
                    exponents: m.exponents,
                    coefficient: *c,
                })
                .collect(),
        }
    }
}

impl TryFrom<PolynomialDocument> for SphericalPolynomial {
    type Error = Error;

    fn try_from(doc: PolynomialDocument) -> Result<Self> {
        let terms: Vec<(MonomialIndex, f64)> = doc
            .terms
            .iter()
            .map(|t| {
                (
                    MonomialIndex {
                        exponents: t.exponents,
                    },
                    t.coefficient,
                )
            })
            .collect();
        let max = terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0);
        Self::from_terms(doc.degree.unwrap_or(max), terms)
    }
}

impl SphericalPolynomial {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::from_terms(0, [(MonomialIndex::CONSTANT, value)]).expect("degree 0")
    }

    pub fn monomial(m: MonomialIndex) -> Self {
        Self::from_terms(m.degree(), [(m, 1.0)]).expect("degree matches")
    }

    /// Collects terms, summing repeated indices; fails if a term exceeds
    /// `degree`.
    pub fn from_terms(
        degree: usize,
        terms: impl IntoIterator<Item = (MonomialIndex, f64)>,
    ) -> Result<Self> {
        let mut p = Self::zero(degree);
        for (m, c) in terms {
            if m.degree() > degree {
                return Err(Error::Domain(format!(
                    "term {m} exceeds declared degree {degree}"
                )));
            }
            *p.terms.entry(m).or_insert(0.0) += c;
        }
        Ok(p)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Largest total degree among the stored terms.
    pub fn max_term_degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MonomialIndex, &f64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &MonomialIndex) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, p: &[f64; 3]) -> f64 {
        let table = PowerTable::new(p, self.max_term_degree());
        self.terms.iter().map(|(m, c)| c * table.eval(m)).sum()
    }

    /// Exact integral over `S^2` (normalized measure).
    pub fn sphere_integral(&self) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c * sphere_monomial_integral(m))
            .sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            degree: self.degree,
            terms: self.terms.iter().map(|(m, c)| (*m, c * s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self {
            degree: self.degree.max(other.degree),
            terms: self.terms.clone(),
        };
        for (m, c) in &other.terms {
            *out.terms.entry(*m).or_insert(0.0) += c;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.degree + other.degree);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                *out.terms.entry(a.mul(b)).or_insert(0.0) += ca * cb;
            }
        }
        out
    }

    /// Euclidean Laplacian in `R^3`.
    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.degree.saturating_sub(2));
        for (m, c) in &self.terms {
            for i in 0..3 {
                let e = m.exponents[i];
                if e >= 2 {
                    let mut n = *m;
                    n.exponents[i] -= 2;
                    *out.terms.entry(n).or_insert(0.0) += c * (e * (e - 1)) as f64;
                }
            }
        }
        out
    }

    /// Inner product in `L^2(S^2)` computed from exact moments.
    pub fn inner(&self, other: &Self) -> f64 {
        self.mul(other).sphere_integral()
    }

    /// Drops terms with `|coefficient| <= eps`.
    pub fn pruned(&self, eps: f64) -> Self {
        Self {
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > eps)
                .map(|(m, c)| (*m, *c))
                .collect(),
        }
    }
}
