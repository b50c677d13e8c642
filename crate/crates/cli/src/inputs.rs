//! Parsing of curve and polynomial arguments.

use std::path::Path;

use design_curves::curve::{great_circle, load_curve, PiecewiseCurve};
use design_curves::families::{solve_design_param, tennis_curve, DEFAULT_SOLVE_TOL};
use design_curves::{Error, MonomialIndex, Result, SphericalPolynomial};

/// `great-circle`, `tennis:K` (design parameter solved), `tennis:K:A`, or a
/// curve JSON path.
pub fn resolve_curve(spec: &str) -> Result<PiecewiseCurve> {
    if spec == "great-circle" {
        return Ok(great_circle());
    }
    if let Some(rest) = spec.strip_prefix("tennis:") {
        let mut parts = rest.split(':');
        let k: u32 = parts
            .next()
            .and_then(|k| k.parse().ok())
            .ok_or_else(|| Error::InvalidArgument(format!("bad tennis spec `{spec}`")))?;
        let a = match parts.next() {
            Some(a) => a
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad tennis parameter in `{spec}`")))?,
            None => solve_design_param(k, DEFAULT_SOLVE_TOL)?,
        };
        if parts.next().is_some() {
            return Err(Error::InvalidArgument(format!("bad tennis spec `{spec}`")));
        }
        return tennis_curve(k, a);
    }
    load_curve(Path::new(spec))
}

/// A polynomial JSON file, or a single monomial such as `x^2*z`, `3*y` or
/// `1`.
pub fn resolve_polynomial(spec: &str) -> Result<SphericalPolynomial> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return Ok(serde_json::from_str(&text)?);
    }
    parse_monomial(spec)
}

fn parse_monomial(spec: &str) -> Result<SphericalPolynomial> {
    let bad = || {
        Error::InvalidArgument(format!(
            "cannot parse polynomial `{spec}` (not a file or monomial)"
        ))
    };
    let mut coefficient = 1.0;
    let mut exponents = [0u32; 3];
    for factor in spec.split('*').map(str::trim) {
        let (base, power) = match factor.split_once('^') {
            Some((b, p)) => (b.trim(), p.trim().parse::<u32>().map_err(|_| bad())?),
            None => (factor, 1),
        };
        match base {
            "x" => exponents[0] += power,
            "y" => exponents[1] += power,
            "z" => exponents[2] += power,
            _ => coefficient *= base.parse::<f64>().map_err(|_| bad())?.powi(power as i32),
        }
    }
    let m = MonomialIndex::new(&exponents)?;
    SphericalPolynomial::from_terms(m.degree(), [(m, coefficient)])
}
