//! Adaptive Gauss-Legendre integration of vector-valued integrands.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Points per panel.
pub const PANEL_ORDER: usize = 15;

const MAX_DEPTH: u32 = 40;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// by Newton iteration on the three-term recurrence.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_rule(PANEL_ORDER))
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub values: Vec<f64>,
    /// Sum over accepted panels of the one-panel vs two-panel discrepancy.
    pub error_estimate: f64,
    pub panels: usize,
}

fn panel<F>(f: &F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Vec<f64>
where
    F: Fn(f64, &mut [f64]),
{
    let (nodes, weights) = panel_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = vec![0.0; dim];
    for (x, w) in nodes.iter().zip(weights) {
        buf.iter_mut().for_each(|v| *v = 0.0);
        f(mid + half * x, buf);
        for (s, v) in acc.iter_mut().zip(buf.iter()) {
            *s += w * half * v;
        }
    }
    acc
}

/// Integrates the `dim`-component integrand `f(x, out)` over `[a, b]`.
///
/// Each panel is bisected until the order-15 estimate on the panel and the
/// sum of the estimates on its halves agree (max-norm) to within `tol`
/// times the panel's share of `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, dim: usize, tol: f64) -> Result<Integral>
where
    F: Fn(f64, &mut [f64]),
{
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut buf = vec![0.0; dim];
    if a == b {
        return Ok(Integral {
            values: vec![0.0; dim],
            error_estimate: 0.0,
            panels: 0,
        });
    }
    let width = (b - a).abs();
    let whole = panel(&f, a, b, dim, &mut buf);
    let mut stack = vec![(a, b, whole, 0u32)];
    let mut total = vec![0.0; dim];
    let mut err_total = 0.0;
    let mut panels = 0;
    let mut failed = false;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(&f, lo, mid, dim, &mut buf);
        let right = panel(&f, mid, hi, dim, &mut buf);
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..dim {
            let two = left[i] + right[i];
            diff = diff.max((two - est[i]).abs());
            scale = scale.max(left[i].abs() + right[i].abs());
        }
        let local_tol = (tol * (hi - lo).abs() / width).max(64.0 * f64::EPSILON * scale);
        if diff <= local_tol || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && diff > local_tol {
                failed = true;
            }
            for i in 0..dim {
                total[i] += left[i] + right[i];
            }
            err_total += diff;
            panels += 2;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    if failed {
        return Err(Error::NonConvergence {
            estimate: total.first().copied().unwrap_or(0.0),
            error_estimate: err_total,
        });
    }
    Ok(Integral {
        values: total,
        error_estimate: err_total,
        panels,
    })
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|x, out: &mut [f64]| out[0] = f(x), a, b, 1, tol).map(|r| r.values[0])
}
