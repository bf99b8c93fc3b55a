//! Piecewise double-exponential quadrature.
//!
//! Integrands in this crate are smooth between known break points (the
//! junctions of a damping profile, the nodes of a table), so every
//! integral is split there and each piece handed to tanh-sinh.

use crate::error::{Error, Result};

/// Relative accuracy requested from every piece.
pub const DEFAULT_REL_TOL: f64 = 1e-14;

/// Integrate `f` over `[a, b]`, splitting at every break point inside the
/// interval. The result is checked against `rel_tol` relative to the
/// magnitude of the integral (or the integral of `|f|` when it cancels).
pub fn integrate<F>(f: F, a: f64, b: f64, breaks: &[f64], rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if b <= a {
        return Ok(0.0);
    }
    let mut nodes = Vec::with_capacity(breaks.len() + 2);
    nodes.push(a);
    nodes.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    nodes.push(b);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();

    let mut total = 0.0;
    for pair in nodes.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        // Scale pass fixes the absolute target for the accurate pass.
        let coarse = quadrature::double_exponential::integrate(|x| f(x).abs(), lo, hi, 1e-6);
        let scale = coarse.integral.max(f64::MIN_POSITIVE);
        let target = rel_tol * scale;
        let out = quadrature::double_exponential::integrate(&f, lo, hi, target);
        if !out.integral.is_finite() || out.error_estimate > 1e3 * target.max(1e-300) {
            return Err(Error::Integration { a: lo, b: hi, estimate: out.error_estimate });
        }
        total += out.integral;
    }
    Ok(total)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// three-term Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
