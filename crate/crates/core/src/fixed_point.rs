//! The negative fixed point of `x ↦ q e^x - β_λ` and its linearization scalars.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Root of `q e^x - β_λ = x` with explicit brackets and derived scalars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    /// The unique negative root.
    pub x0: f64,
    /// Explicit under-approximant, from the damped quadratic.
    pub x0_under: f64,
    /// Explicit over-approximant, from the undamped quadratic.
    pub x0_over: f64,
    /// Tangent slope `q e^{x0}`.
    pub d_t: f64,
    /// Secant slope `(x0 - (q - β_λ)) / x0`.
    pub d_s: f64,
    /// Curvature constant `(q/2) e^{x0} x0²`.
    pub gamma_cap: f64,
    /// `1 - d_t`, computed without cancellation.
    pub one_minus_d_t: f64,
    /// `1 - d_s`, computed without cancellation.
    pub one_minus_d_s: f64,
}

/// `q e^x - β - x`, arranged to stay accurate for small `x` and `q - β`.
fn residual(q: f64, beta: f64, x: f64) -> f64 {
    (q - beta) + q * x.exp_m1() - x
}

/// `a - sqrt(a² + c)` for `c ≥ 0` without cancellation.
fn minus_root(a: f64, c: f64) -> f64 {
    let s = (a * a + c).sqrt();
    if a > 0.0 {
        -c / (a + s)
    } else {
        a - s
    }
}

/// Solves for the negative fixed point with bisection followed by Newton polishing.
///
/// Requires `0 < q < beta_lambda`.
pub fn solve_fixed_point(q: f64, beta_lambda: f64) -> Result<FixedPointResult> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::FixedPoint(format!("slope q={q} must be positive")));
    }
    if !(q < beta_lambda) {
        return Err(Error::FixedPoint(format!(
            "slope q={q} must be smaller than beta_lambda={beta_lambda}"
        )));
    }
    let a1 = q - beta_lambda;
    let (mut lo, mut hi) = (-beta_lambda, a1);
    while hi - lo > 1e-14 * (1.0 + hi.abs()) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(q, beta_lambda, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x0 = 0.5 * (lo + hi);
    for _ in 0..2 {
        let slope = q * x0.exp() - 1.0;
        let next = x0 - residual(q, beta_lambda, x0) / slope;
        if next.is_finite() && next < 0.0 {
            x0 = next;
        }
    }
    let d_t = q * x0.exp();
    let one_minus_d_t = -(q * x0.exp_m1() + (q - 1.0));
    let one_minus_d_s = a1 / x0;
    let d_s = 1.0 - one_minus_d_s;
    let gamma_cap = 0.5 * d_t * x0 * x0;

    let x0_over = minus_root(1.0 - q, -2.0 * q * a1) / q;
    let h = if q < 1.0 { (-beta_lambda).max(a1 / (1.0 - q)) } else { -beta_lambda };
    let x0_under = (-h).exp() / q * minus_root(1.0 - q, -2.0 * q * h.exp() * a1);

    Ok(FixedPointResult { x0, x0_under, x0_over, d_t, d_s, gamma_cap, one_minus_d_t, one_minus_d_s })
}
