//! Diffusion limit of the branching processes.
//!
//! A Feller branching diffusion `dX = (η - κX) dt + σ √X dW` is approximated
//! by Poisson branching processes with offspring mean `1 - κ/(σ² m)` and
//! immigration mean `(1 - κ/(σ² m)) η/σ²`, observed for `⌊σ² m t⌋`
//! generations. This module provides the approximating parameters, the
//! closed-form Hellinger bounds along the approximation, their `m → ∞`
//! limits and the limit of the relative entropy.

use serde::{Deserialize, Serialize};

use crate::closed_form::{closed_form_log_lower, closed_form_log_upper};
use crate::error::{Error, Result};
use crate::fixed_point::solve_fixed_point;
use crate::model::{Order, ParamSet};

/// Nudge added before flooring `σ² m t`.
const HORIZON_NUDGE: f64 = 1e-9;

/// Parameters of the two competing diffusions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SDEParams {
    /// Immigration drift `η ≥ 0`.
    pub eta: f64,
    /// Mean-reversion rate under `A`.
    pub kappa_a: f64,
    /// Mean-reversion rate under `H`.
    pub kappa_h: f64,
    /// Diffusion coefficient `σ > 0`.
    pub sigma: f64,
    /// Initial value `X̃₀ > 0`.
    pub x0_tilde: f64,
}

impl SDEParams {
    /// Validates and builds the parameters.
    pub fn new(eta: f64, kappa_a: f64, kappa_h: f64, sigma: f64, x0_tilde: f64) -> Result<Self> {
        let all = [eta, kappa_a, kappa_h, sigma, x0_tilde];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("diffusion parameters must be finite".into()));
        }
        if eta < 0.0 || kappa_a < 0.0 || kappa_h < 0.0 {
            return Err(Error::InvalidParams("eta and kappas must be nonnegative".into()));
        }
        if kappa_a == kappa_h {
            return Err(Error::InvalidParams("kappa_a and kappa_h must differ".into()));
        }
        if sigma <= 0.0 || x0_tilde <= 0.0 {
            return Err(Error::InvalidParams("sigma and x0_tilde must be positive".into()));
        }
        Ok(Self { eta, kappa_a, kappa_h, sigma, x0_tilde })
    }

    fn sigma2(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// Order-dependent rates of the limit bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitScalars {
    /// Arithmetic mean `λκ_A + (1-λ)κ_H`.
    pub kappa_lambda: f64,
    /// Quadratic mean `sqrt(λκ_A² + (1-λ)κ_H²)`.
    pub big_lambda: f64,
}

/// Arithmetic and quadratic `λ`-means of the two rates.
pub fn limit_scalars(sde: &SDEParams, lambda: Order) -> LimitScalars {
    let l = lambda.get();
    LimitScalars {
        kappa_lambda: l * sde.kappa_a + (1.0 - l) * sde.kappa_h,
        big_lambda: (l * sde.kappa_a.powi(2) + (1.0 - l) * sde.kappa_h.powi(2)).sqrt(),
    }
}

/// Smallest step `m` for which both offspring means are positive.
pub fn min_admissible_m(sde: &SDEParams) -> u64 {
    (sde.kappa_a.max(sde.kappa_h) / sde.sigma2()).floor() as u64 + 1
}

/// Number of generations `⌊σ² m t⌋` matching time `t`.
pub fn horizon(sde: &SDEParams, m: u64, t: f64) -> usize {
    (sde.sigma2() * m as f64 * t + HORIZON_NUDGE).floor().max(0.0) as usize
}

/// Approximating Poisson branching parameters at step `m`.
pub fn approx_params(sde: &SDEParams, m: u64) -> Result<ParamSet> {
    let min_m = min_admissible_m(sde);
    if m < min_m {
        return Err(Error::InadmissibleStep { m, min_m });
    }
    let s2m = sde.sigma2() * m as f64;
    let beta_a = 1.0 - sde.kappa_a / s2m;
    let beta_h = 1.0 - sde.kappa_h / s2m;
    let scale = sde.eta / sde.sigma2();
    ParamSet::new(beta_a, beta_h, beta_a * scale, beta_h * scale)
}

/// Closed-form log bounds of the approximating Hellinger integral at time `t`.
pub fn prelimit_log_bounds(sde: &SDEParams, lambda: Order, t: f64, m: u64, x0_count: u64) -> Result<(f64, f64)> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time t={t} must be nonnegative")));
    }
    let params = approx_params(sde, m)?;
    let n = horizon(sde, m, t);
    if n == 0 {
        return Ok((0.0, 0.0));
    }
    Ok((
        closed_form_log_lower(&params, lambda, x0_count, n)?,
        closed_form_log_upper(&params, lambda, x0_count, n)?,
    ))
}

/// Correction terms of the limit bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCorrections {
    /// Initial-value correction of the lower bound.
    pub l1: f64,
    /// Drift correction of the lower bound.
    pub l2: f64,
    /// Initial-value correction of the upper bound.
    pub u1: f64,
    /// Drift correction of the upper bound.
    pub u2: f64,
}

/// The four nonnegative correction terms at time `t`.
pub fn limit_corrections(sde: &SDEParams, lambda: Order, t: f64) -> LimitCorrections {
    let LimitScalars { kappa_lambda: k, big_lambda: big } = limit_scalars(sde, lambda);
    let s2 = sde.sigma2();
    let gap = big - k;
    let half = 0.5 * (big + k);
    let e_big = (-big * t).exp();
    let one_e_big = -(-big * t).exp_m1();
    let e_half = (-half * t).exp();
    // (e^{-half t} - e^{-big t}) / (big - half) style quotients, written without cancellation
    let spread = e_half * (-(-(big - half) * t).exp_m1()) / gap;
    let l1 = gap * gap / (2.0 * s2 * big) * e_big * one_e_big;
    let l2 = 0.25 * (gap / big).powi(2) * one_e_big.powi(2);
    let u1 = gap * gap / s2 * (spread - e_half * one_e_big / (2.0 * big));
    let three = 3.0 * big + k;
    let u2 = gap * gap / big * (-(-0.5 * three * t).exp_m1() / three - spread);
    LimitCorrections { l1, l2, u1, u2 }
}

/// Log of the limit bounds `D^L` and `D^U` at time `t`.
pub fn limit_log_bounds(sde: &SDEParams, lambda: Order, t: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time t={t} must be nonnegative")));
    }
    let LimitScalars { kappa_lambda: k, big_lambda: big } = limit_scalars(sde, lambda);
    let c = limit_corrections(sde, lambda, t);
    let s2 = sde.sigma2();
    let (x0, eta) = (sde.x0_tilde, sde.eta);
    let gap = big - k;
    let half = 0.5 * (big + k);
    let drift = eta / s2 * gap * t;
    let lower = -gap / s2 * (x0 - eta / big) * (-(-big * t).exp_m1()) - drift + c.l1 * x0 + eta / s2 * c.l2;
    let upper = -gap / s2 * (x0 - eta / half) * (-(-half * t).exp_m1()) - drift - c.u1 * x0 - eta / s2 * c.u2;
    Ok((lower, upper))
}

/// Limit of the relative entropy of the approximations at time `t`.
pub fn limit_entropy(sde: &SDEParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time t={t} must be nonnegative")));
    }
    let s2 = sde.sigma2();
    let (ka, kh, eta, x0) = (sde.kappa_a, sde.kappa_h, sde.eta, sde.x0_tilde);
    let v = if ka > 0.0 {
        (ka - kh).powi(2) / (2.0 * s2 * ka) * ((x0 - eta / ka) * (-(-ka * t).exp_m1()) + eta * t)
    } else {
        kh * kh / (2.0 * s2) * (0.5 * eta * t * t + x0 * t)
    };
    Ok(v.max(0.0))
}

/// One scaled quantity along the approximation next to its `m → ∞` limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCheck {
    /// Name of the quantity.
    pub name: &'static str,
    /// Value at the given `m`.
    pub observed: f64,
    /// Limit value.
    pub expected: f64,
}

impl LimitCheck {
    /// Relative deviation from the limit.
    pub fn relative_error(&self) -> f64 {
        ((self.observed - self.expected) / self.expected).abs()
    }
}

/// Scaled linearization scalars at step `m` and their limits.
pub fn scaled_limit_checks(sde: &SDEParams, lambda: Order, t: f64, m: u64) -> Result<Vec<LimitCheck>> {
    let params = approx_params(sde, m)?;
    let l = lambda.get();
    let w = params.weights(lambda);
    let ln_q = l * params.beta_a.ln() + (1.0 - l) * params.beta_h.ln();
    let q = ln_q.exp();
    let one_minus_q = -ln_q.exp_m1();
    let fp = solve_fixed_point(q, w.beta_lambda)?;
    let LimitScalars { kappa_lambda: k, big_lambda: big } = limit_scalars(sde, lambda);
    let s2 = sde.sigma2();
    let mf = m as f64;
    let a1 = (1.0 - w.beta_lambda) - one_minus_q;
    let n = s2 * mf * t;
    Ok(vec![
        LimitCheck { name: "m(1-q)", observed: mf * one_minus_q, expected: k / s2 },
        LimitCheck { name: "m^2 a1", observed: mf * mf * a1, expected: -(big * big - k * k) / (2.0 * s2 * s2) },
        LimitCheck { name: "m x0", observed: mf * fp.x0, expected: -(big - k) / s2 },
        LimitCheck { name: "m(1-dT)", observed: mf * fp.one_minus_d_t, expected: big / s2 },
        LimitCheck { name: "m(1-dS)", observed: mf * fp.one_minus_d_s, expected: (big + k) / (2.0 * s2) },
        LimitCheck {
            name: "dT^(s2 m t)",
            observed: (n * (-fp.one_minus_d_t).ln_1p()).exp(),
            expected: (-big * t).exp(),
        },
    ])
}
