//! Divergence transforms, asymptotic distinguishability and decision bounds.
//!
//! Bayes risk bounds use an upper Hellinger value for the upper risk bound and
//! a lower Hellinger value for the lower risk bound. The Neyman-Pearson bound
//! uses an upper Hellinger value of the complementary order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{classify, CaseTag, Order, ParamSet};
use crate::recursion::log_hellinger_report;

/// Power (Cressie-Read) and Rényi divergence of order `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergences {
    /// `(1 - H)/(λ(1-λ))`.
    pub power: f64,
    /// `log H / (λ(λ-1))`.
    pub renyi: f64,
}

/// Converts a log Hellinger value into the power and Rényi divergences.
///
/// Positive inputs (rounding noise) are treated as zero.
pub fn divergence_from_log_hellinger(log_h: f64, lambda: Order) -> Divergences {
    let l = lambda.get();
    let lh = log_h.min(0.0);
    Divergences { power: -lh.exp_m1() / (l * (1.0 - l)), renyi: lh / (l * (l - 1.0)) }
}

/// Asymptotic distinguishability of the two sequences of path laws.
///
/// `None` means the question is open for the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinguishabilityVerdict {
    /// The laws under `A` are contiguous to those under `H`.
    pub contiguous_a_to_h: Option<bool>,
    /// The laws under `H` are contiguous to those under `A`.
    pub contiguous_h_to_a: Option<bool>,
    /// The two sequences are entirely separated.
    pub entirely_separated: Option<bool>,
}

/// Contiguity and separation verdict; the same for every initial population.
pub fn distinguishability(params: &ParamSet) -> DistinguishabilityVerdict {
    match classify(params, Order::new(0.5).expect("valid order")) {
        CaseTag::NI => DistinguishabilityVerdict {
            contiguous_a_to_h: Some(params.beta_a <= 1.0),
            contiguous_h_to_a: Some(params.beta_h <= 1.0),
            entirely_separated: Some(false),
        },
        CaseTag::SP4 => {
            DistinguishabilityVerdict { contiguous_a_to_h: None, contiguous_h_to_a: None, entirely_separated: None }
        }
        _ => DistinguishabilityVerdict {
            contiguous_a_to_h: Some(false),
            contiguous_h_to_a: Some(false),
            entirely_separated: Some(true),
        },
    }
}

/// Losses, prior and test level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionConfig {
    /// Loss of choosing `H` when `A` holds.
    pub loss_a: f64,
    /// Loss of choosing `A` when `H` holds.
    pub loss_h: f64,
    /// Prior probability of `H`.
    pub prior_h: f64,
    /// Level of the Neyman-Pearson test.
    pub level: f64,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        Self { loss_a: 1.0, loss_h: 1.0, prior_h: 0.5, level: 0.05 }
    }
}

impl DecisionConfig {
    /// Validates and builds the configuration.
    pub fn new(loss_a: f64, loss_h: f64, prior_h: f64, level: f64) -> Result<Self> {
        let cfg = Self { loss_a, loss_h, prior_h, level };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks positivity of the losses and that prior and level lie in (0, 1).
    pub fn validate(&self) -> Result<()> {
        if !(self.loss_a > 0.0 && self.loss_h > 0.0) || !self.loss_a.is_finite() || !self.loss_h.is_finite() {
            return Err(Error::InvalidInput("losses must be positive and finite".into()));
        }
        if !(self.prior_h > 0.0 && self.prior_h < 1.0) {
            return Err(Error::InvalidInput("prior_h must lie in (0, 1)".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidInput("level must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Prior-weighted loss under `A`.
    pub fn weight_a(&self) -> f64 {
        (1.0 - self.prior_h) * self.loss_a
    }

    /// Prior-weighted loss under `H`.
    pub fn weight_h(&self) -> f64 {
        self.prior_h * self.loss_h
    }
}

/// Bayes risk bounds with the Hellinger values that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesBounds {
    /// Lower risk bound.
    pub lower: f64,
    /// Upper risk bound.
    pub upper: f64,
    /// Log Hellinger value fed into the lower bound.
    pub log_h_lower: f64,
    /// Log Hellinger value fed into the upper bound.
    pub log_h_upper: f64,
    /// Source of the Hellinger values.
    pub method: String,
}

/// Lower and upper log Hellinger values with their source.
fn hellinger_pair(params: &ParamSet, lambda: Order, omega0: u64, n: usize) -> Result<(f64, f64, String)> {
    let rep = log_hellinger_report(params, lambda, omega0, n)?;
    Ok(match rep.log_exact {
        Some(v) => (v, v, format!("exact ({})", rep.method)),
        None => (rep.log_lower, rep.log_upper, format!("lower/upper bounds ({})", rep.method)),
    })
}

/// Bayes risk bounds from the Hellinger integral of order `λ`.
pub fn bayes_risk_bounds(
    params: &ParamSet,
    lambda: Order,
    omega0: u64,
    n: usize,
    cfg: &DecisionConfig,
) -> Result<BayesBounds> {
    cfg.validate()?;
    let (log_lo, log_hi, method) = hellinger_pair(params, lambda, omega0, n)?;
    let (upper, lower) = bayes_from_log_hellinger(log_lo, log_hi, lambda, cfg);
    Ok(BayesBounds { lower, upper, log_h_lower: log_lo, log_h_upper: log_hi, method })
}

/// `(upper, lower)` risk bounds from lower and upper log Hellinger values.
pub fn bayes_from_log_hellinger(log_h_lower: f64, log_h_upper: f64, lambda: Order, cfg: &DecisionConfig) -> (f64, f64) {
    let l = lambda.get();
    let (wa, wh) = (cfg.weight_a(), cfg.weight_h());
    let upper = (l * wa.ln() + (1.0 - l) * wh.ln() + log_h_upper).exp().min(wa.min(wh));
    let r = l / (1.0 - l);
    let log_lower = r.max(1.0) * wa.ln() + (1.0 / r).max(1.0) * wh.ln() - r.max(1.0 / r) * (wa + wh).ln()
        + (1.0 / l).max(1.0 / (1.0 - l)) * log_h_lower;
    (upper, log_lower.exp().min(upper))
}

/// Neyman-Pearson bound on the minimal type II error at level `cfg.level`.
pub fn np_type2_bound(params: &ParamSet, lambda: Order, omega0: u64, n: usize, cfg: &DecisionConfig) -> Result<f64> {
    cfg.validate()?;
    let (_, log_hi, _) = hellinger_pair(params, lambda.complement(), omega0, n)?;
    Ok(np_from_log_hellinger(log_hi, lambda, cfg.level))
}

/// The type II bound given the log Hellinger value of order `1-λ`.
pub fn np_from_log_hellinger(log_h_complement: f64, lambda: Order, level: f64) -> f64 {
    let l = lambda.get();
    let e = (1.0 - l).ln() + l / (1.0 - l) * (l / level).ln() + log_h_complement / (1.0 - l);
    e.exp().min(1.0)
}

/// Grid of orders `0.01, 0.02, …, 0.99`.
pub fn lambda_grid() -> Vec<Order> {
    (1..100).map(|i| Order::new(i as f64 / 100.0).expect("grid order in (0,1)")).collect()
}

/// Smallest Bayes upper bound over the order grid, with its order.
pub fn min_bayes_upper_over_grid(params: &ParamSet, omega0: u64, n: usize, cfg: &DecisionConfig) -> Result<(Order, f64)> {
    let mut best: Option<(Order, f64)> = None;
    for l in lambda_grid() {
        let u = bayes_risk_bounds(params, l, omega0, n, cfg)?.upper;
        if best.is_none_or(|(_, b)| u < b) {
            best = Some((l, u));
        }
    }
    Ok(best.expect("nonempty grid"))
}

/// Smallest Neyman-Pearson bound over the order grid, with its order.
pub fn min_np_bound_over_grid(params: &ParamSet, omega0: u64, n: usize, cfg: &DecisionConfig) -> Result<(Order, f64)> {
    let mut best: Option<(Order, f64)> = None;
    for l in lambda_grid() {
        let u = np_type2_bound(params, l, omega0, n, cfg)?;
        if best.is_none_or(|(_, b)| u < b) {
            best = Some((l, u));
        }
    }
    Ok(best.expect("nonempty grid"))
}
