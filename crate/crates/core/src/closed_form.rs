//! Closed-form lower and upper bounds of the Hellinger integral.
//!
//! The nonlinear map `x ↦ q e^x - β_λ` is replaced by its tangent at the
//! fixed point `x₀` (lower bound) or by its secant through `x₀` and `0`
//! (upper bound), each with a geometric correction term. The resulting
//! linear recursions are summed explicitly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_point::{solve_fixed_point, FixedPointResult};
use crate::model::{classify, CaseTag, Order, ParamSet};
use crate::recursion::{select_coeffs, CoefficientPair, Role};

/// Gap under which `d_S` and `d_T` are treated as equal.
const MERGE_GAP: f64 = 1e-10;

/// The four additive pieces of a closed-form log bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormTerms {
    /// Coefficient of `ω₀` in the correction.
    pub zeta: f64,
    /// Initial-population-free correction.
    pub vartheta: f64,
    /// The part linear in `n`.
    pub main_linear: f64,
    /// The part driven by `1 - d^n`.
    pub main_geometric: f64,
}

/// Switches for the closed-form bounds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedFormOptions {
    /// Replace the solved fixed point by its explicit approximant.
    pub explicit: bool,
}

/// A closed-form bound with its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormReport {
    /// Log-scale bound.
    pub log_value: f64,
    /// Additive pieces (`log_value = geometric + linear ± zeta ω₀ ± vartheta`).
    pub terms: ClosedFormTerms,
    /// Coefficient pair that was linearized.
    pub pair: CoefficientPair,
    /// Fixed point value actually used.
    pub x0_used: f64,
    /// True if the explicit approximant was used.
    pub explicit_used: bool,
    /// Remark about fallbacks, if any.
    pub note: Option<String>,
}

/// `1 - d^n` from `1 - d`, accurate for `d` near one.
fn one_minus_pow(one_minus_d: f64, n: f64) -> f64 {
    -(n * (-one_minus_d).ln_1p()).exp_m1()
}

/// `(s^n - t^n) / (s - t)`, with the derivative limit when `s ≈ t`.
fn diff_quotient(s: f64, t: f64, gap: f64, n: f64) -> f64 {
    if gap.abs() < MERGE_GAP {
        let d = 0.5 * (s + t);
        n * d.powf(n - 1.0)
    } else {
        (s.powf(n) - t.powf(n)) / gap
    }
}

/// Linearization scalars at a given fixed point value.
fn scalars_at(q: f64, beta: f64, x0: f64) -> FixedPointResult {
    let d_t = q * x0.exp();
    let one_minus_d_t = -(q * x0.exp_m1() + (q - 1.0));
    let one_minus_d_s = (q - beta) / x0;
    FixedPointResult {
        x0,
        x0_under: x0,
        x0_over: x0,
        d_t,
        d_s: 1.0 - one_minus_d_s,
        gamma_cap: 0.5 * d_t * x0 * x0,
        one_minus_d_t,
        one_minus_d_s,
    }
}

/// Closed-form lower bound with its terms.
pub fn closed_form_lower(
    params: &ParamSet,
    lambda: Order,
    omega0: u64,
    n: usize,
    opts: ClosedFormOptions,
) -> Result<ClosedFormReport> {
    let case = classify(params, lambda);
    let role = if case.has_exact() { Role::Exact } else { Role::Lower };
    let pair = select_coeffs(params, lambda, role)?;
    let w = params.weights(lambda);
    let (p, q) = (pair.p, pair.q);
    let nf = n as f64;
    let w0 = omega0 as f64;

    if q >= w.beta_lambda {
        // equal offspring means: the recursion is trivial and the bound is exact
        let lin = (p - w.alpha_lambda) * nf;
        return Ok(ClosedFormReport {
            log_value: lin,
            terms: ClosedFormTerms { zeta: 0.0, vartheta: 0.0, main_linear: lin, main_geometric: 0.0 },
            pair,
            x0_used: 0.0,
            explicit_used: false,
            note: Some("slope equals beta_lambda; fixed point is 0".into()),
        });
    }
    let solved = solve_fixed_point(q, w.beta_lambda)?;
    let fp = if opts.explicit { scalars_at(q, w.beta_lambda, solved.x0_under) } else { solved };
    let (x0, d, omd, g) = (fp.x0, fp.d_t, fp.one_minus_d_t, fp.gamma_cap);
    let ratio = p / q;
    let omdn = one_minus_pow(omd, nf);
    let main_geometric = x0 * (w0 - ratio * d / omd) * omdn;
    let main_linear = (ratio * (w.beta_lambda + x0) - w.alpha_lambda) * nf;
    let zeta = if n == 0 { 0.0 } else { g * d.powf(nf - 1.0) * omdn / omd };
    let vartheta = ratio * g * omdn / (omd * omd) * (1.0 - d * (2.0 - omdn) / (1.0 + d));
    Ok(ClosedFormReport {
        log_value: main_geometric + main_linear + zeta * w0 + vartheta,
        terms: ClosedFormTerms { zeta, vartheta, main_linear, main_geometric },
        pair,
        x0_used: x0,
        explicit_used: opts.explicit,
        note: None,
    })
}

/// Closed-form upper bound with its terms; not available on SP3d and SP4.
pub fn closed_form_upper(
    params: &ParamSet,
    lambda: Order,
    omega0: u64,
    n: usize,
    opts: ClosedFormOptions,
) -> Result<ClosedFormReport> {
    let case = classify(params, lambda);
    let pair = match case {
        CaseTag::SP3d | CaseTag::SP4 => {
            return Err(Error::CaseMismatch {
                operation: "closed_form_log_upper",
                case,
                hint: "no closed-form upper bound; use recursive_log_bounds",
            })
        }
        CaseTag::NI | CaseTag::SP1 => select_coeffs(params, lambda, Role::Exact)?,
        _ => select_coeffs(params, lambda, Role::Upper)?,
    };
    let w = params.weights(lambda);
    let (p, q) = (pair.p, pair.q);
    let solved = solve_fixed_point(q, w.beta_lambda)?;
    let a1 = q - w.beta_lambda;
    let (fp, explicit_used, note) = if opts.explicit {
        if solved.x0_over < a1 {
            (scalars_at(q, w.beta_lambda, solved.x0_over), true, None)
        } else {
            (solved, false, Some("explicit over-approximant not below q - beta_lambda; used solved root".into()))
        }
    } else {
        (solved, false, None)
    };
    let nf = n as f64;
    let w0 = omega0 as f64;
    let (x0, s, t, g) = (fp.x0, fp.d_s, fp.d_t, fp.gamma_cap);
    let (oms, omt) = (fp.one_minus_d_s, fp.one_minus_d_t);
    let gap = omt - oms;
    let ratio = p / q;
    let omsn = one_minus_pow(oms, nf);
    let omtn = one_minus_pow(omt, nf);
    let main_geometric = x0 * (w0 - ratio * s / oms) * omsn;
    let main_linear = (ratio * (w.beta_lambda + x0) - w.alpha_lambda) * nf;
    let dq = diff_quotient(s, t, gap, nf);
    let zeta = g * (dq - s.powf(nf - 1.0) * omtn / omt);
    let st = s * t;
    let vartheta = g * ratio * t / omt * ((1.0 - st.powf(nf)) / (1.0 - st) - dq);
    Ok(ClosedFormReport {
        log_value: main_geometric + main_linear - zeta * w0 - vartheta,
        terms: ClosedFormTerms { zeta, vartheta, main_linear, main_geometric },
        pair,
        x0_used: x0,
        explicit_used,
        note,
    })
}

/// Tangent- and secant-linearized versions of the sequence `a_n` for indices `0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizedSequences {
    /// Tangent linearization with its positive correction; stays below `a_n`.
    pub lower: Vec<f64>,
    /// Secant linearization with its negative correction; stays above `a_n`.
    pub upper: Vec<f64>,
}

/// Closed-form linearized sequences for the slope `q < β_λ`.
pub fn linearized_sequences(q: f64, beta_lambda: f64, n: usize) -> Result<LinearizedSequences> {
    let fp = solve_fixed_point(q, beta_lambda)?;
    let (x0, t, s, g) = (fp.x0, fp.d_t, fp.d_s, fp.gamma_cap);
    let (omt, oms) = (fp.one_minus_d_t, fp.one_minus_d_s);
    let mut lower = Vec::with_capacity(n + 1);
    let mut upper = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let kf = k as f64;
        // lower: d = t, K1 = Γ, κ = t²
        let tk = t.powf(kf);
        lower.push(x0 * one_minus_pow(omt, kf) + g * tk * (1.0 - tk) / (t * omt));
        // upper: d = s, K1 = -Γ, κ = t, K2 = Γ, ν = t s
        let sk = s.powf(kf);
        let corr = -diff_quotient(s, t, omt - oms, kf) + (sk - (s * t).powf(kf)) / (s * omt);
        upper.push(x0 * one_minus_pow(oms, kf) + g * corr);
    }
    Ok(LinearizedSequences { lower, upper })
}

/// Closed-form lower bound `log C^L_n` with the solved fixed point.
pub fn closed_form_log_lower(params: &ParamSet, lambda: Order, omega0: u64, n: usize) -> Result<f64> {
    Ok(closed_form_lower(params, lambda, omega0, n, ClosedFormOptions::default())?.log_value)
}

/// Closed-form upper bound `log C^G_n` with the solved fixed point.
pub fn closed_form_log_upper(params: &ParamSet, lambda: Order, omega0: u64, n: usize) -> Result<f64> {
    Ok(closed_form_upper(params, lambda, omega0, n, ClosedFormOptions::default())?.log_value)
}
