//! Relative entropy `I(P_A || P_H)` of the path laws up to generation `n`.
//!
//! Per generation the divergence contributes `E_A[g(X_{k-1})]` with the convex
//! function `g(x) = f_A ln(f_A/f_H) - f_A + f_H`. Every straight line
//! `c0 + c1 x` then yields `c0 n + c1 S_n`, where `S_n` is the sum of the
//! first `n` means of the process under `A`. Exact values come from `g`
//! being linear, the upper bound from the asymptote of `g` through `g(0)`, and
//! the lower bounds from tangents, lattice secants and a horizontal line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{classify_detailed, CaseTag, Order, ParamSet, CLASSIFY_TOL};

/// Below this distance `β_A` is treated as exactly one.
const UNIT_TOL: f64 = 1e-12;
/// Below this distance the mean sum is accumulated term by term.
const NEAR_UNIT: f64 = 1e-6;

/// Lower-bound components and the optimizers behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerComponents {
    /// Tangent component at the crossing point `y*` (SP3d only; always 0).
    pub tan_at_y_star: Option<f64>,
    /// Supremum of the tangent family over `y ≥ 0` (including `y → ∞`).
    pub best_tan: f64,
    /// Supremum of the lattice secant family.
    pub best_sec: f64,
    /// Horizontal-line component.
    pub horizontal: f64,
}

/// Where the suprema were attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgmaxInfo {
    /// Tangent point; `None` means the limit `y → ∞`.
    pub y_best: Option<f64>,
    /// Left lattice point of the best secant.
    pub k_best: u64,
    /// Lattice minimizer of `g`; `None` when the infimum is only approached.
    pub z_star: Option<u64>,
}

/// Relative entropy value or bounds with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    /// Case of the parameters.
    pub case: CaseTag,
    /// Exact value on NI and SP1.
    pub exact: Option<f64>,
    /// Upper bound on the remaining cases.
    pub upper: Option<f64>,
    /// Lower bound on the remaining cases.
    pub lower: Option<f64>,
    /// Lower-bound components.
    pub lower_components: Option<LowerComponents>,
    /// Optimizers of the lower-bound families.
    pub argmax_info: Option<ArgmaxInfo>,
    /// `max(tangent at ∞, secant at 0, horizontal)`, a cheaper lower bound.
    pub simplified_lower: Option<f64>,
    /// Derivative of the tangent component at `y*` (SP3d only).
    pub y_star_derivative: Option<f64>,
    /// True on SP3d when that derivative vanishes, so positivity is not guaranteed.
    pub degenerate: bool,
}

/// Case with the λ-free tests only (any order gives the same NI/SP1 verdict).
fn entropy_case(params: &ParamSet) -> CaseTag {
    classify_detailed(params, Order::new(0.5).expect("valid order"), CLASSIFY_TOL).case
}

/// Per-generation Kullback-Leibler contribution `g(x)`.
pub fn step_divergence(params: &ParamSet, x: f64) -> f64 {
    let (fa, fh) = (params.f_a(x), params.f_h(x));
    if fa <= 0.0 {
        return fh.max(0.0);
    }
    fa * (fa / fh).ln() - fa + fh
}

/// `β_A ln(β_A/β_H) - β_A + β_H`, the asymptotic slope of `g`.
pub fn slope_coefficient(params: &ParamSet) -> f64 {
    let r = params.beta_a / params.beta_h;
    params.beta_a * r.ln() - params.beta_a + params.beta_h
}

/// `S_n = Σ_{k=0}^{n-1} E_A[X_k]` given `X_0 = ω₀`.
pub fn mean_sum(params: &ParamSet, omega0: u64, n: usize) -> f64 {
    let (b, a, w0, nf) = (params.beta_a, params.alpha_a, omega0 as f64, n as f64);
    let dev = b - 1.0;
    if dev.abs() < UNIT_TOL {
        nf * w0 + a * nf * (nf - 1.0) / 2.0
    } else if dev.abs() < NEAR_UNIT {
        mean_sum_direct(params, omega0, n)
    } else {
        let g1 = (nf * dev.ln_1p()).exp_m1() / dev;
        w0 * g1 + a * (g1 - nf) / dev
    }
}

/// Term-by-term accumulation of the mean sum.
pub fn mean_sum_direct(params: &ParamSet, omega0: u64, n: usize) -> f64 {
    let mut m = omega0 as f64;
    let mut s = 0.0;
    for _ in 0..n {
        s += m;
        m = params.alpha_a + params.beta_a * m;
    }
    s
}

/// Exact relative entropy on NI and SP1.
pub fn exact_entropy(params: &ParamSet, omega0: u64, n: usize) -> Result<f64> {
    let case = entropy_case(params);
    if !case.has_exact() {
        return Err(Error::CaseMismatch {
            operation: "exact_entropy",
            case,
            hint: "use entropy_upper and entropy_lower",
        });
    }
    let c = slope_coefficient(params);
    let intercept = if case == CaseTag::NI { 0.0 } else { params.alpha_a / params.beta_a * c };
    Ok((intercept * n as f64 + c * mean_sum(params, omega0, n)).max(0.0))
}

fn require_bounds_case(params: &ParamSet, operation: &'static str) -> Result<CaseTag> {
    let case = entropy_case(params);
    if case.has_exact() {
        return Err(Error::CaseMismatch { operation, case, hint: "use exact_entropy" });
    }
    Ok(case)
}

/// Upper bound from the line with slope `β_A ln(β_A/β_H) - β_A + β_H` through `(0, g(0))`.
pub fn entropy_upper(params: &ParamSet, omega0: u64, n: usize) -> Result<f64> {
    require_bounds_case(params, "entropy_upper")?;
    let s = mean_sum(params, omega0, n);
    Ok((step_divergence(params, 0.0) * n as f64 + slope_coefficient(params) * s).max(0.0))
}

/// Value of the tangent line indexed by the ratio `R = f_A(y)/f_H(y)`.
fn tangent_value(params: &ParamSet, r: f64, n: f64, s: f64) -> f64 {
    let a = params.alpha_a * n + params.beta_a * s;
    let b = params.alpha_h * n + params.beta_h * s;
    a * r.ln() - b * (r - 1.0)
}

/// Tangent component `E^{L,tan}_{y,n}` at a finite `y ≥ 0`.
pub fn tangent_component(params: &ParamSet, y: f64, omega0: u64, n: usize) -> f64 {
    let s = mean_sum(params, omega0, n);
    tangent_value(params, params.ratio(y), n as f64, s)
}

/// Tangent component in the limit `y → ∞`.
pub fn tangent_component_at_infinity(params: &ParamSet, omega0: u64, n: usize) -> f64 {
    let s = mean_sum(params, omega0, n);
    tangent_value(params, params.beta_a / params.beta_h, n as f64, s)
}

/// Secant component through `(k, g(k))` and `(k+1, g(k+1))`.
pub fn secant_component(params: &ParamSet, k: u64, omega0: u64, n: usize) -> f64 {
    let s = mean_sum(params, omega0, n);
    secant_value(params, k, n as f64, s)
}

fn secant_value(params: &ParamSet, k: u64, n: f64, s: f64) -> f64 {
    let kf = k as f64;
    let (g0, g1) = (step_divergence(params, kf), step_divergence(params, kf + 1.0));
    n * g0 + (g1 - g0) * (s - n * kf)
}

/// Lattice minimizer of `g`, smallest on ties; `None` on SP4 where `g` decays to 0.
fn horizontal_argmin(params: &ParamSet, case: CaseTag) -> Option<u64> {
    if case == CaseTag::SP4 {
        return None;
    }
    let rising = |z: u64| step_divergence(params, z as f64 + 1.0) >= step_divergence(params, z as f64);
    if rising(0) {
        return Some(0);
    }
    let mut hi = 1u64;
    while !rising(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if rising(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Tangent-family optimum: `(value, y)` with `y = None` for the limit at infinity.
fn best_tangent(params: &ParamSet, n: f64, s: f64) -> (f64, Option<f64>) {
    let r0 = params.alpha_a / params.alpha_h;
    let r_inf = params.beta_a / params.beta_h;
    let a = params.alpha_a * n + params.beta_a * s;
    let b = params.alpha_h * n + params.beta_h * s;
    let (lo, hi) = (r0.min(r_inf), r0.max(r_inf));
    let r_star = (a / b).clamp(lo, hi);
    let inf_value = tangent_value(params, r_inf, n, s);
    if r_star == r_inf || r0 == r_inf {
        let y0 = tangent_value(params, r0, n, s);
        return if y0 > inf_value { (y0, Some(0.0)) } else { (inf_value, None) };
    }
    // invert R(y) = (α_A + β_A y)/(α_H + β_H y)
    let y = ((params.alpha_a - r_star * params.alpha_h) / (r_star * params.beta_h - params.beta_a)).max(0.0);
    let value = tangent_value(params, params.ratio(y), n, s);
    if value >= inf_value {
        (value, Some(y))
    } else {
        (inf_value, None)
    }
}

/// Lower bounds on SP2, SP3a-d and SP4 with the optimizers.
pub fn entropy_lower(params: &ParamSet, omega0: u64, n: usize) -> Result<EntropyReport> {
    let case = require_bounds_case(params, "entropy_lower")?;
    let nf = n as f64;
    let s = mean_sum(params, omega0, n);

    let (best_tan, y_best) = best_tangent(params, nf, s);

    let mean = if n == 0 { 0.0 } else { s / nf };
    let k0 = mean.floor().max(0.0) as u64;
    let (mut best_sec, mut k_best) = (secant_value(params, k0, nf, s), k0);
    for k in [k0.saturating_sub(1), k0 + 1, 0] {
        let v = secant_value(params, k, nf, s);
        if v > best_sec || (v == best_sec && k < k_best) {
            best_sec = v;
            k_best = k;
        }
    }

    let z_star = horizontal_argmin(params, case);
    let horizontal = match z_star {
        Some(z) => nf * step_divergence(params, z as f64),
        None => 0.0,
    };

    let (tan_at_y_star, y_star_derivative) = if case == CaseTag::SP3d {
        let y_star = (params.alpha_a - params.alpha_h) / (params.beta_h - params.beta_a);
        let f = params.f_a(y_star);
        let db = params.beta_a - params.beta_h;
        let deriv = db / f * ((params.alpha_a - params.alpha_h) * nf + db * s);
        (Some(tangent_component(params, y_star, omega0, n)), Some(deriv))
    } else {
        (None, None)
    };
    let degenerate = matches!(y_star_derivative, Some(d) if d.abs() <= 1e-9 * (1.0 + nf + s));

    let simplified = tangent_value(params, params.beta_a / params.beta_h, nf, s)
        .max(secant_value(params, 0, nf, s))
        .max(horizontal);
    let lower = best_tan.max(best_sec).max(horizontal).max(0.0);

    Ok(EntropyReport {
        case,
        exact: None,
        upper: Some(entropy_upper(params, omega0, n)?),
        lower: Some(lower),
        lower_components: Some(LowerComponents { tan_at_y_star, best_tan, best_sec, horizontal }),
        argmax_info: Some(ArgmaxInfo { y_best, k_best, z_star }),
        simplified_lower: Some(simplified.max(0.0)),
        y_star_derivative,
        degenerate,
    })
}

/// Exact value where available, otherwise the bounds.
pub fn entropy_report(params: &ParamSet, omega0: u64, n: usize) -> Result<EntropyReport> {
    let case = entropy_case(params);
    if case.has_exact() {
        Ok(EntropyReport {
            case,
            exact: Some(exact_entropy(params, omega0, n)?),
            upper: None,
            lower: None,
            lower_components: None,
            argmax_info: None,
            simplified_lower: None,
            y_star_derivative: None,
            degenerate: false,
        })
    } else {
        entropy_lower(params, omega0, n)
    }
}
