//! The `a`/`b` recursions, coefficient selection and the recursive
//! exact values and bounds of the Hellinger integral.
//!
//! For a linear bound `varphi(x) ≤ p + q x` (or `≥`) on the lattice
//! `x ∈ {0,1,2,…}` the sequences
//!
//! ```text
//! a_0 = 0,  a_k = q e^{a_{k-1}} - β_λ
//! b_0 = 0,  b_k = p e^{a_{k-1}} - α_λ
//! ```
//!
//! give `log H ≤ a_n ω₀ + Σ_{k=1}^n b_k` (or `≥`). On the no-immigration and
//! proportional families the geometric-mean pair is exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{classify, classify_detailed, phi, phi_eval, varphi, CaseTag, LambdaWeights, Order, ParamSet, CLASSIFY_TOL};

/// Role of a coefficient pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    /// Exact linearization on the no-immigration and proportional families.
    Exact,
    /// Lower linear bound.
    Lower,
    /// Case-specific upper linear bound.
    Upper,
    /// Asymptote of `phi`, shifted by `(α_λ, β_λ)`.
    Asymptote,
    /// Horizontal line through the lattice maximum of `phi`.
    Horizontal,
}

/// Intercept `p` and slope `q` of a linear bound of `varphi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientPair {
    /// Intercept.
    pub p: f64,
    /// Slope.
    pub q: f64,
    /// Role of the pair.
    pub role: Role,
}

/// The two sequences `a[0..=n]` and `b[0..=n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionTrace {
    /// `a` sequence.
    pub a: Vec<f64>,
    /// `b` sequence.
    pub b: Vec<f64>,
}

/// One upper-bound construction and its value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperComponent {
    /// Name of the construction.
    pub label: String,
    /// Coefficients used, if the construction is linear.
    pub pair: Option<CoefficientPair>,
    /// Log-scale bound (may be `+∞` when the recursion diverges).
    pub log_value: f64,
}

/// Log-scale bounds or exact value of a Hellinger integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogBoundReport {
    /// Lower bound.
    pub log_lower: f64,
    /// Improved upper bound, the minimum over all constructions and 0.
    pub log_upper: f64,
    /// Exact value when available.
    pub log_exact: Option<f64>,
    /// Upper bound from the case-specific pair alone, capped at 0.
    pub log_upper_case: f64,
    /// Construction attaining `log_upper`.
    pub method: String,
    /// Case of the parameters.
    pub case: CaseTag,
    /// All upper constructions that were evaluated.
    pub components: Vec<UpperComponent>,
}

/// Runs both recursions up to `n`.
pub fn run_recursion(p: f64, q: f64, params: &ParamSet, lambda: Order, n: usize) -> RecursionTrace {
    let w = params.weights(lambda);
    let mut a: Vec<f64> = Vec::with_capacity(n + 1);
    let mut b = Vec::with_capacity(n + 1);
    a.push(0.0);
    b.push(0.0);
    for k in 1..=n {
        let e = a[k - 1].exp();
        a.push(q * e - w.beta_lambda);
        // `0 · ∞` would give NaN once `a` overflows.
        b.push(if p == 0.0 { -w.alpha_lambda } else { p * e - w.alpha_lambda });
    }
    RecursionTrace { a, b }
}

/// `a_n ω₀ + Σ_{k≤n} b_k` for every `n ∈ 0..=n_max`; diverging values become `+∞`.
pub fn log_bound_sequence(p: f64, q: f64, w: LambdaWeights, omega0: u64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(0.0);
    let (mut a, mut sum_b) = (0.0f64, 0.0f64);
    let w0 = omega0 as f64;
    for _ in 1..=n_max {
        let e = a.exp();
        a = q * e - w.beta_lambda;
        sum_b += p * e - w.alpha_lambda;
        let v = a * w0 + sum_b;
        out.push(if v.is_nan() || a > 700.0 { f64::INFINITY } else { v });
        if a > 700.0 {
            a = 700.0;
        }
    }
    out
}

fn geometric_pair(params: &ParamSet, lambda: Order) -> (f64, f64) {
    let l = lambda.get();
    let q = params.beta_a.powf(l) * params.beta_h.powf(1.0 - l);
    let p = if params.is_no_immigration() {
        0.0
    } else {
        params.alpha_a.powf(l) * params.alpha_h.powf(1.0 - l)
    };
    (p, q)
}

/// Asymptote of `phi` as `(intercept, slope)`.
pub fn asymptote_line(params: &ParamSet, lambda: Order) -> (f64, f64) {
    let pair = asymptote_pair(params, lambda);
    let w = params.weights(lambda);
    (pair.p - w.alpha_lambda, pair.q - w.beta_lambda)
}

fn asymptote_pair(params: &ParamSet, lambda: Order) -> CoefficientPair {
    let l = lambda.get();
    let rho = params.beta_a / params.beta_h;
    let p = l * params.alpha_a * rho.powf(l - 1.0) + (1.0 - l) * params.alpha_h * rho.powf(l);
    let q = params.beta_a.powf(l) * params.beta_h.powf(1.0 - l);
    CoefficientPair { p, q, role: Role::Asymptote }
}

/// Continuous maximizer of `phi` on `[0, ∞)`.
pub fn phi_argmax(params: &ParamSet, lambda: Order) -> f64 {
    let d = |x: f64| phi_eval(params, lambda, x).map(|e| e.phi_prime).unwrap_or(f64::NAN);
    if params.is_no_immigration() || params.gamma() == 0.0 || d(0.0) <= 0.0 {
        return 0.0;
    }
    let c = classify_detailed(params, lambda, CLASSIFY_TOL);
    if matches!(c.case, CaseTag::SP3c | CaseTag::SP3d) {
        if let Some(x) = c.x_star {
            return x;
        }
    }
    let mut hi = 1.0;
    while d(hi) >= 0.0 && hi < 1e15 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * (1.0 + hi) {
        let mid = 0.5 * (lo + hi);
        if d(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lattice maximizer of `phi`, ties broken toward the smaller integer.
pub fn phi_lattice_argmax(params: &ParamSet, lambda: Order) -> u64 {
    let k = phi_argmax(params, lambda).floor() as u64;
    if phi(params, lambda, (k + 1) as f64) > phi(params, lambda, k as f64) {
        k + 1
    } else {
        k
    }
}

fn secant_pair(params: &ParamSet, lambda: Order, k: u64) -> CoefficientPair {
    let v0 = varphi(params, lambda, k as f64);
    let v1 = varphi(params, lambda, (k + 1) as f64);
    let q = v1 - v0;
    CoefficientPair { p: v0 - q * k as f64, q, role: Role::Upper }
}

fn horizontal_pair(params: &ParamSet, lambda: Order) -> CoefficientPair {
    let w = params.weights(lambda);
    let z = phi_lattice_argmax(params, lambda) as f64;
    CoefficientPair { p: phi(params, lambda, z) + w.alpha_lambda, q: w.beta_lambda, role: Role::Horizontal }
}

/// Upper pair for the hump-shaped cases: the minimal-slope endpoint of the
/// admissible family through the lattice maximum.
fn hump_upper_pair(params: &ParamSet, lambda: Order) -> CoefficientPair {
    let w = params.weights(lambda);
    let k = phi_lattice_argmax(params, lambda);
    let (pk, pk1) = (phi(params, lambda, k as f64), phi(params, lambda, (k + 1) as f64));
    let r_sec = pk + k as f64 * (pk - pk1);
    let (r, s) = if r_sec <= 0.0 || k == 0 { (r_sec, pk1 - pk) } else { (0.0, pk / k as f64) };
    CoefficientPair { p: r + w.alpha_lambda, q: s + w.beta_lambda, role: Role::Upper }
}

/// Selects the coefficient pair of the requested role.
pub fn select_coeffs(params: &ParamSet, lambda: Order, role: Role) -> Result<CoefficientPair> {
    let case = classify(params, lambda);
    let w = params.weights(lambda);
    let (pe, qe) = geometric_pair(params, lambda);
    let refuse = |hint| Err(Error::CaseMismatch { operation: "select_coeffs", case, hint });
    match role {
        Role::Exact => {
            if case.has_exact() {
                Ok(CoefficientPair { p: pe, q: qe, role })
            } else {
                refuse("the exact pair exists only for NI and SP1; use Lower/Upper")
            }
        }
        Role::Lower => {
            if case.has_exact() {
                refuse("NI and SP1 have an exact pair; use Exact")
            } else {
                Ok(CoefficientPair { p: pe, q: qe, role })
            }
        }
        Role::Upper => match case {
            CaseTag::NI | CaseTag::SP1 => refuse("NI and SP1 have an exact pair; use Exact"),
            CaseTag::SP2 => {
                let alpha = params.alpha_a;
                Ok(CoefficientPair { p: alpha, q: varphi(params, lambda, 1.0) - alpha, role })
            }
            CaseTag::SP3a => Ok(CoefficientPair { p: pe, q: varphi(params, lambda, 1.0) - pe, role }),
            CaseTag::SP3b | CaseTag::SP3c => Ok(hump_upper_pair(params, lambda)),
            CaseTag::SP3d | CaseTag::SP4 => {
                Ok(CoefficientPair { p: w.alpha_lambda, q: w.beta_lambda, role })
            }
        },
        Role::Asymptote => {
            if case == CaseTag::SP4 {
                refuse("phi has no linear asymptote with slope below beta_lambda on SP4")
            } else {
                Ok(asymptote_pair(params, lambda))
            }
        }
        Role::Horizontal => Ok(horizontal_pair(params, lambda)),
    }
}

/// Checks `varphi(x) ≤ p + q x` on the whole lattice (up to a relative slack).
///
/// A finite prefix suffices: beyond the point where the line dominates the
/// asymptote of `phi` it dominates `phi` itself.
pub fn dominates_on_lattice(params: &ParamSet, lambda: Order, pair: &CoefficientPair) -> bool {
    let w = params.weights(lambda);
    let (r, s) = (pair.p - w.alpha_lambda, pair.q - w.beta_lambda);
    let (r_a, s_a) = asymptote_line(params, lambda);
    let slack = |x: f64| 1e-12 * (1.0 + w.alpha_lambda + w.beta_lambda * x);
    let x_check = if s > s_a {
        ((r_a - r) / (s - s_a)).max(0.0).ceil()
    } else if s == s_a && r >= r_a {
        0.0
    } else if params.beta_a == params.beta_h {
        // phi tends to 0; a line with negative slope fails eventually
        if s < 0.0 || (s == 0.0 && r < 0.0) {
            return false;
        }
        0.0
    } else {
        return false;
    };
    let x_check = x_check.min(1e7) as u64;
    (0..=x_check + 1).all(|x| {
        let xf = x as f64;
        phi(params, lambda, xf) <= r + s * xf + slack(xf)
    })
}

/// Exact `log H` on the no-immigration and proportional families.
pub fn exact_log_hellinger(params: &ParamSet, lambda: Order, omega0: u64, n: usize) -> Result<f64> {
    Ok(*exact_log_hellinger_sequence(params, lambda, omega0, n)?.last().unwrap())
}

/// Exact `log H` for every horizon `0..=n_max`.
pub fn exact_log_hellinger_sequence(
    params: &ParamSet,
    lambda: Order,
    omega0: u64,
    n_max: usize,
) -> Result<Vec<f64>> {
    let case = classify(params, lambda);
    if !case.has_exact() {
        return Err(Error::CaseMismatch {
            operation: "exact_log_hellinger",
            case,
            hint: "use recursive_log_bounds for SP2..SP4",
        });
    }
    let w = params.weights(lambda);
    let (_, q) = geometric_pair(params, lambda);
    let ratio = if params.is_no_immigration() { 0.0 } else { params.alpha_a / params.beta_a };
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(0.0);
    let (mut a, mut sum_a) = (0.0f64, 0.0f64);
    for _ in 1..=n_max {
        a = q * a.exp() - w.beta_lambda;
        sum_a += a;
        out.push(a * omega0 as f64 + ratio * sum_a);
    }
    Ok(out)
}

/// Largest value of `phi(x) - ε e^{-varphi(x)}` over the lattice, with `ε = 1 - e^{phi(0)}`.
///
/// Below one on the integer-crossing case; gives `log H ≤ ⌊n/2⌋ log δ`.
pub fn separation_log_delta(params: &ParamSet, lambda: Order) -> f64 {
    let eps = -phi(params, lambda, 0.0).exp_m1();
    let x_peak = phi_argmax(params, lambda);
    let mut best = f64::NEG_INFINITY;
    let mut x = 0u64;
    loop {
        let xf = x as f64;
        let ph = phi(params, lambda, xf);
        let v = ph - eps * (-varphi(params, lambda, xf)).exp();
        best = best.max(v);
        if xf > x_peak && ph < best - 1.0 {
            break;
        }
        if x > 100_000_000 {
            break;
        }
        x += 1;
    }
    best
}

/// Recursive lower bound and improved upper bound on SP2..SP4.
pub fn recursive_log_bounds(params: &ParamSet, lambda: Order, omega0: u64, n: usize) -> Result<LogBoundReport> {
    let case = classify(params, lambda);
    if case.has_exact() {
        return Err(Error::CaseMismatch {
            operation: "recursive_log_bounds",
            case,
            hint: "use exact_log_hellinger for NI and SP1",
        });
    }
    if n == 0 {
        return Err(Error::InvalidInput("horizon n must be at least 1".into()));
    }
    let w = params.weights(lambda);
    let lower = select_coeffs(params, lambda, Role::Lower)?;
    let log_lower = log_bound_sequence(lower.p, lower.q, w, omega0, n)[n];

    let mut components = Vec::new();
    let mut push_pair = |label: &str, pair: CoefficientPair| {
        if pair.p >= 0.0 && pair.q >= 0.0 && pair.p.is_finite() && pair.q.is_finite() {
            let v = log_bound_sequence(pair.p, pair.q, w, omega0, n)[n];
            components.push(UpperComponent { label: label.into(), pair: Some(pair), log_value: v });
        }
    };
    let case_pair = select_coeffs(params, lambda, Role::Upper)?;
    push_pair("case", case_pair);
    if case != CaseTag::SP4 {
        push_pair("secant-0-1", secant_pair(params, lambda, 0));
        push_pair("asymptote", asymptote_pair(params, lambda));
    }
    push_pair("horizontal", horizontal_pair(params, lambda));
    if case == CaseTag::SP3d {
        let ld = separation_log_delta(params, lambda);
        components.push(UpperComponent {
            label: "separation".into(),
            pair: None,
            log_value: (n / 2) as f64 * ld,
        });
    }
    components.push(UpperComponent { label: "trivial".into(), pair: None, log_value: 0.0 });

    let log_upper_case = components[0].log_value.min(0.0);
    let best = components
        .iter()
        .min_by(|a, b| a.log_value.total_cmp(&b.log_value))
        .expect("at least the trivial component");
    Ok(LogBoundReport {
        log_lower,
        log_upper: best.log_value.min(0.0),
        log_exact: None,
        log_upper_case,
        method: best.label.clone(),
        case,
        components,
    })
}

/// Exact value where available, recursive bounds otherwise.
pub fn log_hellinger_report(params: &ParamSet, lambda: Order, omega0: u64, n: usize) -> Result<LogBoundReport> {
    let case = classify(params, lambda);
    if case.has_exact() {
        let v = exact_log_hellinger(params, lambda, omega0, n)?;
        return Ok(LogBoundReport {
            log_lower: v,
            log_upper: v,
            log_exact: Some(v),
            log_upper_case: v,
            method: "exact".into(),
            case,
            components: Vec::new(),
        });
    }
    if n == 0 {
        return Ok(LogBoundReport {
            log_lower: 0.0,
            log_upper: 0.0,
            log_exact: Some(0.0),
            log_upper_case: 0.0,
            method: "empty-horizon".into(),
            case,
            components: Vec::new(),
        });
    }
    recursive_log_bounds(params, lambda, omega0, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ps(b_a: f64, b_h: f64, a_a: f64, a_h: f64) -> ParamSet {
        ParamSet::new(b_a, b_h, a_a, a_h).unwrap()
    }
    fn half() -> Order {
        Order::new(0.5).unwrap()
    }

    #[test]
    fn recursion_fixed_slopes() {
        let p = ps(0.8, 0.6, 2.0, 1.9);
        let w = p.weights(half());
        let t = run_recursion(1.3, w.beta_lambda, &p, half(), 6);
        assert!(t.a.iter().all(|&a| a == 0.0));
        let t = run_recursion(1.3, 0.0, &p, half(), 6);
        assert_abs_diff_eq!(t.b[1], 1.3 - w.alpha_lambda, epsilon = 1e-15);
        for k in 1..=6 {
            assert_eq!(t.a[k], -w.beta_lambda);
        }
        for k in 2..=6 {
            assert_abs_diff_eq!(t.b[k], 1.3 * (-w.beta_lambda).exp() - w.alpha_lambda, epsilon = 1e-15);
        }
        let t = run_recursion(1.3, 0.5, &p, half(), 1);
        assert_eq!(t.a[1], 0.5 - w.beta_lambda);
        assert_eq!(t.b[1], 1.3 - w.alpha_lambda);
    }

    #[test]
    fn worked_example_pairs() {
        let rows = [
            ((0.8, 0.6, 2.0, 2.0), (2.0, 0.698), (2.021, 0.693)),
            ((0.8, 0.6, 2.0, 1.9), (1.949, 0.696), (1.963, 0.693)),
            ((0.8, 0.6, 2.0, 1.1), (1.483, 0.699), (1.501, 0.693)),
            ((1.0, 1.5, 2.0, 1.8), (1.897, 1.249), (1.960, 1.225)),
        ];
        for ((ba, bh, aa, ah), up, asy) in rows {
            let p = ps(ba, bh, aa, ah);
            let u = select_coeffs(&p, half(), Role::Upper).unwrap();
            let a = select_coeffs(&p, half(), Role::Asymptote).unwrap();
            assert_abs_diff_eq!(u.p, up.0, epsilon = 5e-4);
            assert_abs_diff_eq!(u.q, up.1, epsilon = 5e-4);
            assert_abs_diff_eq!(a.p, asy.0, epsilon = 5e-4);
            assert_abs_diff_eq!(a.q, asy.1, epsilon = 5e-4);
        }
    }

    #[test]
    fn sp2_lower_intercept_is_common_immigration() {
        let p = ps(0.8, 0.6, 2.0, 2.0);
        let l = select_coeffs(&p, Order::new(0.3).unwrap(), Role::Lower).unwrap();
        assert_abs_diff_eq!(l.p, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn case_role_mismatch_errors() {
        let ni = ps(0.5, 0.25, 0.0, 0.0);
        assert!(select_coeffs(&ni, half(), Role::Upper).is_err());
        assert!(select_coeffs(&ni, half(), Role::Lower).is_err());
        let sp4 = ps(1.0, 1.0, 2.0, 3.0);
        assert!(select_coeffs(&sp4, half(), Role::Asymptote).is_err());
        assert!(select_coeffs(&sp4, half(), Role::Exact).is_err());
        assert!(recursive_log_bounds(&ni, half(), 1, 2).is_err());
        assert!(exact_log_hellinger(&sp4, half(), 1, 2).is_err());
    }

    #[test]
    fn selected_pairs_dominate_on_lattice() {
        let sets = [
            ps(0.8, 0.6, 2.0, 2.0),
            ps(0.8, 0.6, 2.0, 1.9),
            ps(0.8, 0.6, 2.0, 1.1),
            ps(1.0, 1.5, 2.0, 1.8),
            ps(1.8, 0.9, 2.9, 0.7),
            ps(1.8, 0.9, 1.1, 3.0),
            ps(0.3, 2.5, 9.0, 0.5),
        ];
        for p in sets {
            for role in [Role::Upper, Role::Asymptote, Role::Horizontal] {
                let pair = select_coeffs(&p, half(), role).unwrap();
                assert!(dominates_on_lattice(&p, half(), &pair), "{p:?} {role:?} {pair:?}");
            }
            assert!(dominates_on_lattice(&p, half(), &secant_pair(&p, half(), 0)));
        }
    }

    #[test]
    fn sp1_one_step_value() {
        let p = ps(4.0, 2.0, 4.0, 2.0);
        let v = exact_log_hellinger(&p, half(), 3, 1).unwrap();
        let expected = (8f64.sqrt() - 3.0) * (3.0 + 1.0);
        assert_abs_diff_eq!(v, expected, epsilon = 1e-13);
        assert_eq!(exact_log_hellinger(&p, half(), 3, 0).unwrap(), 0.0);
    }

    #[test]
    fn sp4_upper_is_trivial() {
        let p = ps(1.0, 1.0, 2.0, 3.0);
        for n in 1..6 {
            let r = recursive_log_bounds(&p, half(), 2, n).unwrap();
            assert_eq!(r.log_upper, 0.0);
        }
    }

    #[test]
    fn sp3d_separation_bound() {
        let p = ps(1.8, 0.9, 1.2, 3.0);
        let ld = separation_log_delta(&p, half());
        assert!(ld < 0.0);
        for n in 1..8 {
            let r = recursive_log_bounds(&p, half(), 2, n).unwrap();
            assert!(r.log_upper <= (n / 2) as f64 * ld + 1e-15);
        }
    }
}
