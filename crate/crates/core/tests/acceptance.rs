//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p gwi-core --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{le, sample_any, sample_case};
use gwi_core::closed_form::{closed_form_log_lower, closed_form_log_upper, closed_form_lower, closed_form_upper, linearized_sequences, ClosedFormOptions};
use gwi_core::decision::{bayes_risk_bounds, np_type2_bound, DecisionConfig};
use gwi_core::diffusion::{limit_log_bounds, prelimit_log_bounds, scaled_limit_checks, SDEParams};
use gwi_core::entropy::{entropy_lower, entropy_upper, exact_entropy};
use gwi_core::fixed_point::solve_fixed_point;
use gwi_core::model::{classify, lemma_gap, phi_prime_at_zero, CaseTag, Order, ParamSet};
use gwi_core::oracle::{enum_bayes_risk, enum_entropy, enum_log_hellinger, enum_np_type2, TruncationPolicy};
use gwi_core::recursion::{
    asymptote_line, exact_log_hellinger, exact_log_hellinger_sequence, log_bound_sequence, recursive_log_bounds,
    run_recursion, select_coeffs, Role,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ps(b_a: f64, b_h: f64, a_a: f64, a_h: f64) -> ParamSet {
    ParamSet::new(b_a, b_h, a_a, a_h).expect("valid parameters")
}

fn ord(l: f64) -> Order {
    Order::new(l).expect("valid order")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Criterion 1: coefficient pairs of the four worked examples.
fn worked_example_pairs() -> Outcome {
    let cases = [
        ((0.8, 0.6, 2.0, 2.0), (2.021, 0.693), (2.0, 0.698)),
        ((0.8, 0.6, 2.0, 1.9), (1.963, 0.693), (1.949, 0.696)),
        ((0.8, 0.6, 2.0, 1.1), (1.501, 0.693), (1.483, 0.699)),
        ((1.0, 1.5, 2.0, 1.8), (1.960, 1.225), (1.897, 1.249)),
    ];
    let tol = 5e-4;
    for ((ba, bh, aa, ah), asym, up) in cases {
        let p = ps(ba, bh, aa, ah);
        let a = select_coeffs(&p, ord(0.5), Role::Asymptote).map_err(|e| e.to_string())?;
        let u = select_coeffs(&p, ord(0.5), Role::Upper).map_err(|e| e.to_string())?;
        ensure((a.p - asym.0).abs() <= tol && (a.q - asym.1).abs() <= tol, || {
            format!("asymptote pair ({:.4}, {:.4}) != {asym:?} for {p:?}", a.p, a.q)
        })?;
        ensure((u.p - up.0).abs() <= tol && (u.q - up.1).abs() <= tol, || {
            format!("upper pair ({:.4}, {:.4}) != {up:?} for {p:?}", u.p, u.q)
        })?;
    }
    Ok("4 examples, asymptote and upper pairs within 5e-4".into())
}

/// Criterion 2: case atlas.
fn case_atlas() -> Outcome {
    let l = ord(0.5);
    let signs = [(3.0, -1.0), (4.0, 0.0), (5.0, 1.0)];
    for (aa, sign) in signs {
        let d = phi_prime_at_zero(&ps(4.0, 2.0, aa, 1.0), l);
        let ok = if sign == 0.0 { d.abs() < 1e-12 } else { d.signum() == sign };
        ensure(ok, || format!("phi'(0) for alpha_A={aa} is {d}"))?;
    }
    let tuples = [
        ((1.8, 0.9, 2.8, 0.7), CaseTag::SP3a),
        ((1.8, 0.9, 2.9, 0.7), CaseTag::SP3b),
        ((1.8, 0.9, 1.1, 3.0), CaseTag::SP3c),
        ((1.8, 0.9, 1.2, 3.0), CaseTag::SP3d),
    ];
    for ((ba, bh, aa, ah), want) in tuples {
        let got = classify(&ps(ba, bh, aa, ah), l);
        ensure(got == want, || format!("({ba},{bh},{aa},{ah}) classified {got}, expected {want}"))?;
    }
    for (ba, sign) in [(3.7, 1.0), (3.6, 0.0), (3.5, -1.0)] {
        let (r, _) = asymptote_line(&ps(ba, 0.9, 2.0, 1.0), l);
        let ok = if sign == 0.0 { r.abs() <= 1e-6 } else { r.signum() == sign && r.abs() > 1e-6 };
        ensure(ok, || format!("asymptote intercept for beta_A={ba} is {r}"))?;
    }
    Ok("phi'(0) signs, SP3a-d tuples and asymptote intercept signs reproduced".into())
}

/// Criterion 3: closed-form, recursive and enumerated values are ordered.
fn oracle_sandwich() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let policy = TruncationPolicy { tail_budget: 1e-9, ..TruncationPolicy::default() };
    let lambdas = [0.1, 0.5, 0.9];
    let mut checked = 0;
    for i in 0..100 {
        let l = ord(lambdas[i % 3]);
        let case = CaseTag::ALL[i % 8];
        let p = sample_case(&mut rng, case, l);
        let w0 = [1u64, 3][(i / 8) % 2];
        for n in 1..=4 {
            let e = enum_log_hellinger(&p, l, w0, n, &policy).map_err(|e| e.to_string())?;
            let (lo_e, hi_e) = e.log_interval();
            let cl = closed_form_log_lower(&p, l, w0, n).map_err(|e| e.to_string())?;
            let cg = closed_form_log_upper(&p, l, w0, n).ok();
            let ctx = || format!("{case} {p:?} lambda={} w0={w0} n={n}", l.get());
            if case.has_exact() {
                let v = exact_log_hellinger(&p, l, w0, n).map_err(|e| e.to_string())?;
                ensure(le(cl, v), || format!("C^L {cl} > V {v}: {}", ctx()))?;
                ensure(le(lo_e, v) && le(v, hi_e), || format!("V {v} outside enum [{lo_e}, {hi_e}]: {}", ctx()))?;
                if let Some(cg) = cg {
                    ensure(le(v, cg), || format!("V {v} > C^G {cg}: {}", ctx()))?;
                }
            } else {
                let r = recursive_log_bounds(&p, l, w0, n).map_err(|e| e.to_string())?;
                ensure(le(cl, r.log_lower), || format!("C^L {cl} > B^L {}: {}", r.log_lower, ctx()))?;
                ensure(le(r.log_lower, hi_e), || format!("B^L {} > enum {hi_e}: {}", r.log_lower, ctx()))?;
                ensure(le(lo_e, r.log_upper), || format!("enum {lo_e} > B^U {}: {}", r.log_upper, ctx()))?;
                if let Some(cg) = cg {
                    ensure(le(r.log_upper_case, cg), || format!("B^U {} > C^G {cg}: {}", r.log_upper_case, ctx()))?;
                }
            }
            checked += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.1}s"))?;
    Ok(format!("{checked} (instance, n) checks over all 8 cases in {secs:.1}s"))
}

/// Strictly decreasing, allowing steps below the floating-point resolution.
fn strictly_decreasing(v: &[f64]) -> Result<(), usize> {
    for k in 0..v.len() - 1 {
        let resolution = 8.0 * f64::EPSILON * v[k].abs().max(1.0);
        if !(v[k + 1] < v[k]) && (v[k + 1] - v[k]).abs() > resolution {
            return Err(k);
        }
        if v[k + 1] > v[k] {
            return Err(k);
        }
    }
    Ok(())
}

/// Criterion 4: monotonicity in the horizon.
fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n_max = 50;
    let mut sequences = 0;
    for i in 0..120 {
        let l = ord([0.1, 0.5, 0.9][i % 3]);
        let case = CaseTag::ALL[i % 8];
        let p = sample_case(&mut rng, case, l);
        let w0 = [1u64, 3][(i / 8) % 2];
        let w = p.weights(l);
        let mut seqs: Vec<(&str, Vec<f64>)> = Vec::new();
        if case.has_exact() {
            seqs.push(("exact", exact_log_hellinger_sequence(&p, l, w0, n_max).map_err(|e| e.to_string())?));
        } else {
            let lo = select_coeffs(&p, l, Role::Lower).map_err(|e| e.to_string())?;
            seqs.push(("B^L", log_bound_sequence(lo.p, lo.q, w, w0, n_max)));
            if !matches!(case, CaseTag::SP3d | CaseTag::SP4) {
                let up = select_coeffs(&p, l, Role::Upper).map_err(|e| e.to_string())?;
                seqs.push(("B^U", log_bound_sequence(up.p, up.q, w, w0, n_max)));
            }
        }
        let cl: Result<Vec<f64>, _> = (0..=n_max).map(|n| closed_form_log_lower(&p, l, w0, n)).collect();
        seqs.push(("C^L", cl.map_err(|e| e.to_string())?));
        if !matches!(case, CaseTag::SP3d | CaseTag::SP4) {
            let cg: Result<Vec<f64>, _> = (0..=n_max).map(|n| closed_form_log_upper(&p, l, w0, n)).collect();
            seqs.push(("C^G", cg.map_err(|e| e.to_string())?));
        }
        for (name, s) in seqs {
            strictly_decreasing(&s)
                .map_err(|k| format!("{name} not decreasing at n={k} for {case} {p:?} lambda={}: {} -> {}", l.get(), s[k], s[k + 1]))?;
            sequences += 1;
        }
    }
    Ok(format!("{sequences} sequences strictly decreasing for n <= {n_max}"))
}

/// `(1/n) log C_n`, `log C_n − log C_{n−1}` and the limit slope for one side of the closed form.
///
/// The horizon is stretched to `30 / (1 − d)` when the geometric rate `d` is too close to one
/// for `n` steps to settle; the horizon used is returned last.
fn closed_form_slopes(p: &ParamSet, l: Order, w0: u64, n: usize, upper: bool) -> Option<(f64, f64, f64, usize)> {
    let eval = |k| {
        if upper {
            closed_form_upper(p, l, w0, k, ClosedFormOptions::default()).ok()
        } else {
            closed_form_lower(p, l, w0, k, ClosedFormOptions::default()).ok()
        }
    };
    let probe = eval(n)?;
    let w = p.weights(l);
    let n = match solve_fixed_point(probe.pair.q, w.beta_lambda) {
        Ok(fp) => {
            let gap = fp.one_minus_d_t.min(if upper { fp.one_minus_d_s } else { 1.0 });
            n.max((30.0 / gap).ceil() as usize)
        }
        Err(_) => n,
    };
    let (cur, prev) = (eval(n)?, eval(n - 1)?);
    let limit = cur.pair.p / cur.pair.q * (cur.x0_used + w.beta_lambda) - w.alpha_lambda;
    Some((cur.log_value / n as f64, cur.log_value - prev.log_value, limit, n))
}

/// Criterion 5: long-horizon slopes.
fn asymptotic_slopes() -> Outcome {
    let l = ord(0.5);
    let sp1 = ps(0.8, 0.5, 1.6, 1.0);
    let pair = select_coeffs(&sp1, l, Role::Exact).map_err(|e| e.to_string())?;
    let x0 = solve_fixed_point(pair.q, sp1.weights(l).beta_lambda).map_err(|e| e.to_string())?.x0;
    let slope = exact_log_hellinger(&sp1, l, 1, 200).map_err(|e| e.to_string())? / 200.0;
    let want = sp1.alpha_a / sp1.beta_a * x0;
    ensure((slope - want).abs() < 1e-3, || format!("SP1 slope {slope} vs {want}"))?;
    let ni = ps(0.5, 0.25, 0.0, 0.0);
    let slope = exact_log_hellinger(&ni, l, 1, 200).map_err(|e| e.to_string())? / 200.0;
    ensure(slope.abs() < 1e-3, || format!("NI slope {slope}"))?;

    // (4, 2, 4, 2) has a constant offset near 4.0, so its average is only checked through the increment.
    let sp1b = ps(4.0, 2.0, 4.0, 2.0);
    let pair = select_coeffs(&sp1b, l, Role::Exact).map_err(|e| e.to_string())?;
    let x0 = solve_fixed_point(pair.q, sp1b.weights(l).beta_lambda).map_err(|e| e.to_string())?.x0;
    let step = exact_log_hellinger(&sp1b, l, 1, 200).map_err(|e| e.to_string())?
        - exact_log_hellinger(&sp1b, l, 1, 199).map_err(|e| e.to_string())?;
    let want = sp1b.alpha_a / sp1b.beta_a * x0;
    ensure((step - want).abs() < 1e-3, || format!("SP1 increment {step} vs {want}"))?;

    let n = 500;
    // The O(1/n) offset of the average can exceed 1e-3 at n = 500, so the increment is compared.
    let instances = [
        ps(4.0, 2.0, 4.0, 2.0),
        ps(0.8, 0.5, 1.6, 1.0),
        ps(0.9, 0.6, 0.0, 0.0),
        ps(0.8, 0.6, 2.0, 2.0),
        ps(0.8, 0.6, 2.0, 1.9),
        ps(0.8, 0.6, 2.0, 1.1),
        ps(1.0, 1.5, 2.0, 1.8),
        ps(1.8, 0.9, 1.2, 3.0),
        ps(1.0, 1.0, 2.0, 3.0),
    ];
    let mut count = 0;
    let mut worst_avg: f64 = 0.0;
    let mut stretched = 0;
    for p in instances {
        for upper in [false, true] {
            if let Some((avg, step, limit, used)) = closed_form_slopes(&p, l, 2, n, upper) {
                stretched += usize::from(used > n);
                ensure((step - limit).abs() < 1e-3, || format!("closed-form increment {step} vs {limit} for {p:?} (upper={upper})"))?;
                worst_avg = worst_avg.max((avg - limit).abs());
                count += 1;
            }
        }
    }
    Ok(format!(
        "exact SP1/NI slopes at n=200; {count} closed-form increments at n=500 within 1e-3 ({stretched} with a longer horizon for slow rates; largest average offset {worst_avg:.1e})"
    ))
}

/// Criterion 6: diffusion-limit convergence.
fn diffusion_convergence() -> Outcome {
    let l = ord(0.5);
    let mut count = 0;
    for sde in [SDEParams::new(0.5, 2.0, 1.0, 1.0, 1.0), SDEParams::new(0.0, 0.0, 1.0, 1.0, 1.0), SDEParams::new(1.5, 0.5, 3.0, 1.4, 2.0)] {
        let sde = sde.map_err(|e| e.to_string())?;
        for c in scaled_limit_checks(&sde, l, 1.0, 100_000).map_err(|e| e.to_string())? {
            ensure(c.relative_error() < 1e-3, || format!("{} = {} vs limit {} for {sde:?}", c.name, c.observed, c.expected))?;
            count += 1;
        }
    }
    let sde = SDEParams::new(0.0, 0.0, 1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let (dl, du) = limit_log_bounds(&sde, l, 1.0).map_err(|e| e.to_string())?;
    let mut gaps = Vec::new();
    for m in [100u64, 1_000, 10_000] {
        let x0 = (m as f64 * sde.x0_tilde).round() as u64;
        let (lo, hi) = prelimit_log_bounds(&sde, l, 1.0, m, x0).map_err(|e| e.to_string())?;
        gaps.push((lo - dl).abs().max((hi - du).abs()));
    }
    ensure(gaps.windows(2).all(|g| g[1] < g[0]), || format!("gaps not shrinking: {gaps:?}"))?;
    ensure(gaps[2] < 1e-2, || format!("final gap {}", gaps[2]))?;
    Ok(format!("{count} scaled limits at m=1e5 within 1e-3; prelimit gaps {:.2e} > {:.2e} > {:.2e}", gaps[0], gaps[1], gaps[2]))
}

/// Criterion 7: relative entropy consistency.
fn entropy_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let l_near = 1.0 - 1e-6;
    for i in 0..20 {
        let case = [CaseTag::NI, CaseTag::SP1][i % 2];
        let p = sample_case(&mut rng, case, ord(0.5));
        let (w0, n) = (rng.random_range(1..4u64), rng.random_range(1..7usize));
        let exact = exact_entropy(&p, w0, n).map_err(|e| e.to_string())?;
        let h = exact_log_hellinger(&p, ord(l_near), w0, n).map_err(|e| e.to_string())?;
        let limit = -h.exp_m1() / (l_near * (1.0 - l_near));
        ensure(((exact - limit) / exact).abs() < 1e-3, || format!("entropy {exact} vs limit {limit} for {p:?}"))?;
    }
    let policy = TruncationPolicy::default();
    let bound_cases = [CaseTag::SP2, CaseTag::SP3a, CaseTag::SP3b, CaseTag::SP3c, CaseTag::SP3d, CaseTag::SP4];
    for i in 0..20 {
        let case = bound_cases[i % bound_cases.len()];
        let p = sample_case(&mut rng, case, ord(0.5));
        let (w0, n) = (rng.random_range(1..4u64), rng.random_range(1..5usize));
        let e = enum_entropy(&p, w0, n, &policy).map_err(|e| e.to_string())?;
        let lower = entropy_lower(&p, w0, n).map_err(|e| e.to_string())?.lower.unwrap_or(0.0);
        let upper = entropy_upper(&p, w0, n).map_err(|e| e.to_string())?;
        ensure(le(lower, e.value + e.error_bound) && le(e.value, upper), || {
            format!("E^L {lower} <= I {} <= E^U {upper} fails for {case} {p:?} w0={w0} n={n}", e.value)
        })?;
    }
    let p = ps(1.0 / 3.0, 2.0 / 3.0, 2.0, 1.0);
    for n in 1..=5 {
        let r = entropy_lower(&p, 3, n).map_err(|e| e.to_string())?;
        ensure(r.degenerate, || format!("SP3d example not flagged at n={n}: {:?}", r.y_star_derivative))?;
    }
    Ok("20 exact values match the lambda->1 transform; 20 enumerated values within [E^L, E^U]; SP3d example flagged".into())
}

/// Criterion 8: Bayes and Neyman-Pearson bounds against the enumeration.
fn decision_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let policy = TruncationPolicy::default();
    let ratios = [0.1, 1.0, 10.0];
    for i in 0..50 {
        let l = ord([0.1, 0.3, 0.5, 0.7, 0.9][i % 5]);
        let p = sample_any(&mut rng, l);
        let w0 = rng.random_range(1..4u64);
        let n = rng.random_range(1..4usize);
        let cfg = DecisionConfig {
            loss_a: ratios[i % 3],
            loss_h: 1.0,
            prior_h: rng.random_range(0.2..0.8),
            level: [0.01, 0.05, 0.1, 0.3][i % 4],
        };
        let ctx = || format!("{p:?} lambda={} w0={w0} n={n} cfg={cfg:?}", l.get());
        let b = bayes_risk_bounds(&p, l, w0, n, &cfg).map_err(|e| e.to_string())?;
        let r = enum_bayes_risk(&p, w0, n, &cfg, &policy).map_err(|e| e.to_string())?;
        ensure(le(b.lower, r.value + r.error_bound) && le(r.value, b.upper), || {
            format!("Bayes {} not in [{}, {}]: {}", r.value, b.lower, b.upper, ctx())
        })?;
        let bound = np_type2_bound(&p, l, w0, n, &cfg).map_err(|e| e.to_string())?;
        let t = enum_np_type2(&p, w0, n, cfg.level, &policy).map_err(|e| e.to_string())?;
        ensure(le(t.value - t.error_bound, bound), || format!("type II {} > bound {bound}: {}", t.value, ctx()))?;
    }
    Ok("50 instances: Bayes risk inside bounds and NP type II error below bound".into())
}

/// Criterion 9: property suites on random inputs.
fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100_000 {
        let (x, y, z) = (10f64.powf(rng.random_range(-2.0..2.0)), 10f64.powf(rng.random_range(-2.0..2.0)), 10f64.powf(rng.random_range(-2.0..2.0)));
        let l = ord(rng.random_range(0.001..0.999));
        let g = lemma_gap(x, y, z, l).map_err(|e| e.to_string())?;
        let scale = x.max(y) * z.powf(l.get() - 1.0).max(z.powf(l.get()));
        ensure(g <= 1e-12 * scale.max(1.0), || format!("gap {g} > 0 at ({x}, {y}, {z}, {})", l.get()))?;
    }

    for _ in 0..10_000 {
        let l = ord(rng.random_range(0.05..0.95));
        let p = sample_any(&mut rng, l);
        let w = p.weights(l);
        let beta = w.beta_lambda;
        let n = 6;
        let q = match rng.random_range(0..4) {
            0 => beta,
            1 => 0.0,
            2 => rng.random_range(0.2..0.95) * beta,
            _ => rng.random_range(1.02..1.5) * beta,
        };
        let pp = rng.random_range(0.0..2.0) * w.alpha_lambda.max(0.1);
        let t = run_recursion(pp, q, &p, l, n);
        let (a, b) = (&t.a[1..], &t.b[1..]);
        if q == beta {
            ensure(a.iter().all(|&v| v == 0.0), || "a not identically 0 for q = beta_lambda".into())?;
            ensure(b.iter().all(|&v| (v - (pp - w.alpha_lambda)).abs() < 1e-12), || "b not constant p - alpha".into())?;
        } else if q == 0.0 {
            ensure(a.iter().all(|&v| v == -beta), || "a not -beta for q = 0".into())?;
            ensure(b[1..].iter().all(|&v| (v - ((-beta).exp() * pp - w.alpha_lambda)).abs() < 1e-12), || "b wrong for q = 0".into())?;
        } else if q < beta {
            ensure(a.iter().all(|&v| v < 0.0) && a.windows(2).all(|s| s[1] < s[0]), || format!("a not negative decreasing: {a:?}"))?;
            if pp > 0.0 {
                ensure(b.windows(2).all(|s| s[1] < s[0]), || format!("b not decreasing: {b:?}"))?;
            }
        } else {
            ensure(a.iter().all(|&v| v > 0.0) && a.windows(2).all(|s| s[1] > s[0] || !s[1].is_finite()), || format!("a not positive increasing: {a:?}"))?;
            if pp > 0.0 {
                ensure(b.windows(2).all(|s| s[1] > s[0] || !s[1].is_finite()), || format!("b not increasing: {b:?}"))?;
            }
        }
        let t0 = run_recursion(0.0, q, &p, l, n);
        ensure(t0.b[1..].iter().all(|&v| v == -w.alpha_lambda), || "b with p = 0 not -alpha".into())?;

        // coefficient monotonicity
        let q1 = rng.random_range(0.0..1.0) * beta;
        let q2 = q1 + rng.random_range(0.01..0.5) * beta;
        let p1 = rng.random_range(0.0..2.0);
        let p2 = p1 + rng.random_range(0.01..1.0);
        let (s1, s2) = (run_recursion(p1, q1, &p, l, n), run_recursion(p1, q2, &p, l, n));
        let s3 = run_recursion(p2, q1, &p, l, n);
        for k in 1..=n {
            ensure(s1.a[k] < s2.a[k], || format!("a not increasing in q at k={k}"))?;
            if k >= 2 && p1 > 0.0 {
                ensure(s1.b[k] < s2.b[k], || format!("b not increasing in q at k={k}"))?;
            }
            ensure(s1.b[k] < s3.b[k], || format!("b not increasing in p at k={k}"))?;
        }
    }

    for _ in 0..1_000 {
        let l = ord(rng.random_range(0.05..0.95));
        let p = sample_any(&mut rng, l);
        let beta = p.weights(l).beta_lambda;
        let q = rng.random_range(0.1..0.98) * beta;
        let n = 30;
        let exact = run_recursion(1.0, q, &p, l, n).a;
        let lin = linearized_sequences(q, beta, n).map_err(|e| e.to_string())?;
        let resolved = |k: usize| (exact[k] - exact[n]).abs() > 1e-9;
        for k in 1..=n {
            ensure(le(lin.lower[k], exact[k]), || format!("tangent sequence above a at k={k}"))?;
            ensure(le(exact[k], lin.upper[k]), || format!("secant sequence below a at k={k}"))?;
            if resolved(k) {
                ensure(lin.lower[k] < exact[k], || format!("tangent sequence not strictly below at k={k}"))?;
            }
            if k >= 2 && resolved(k) {
                ensure(lin.upper[k] > exact[k], || format!("secant sequence not strictly above at k={k}"))?;
                ensure(lin.lower[k] < lin.lower[k - 1] && lin.upper[k] < lin.upper[k - 1], || format!("linearized sequences not decreasing at k={k}"))?;
            }
        }
        ensure((lin.upper[1] - exact[1]).abs() < 1e-12, || "secant sequence differs at k=1".into())?;
    }
    Ok("1e5 gap tuples, 1e4 recursion instances, 1e3 linearization sandwiches".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 worked-example coefficient pairs", worked_example_pairs),
        ("2 case atlas", case_atlas),
        ("3 oracle sandwich", oracle_sandwich),
        ("4 monotonicity", monotonicity),
        ("5 asymptotic slopes", asymptotic_slopes),
        ("6 diffusion convergence", diffusion_convergence),
        ("7 entropy consistency", entropy_consistency),
        ("8 decision bounds", decision_bounds),
        ("9 property suites", property_suites),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(msg) => println!("PASS criterion {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
