//! Brute-force reference values on truncated path spaces and Monte Carlo.
//!
//! Every transition `x → y` is truncated at the smallest `Y` for which the
//! discarded Poisson tail is below `tail_budget / n`, so the total discarded
//! mass (or Hellinger weight) over `n` generations stays within the budget.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decision::DecisionConfig;
use crate::entropy::{slope_coefficient, step_divergence};
use crate::error::{Error, Result};
use crate::model::{phi, varphi, Order, ParamSet};

/// Name of the generator used by [`mc_log_hellinger`].
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream = block index";

/// Paths simulated per Monte Carlo block.
const MC_BLOCK: usize = 10_000;

/// Truncation controls for the enumeration oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Total probability or Hellinger weight allowed to be discarded.
    pub tail_budget: f64,
    /// Cap on states per generation and on path atoms.
    pub max_state: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { tail_budget: 1e-9, max_state: 2_000_000 }
    }
}

impl TruncationPolicy {
    fn validate(&self) -> Result<()> {
        if !(self.tail_budget > 0.0 && self.tail_budget < 1.0) {
            return Err(Error::InvalidInput("tail_budget must lie in (0, 1)".into()));
        }
        if self.max_state == 0 {
            return Err(Error::InvalidInput("max_state must be positive".into()));
        }
        Ok(())
    }

    fn per_step(&self, n: usize) -> f64 {
        self.tail_budget / n.max(1) as f64
    }
}

/// An oracle value `v` with the true value in `[v, v + error_bound]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumValue {
    /// Truncated value (a lower end).
    pub value: f64,
    /// Width of the certified enclosure above `value`.
    pub error_bound: f64,
}

/// Enumerated Hellinger integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumHellinger {
    /// `ln` of the truncated value.
    pub log_value: f64,
    /// Truncated value; the true value lies in `[value, value + error_bound]`.
    pub value: f64,
    /// Certified absolute error.
    pub error_bound: f64,
    /// Largest number of states in a generation.
    pub max_states: usize,
}

impl EnumHellinger {
    /// Log-scale enclosure `[ln value, ln(value + error_bound)]`.
    pub fn log_interval(&self) -> (f64, f64) {
        (self.log_value, (self.value + self.error_bound).ln())
    }
}

/// Poisson pmf on `0..=Y`, with `Y` the first point where the upper tail is at most `eps`.
pub fn poisson_row(mu: f64, eps: f64) -> Vec<f64> {
    if mu <= 0.0 {
        return vec![1.0];
    }
    let ln_mu = mu.ln();
    let mut row = Vec::new();
    let mut lp = -mu;
    let mut y = 0u64;
    loop {
        row.push(lp.exp());
        let next = lp + ln_mu - ((y + 1) as f64).ln();
        let ratio = mu / (y + 2) as f64;
        if ratio < 1.0 && next.exp() / (1.0 - ratio) <= eps {
            return row;
        }
        lp = next;
        y += 1;
    }
}

/// Marginal state laws of a process along the truncated path space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLaw {
    /// `levels[k][x]` is the truncated probability of `X_k = x`.
    pub levels: Vec<Vec<f64>>,
    /// Upper bound on the discarded probability.
    pub discarded: f64,
}

/// Which of the two laws to propagate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// The alternative `A`.
    A,
    /// The hypothesis `H`.
    H,
}

/// Forward marginals under one hypothesis up to generation `n`.
pub fn forward_law(params: &ParamSet, hyp: Hypothesis, omega0: u64, n: usize, policy: &TruncationPolicy) -> Result<PathLaw> {
    policy.validate()?;
    let eps = policy.per_step(n);
    let rate = |x: f64| match hyp {
        Hypothesis::A => params.f_a(x),
        Hypothesis::H => params.f_h(x),
    };
    let mut first = vec![0.0; omega0 as usize + 1];
    first[omega0 as usize] = 1.0;
    let mut levels = vec![first];
    for _ in 0..n {
        let prev = levels.last().expect("nonempty");
        let rows: Vec<(usize, Vec<f64>)> = prev
            .par_iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(x, _)| (x, poisson_row(rate(x as f64), eps)))
            .collect();
        let width = rows.iter().map(|(_, r)| r.len()).max().unwrap_or(1);
        if width > policy.max_state {
            return Err(Error::StateBlowup { states: width, cap: policy.max_state });
        }
        let mut next = vec![0.0; width];
        for (x, row) in rows {
            let px = prev[x];
            for (y, &q) in row.iter().enumerate() {
                next[y] += px * q;
            }
        }
        levels.push(next);
    }
    Ok(PathLaw { levels, discarded: eps * n as f64 })
}

/// Backward dynamic program for the Hellinger integral.
pub fn enum_log_hellinger(
    params: &ParamSet,
    lambda: Order,
    omega0: u64,
    n: usize,
    policy: &TruncationPolicy,
) -> Result<EnumHellinger> {
    policy.validate()?;
    if n == 0 {
        return Ok(EnumHellinger { log_value: 0.0, value: 1.0, error_bound: 0.0, max_states: 1 });
    }
    let eps = policy.per_step(n);
    let row_of = |x: u64| -> (f64, Vec<f64>) {
        let xf = x as f64;
        (phi(params, lambda, xf).exp(), poisson_row(varphi(params, lambda, xf), eps))
    };

    // forward pass: largest reachable state per generation
    let mut tops = vec![omega0];
    for k in 1..n {
        let top = tops[k - 1];
        let reach = if k == 1 {
            row_of(omega0).1.len() as u64 - 1
        } else {
            (0..=top).into_par_iter().map(|x| row_of(x).1.len() as u64 - 1).max().unwrap_or(0)
        };
        if reach as usize + 1 > policy.max_state {
            return Err(Error::StateBlowup { states: reach as usize + 1, cap: policy.max_state });
        }
        tops.push(reach);
    }

    // backward pass over generations n-1, …, 1 on the full intervals [0, top]
    let mut values: Vec<f64> = Vec::new();
    let mut max_states = 1;
    for k in (1..n).rev() {
        let top = tops[k];
        max_states = max_states.max(top as usize + 1);
        let next = &values;
        values = (0..=top)
            .into_par_iter()
            .map(|x| {
                let (scale, row) = row_of(x);
                let sum: f64 = row.iter().enumerate().map(|(y, &q)| q * next.get(y).copied().unwrap_or(1.0)).sum();
                scale * sum
            })
            .collect();
    }
    let (scale, row) = row_of(omega0);
    let sum: f64 = row.iter().enumerate().map(|(y, &q)| q * values.get(y).copied().unwrap_or(1.0)).sum();
    let value = scale * sum;
    Ok(EnumHellinger { log_value: value.ln(), value, error_bound: eps * n as f64, max_states })
}

/// Double-loop reference for two generations with a fixed cutoff per generation.
pub fn naive_log_hellinger_two_steps(params: &ParamSet, lambda: Order, omega0: u64, cutoff: u64) -> f64 {
    let l = lambda.get();
    let log_kernel = |x: f64, y: u64| -> f64 {
        let (fa, fh) = (params.f_a(x), params.f_h(x));
        let f_lambda = l * fa + (1.0 - l) * fh;
        if fa <= 0.0 || fh <= 0.0 {
            return if y == 0 { -f_lambda } else { f64::NEG_INFINITY };
        }
        let ln_rate = l * fa.ln() + (1.0 - l) * fh.ln();
        let ln_fact: f64 = (1..=y).map(|i| (i as f64).ln()).sum();
        -f_lambda + y as f64 * ln_rate - ln_fact
    };
    let mut total = 0.0;
    for y1 in 0..=cutoff {
        let k1 = log_kernel(omega0 as f64, y1);
        for y2 in 0..=cutoff {
            total += (k1 + log_kernel(y1 as f64, y2)).exp();
        }
    }
    total.ln()
}

/// One path (or group of paths with identical history) of the truncated path space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathAtom {
    /// Current generation size.
    pub state: u64,
    /// Log likelihood ratio `ln(dP_A/dP_H)` of the path.
    pub log_z: f64,
    /// Probability under `H`.
    pub p_h: f64,
    /// Probability under `A`.
    pub p_a: f64,
}

/// Enumerates all truncated paths of length `n` with their likelihood ratios.
///
/// Returns the atoms and a bound on the discarded mass under each law.
pub fn enumerate_atoms(params: &ParamSet, omega0: u64, n: usize, policy: &TruncationPolicy) -> Result<(Vec<PathAtom>, f64)> {
    policy.validate()?;
    let eps = policy.per_step(n);
    let mut atoms = vec![PathAtom { state: omega0, log_z: 0.0, p_h: 1.0, p_a: 1.0 }];
    for _ in 0..n {
        let expanded: Vec<Vec<PathAtom>> = atoms
            .par_iter()
            .map(|atom| {
                let x = atom.state as f64;
                let (fa, fh) = (params.f_a(x), params.f_h(x));
                if fa <= 0.0 && fh <= 0.0 {
                    return vec![*atom];
                }
                let (row_a, row_h) = (poisson_row(fa, eps), poisson_row(fh, eps));
                let width = row_a.len().max(row_h.len());
                let (pa, ph) = (pmf_table(fa, width), pmf_table(fh, width));
                let (drift, ln_ratio) = (fa - fh, (fa / fh).ln());
                (0..width)
                    .map(|y| PathAtom {
                        state: y as u64,
                        log_z: atom.log_z - drift + y as f64 * ln_ratio,
                        p_h: atom.p_h * ph[y],
                        p_a: atom.p_a * pa[y],
                    })
                    .collect()
            })
            .collect();
        let count: usize = expanded.iter().map(Vec::len).sum();
        if count > policy.max_state {
            return Err(Error::StateBlowup { states: count, cap: policy.max_state });
        }
        atoms = expanded.into_iter().flatten().collect();
    }
    Ok((atoms, eps * n as f64))
}

/// Poisson pmf on `0..width`.
fn pmf_table(mu: f64, width: usize) -> Vec<f64> {
    let ln_mu = mu.ln();
    let mut lp = -mu;
    (0..width)
        .map(|y| {
            if y > 0 {
                lp += ln_mu - (y as f64).ln();
            }
            lp.exp()
        })
        .collect()
}

/// Bayes risk `Σ min(Λ_H p_H, Λ_A p_A)` over the truncated path space.
pub fn enum_bayes_risk(
    params: &ParamSet,
    omega0: u64,
    n: usize,
    cfg: &DecisionConfig,
    policy: &TruncationPolicy,
) -> Result<EnumValue> {
    let (atoms, missing) = enumerate_atoms(params, omega0, n, policy)?;
    let (wa, wh) = (cfg.weight_a(), cfg.weight_h());
    let value = atoms.iter().map(|a| (wh * a.p_h).min(wa * a.p_a)).sum();
    Ok(EnumValue { value, error_bound: (wh * missing).min(wa * missing) })
}

/// Minimal type II error at the given level by likelihood-ratio ordering with randomization.
///
/// The truncated value is an upper end: the true minimal error lies in
/// `[value - error_bound, value]`.
pub fn enum_np_type2(
    params: &ParamSet,
    omega0: u64,
    n: usize,
    level: f64,
    policy: &TruncationPolicy,
) -> Result<EnumValue> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput("level must lie in (0, 1)".into()));
    }
    let (mut atoms, missing) = enumerate_atoms(params, omega0, n, policy)?;
    atoms.sort_by(|a, b| b.log_z.total_cmp(&a.log_z));
    let (mut used, mut power) = (0.0, 0.0);
    let mut i = 0;
    while i < atoms.len() {
        let mut j = i;
        let (mut gh, mut ga) = (0.0, 0.0);
        while j < atoms.len() && atoms[j].log_z == atoms[i].log_z {
            gh += atoms[j].p_h;
            ga += atoms[j].p_a;
            j += 1;
        }
        if used + gh <= level {
            used += gh;
            power += ga;
        } else {
            power += (level - used) / gh * ga;
            break;
        }
        i = j;
    }
    Ok(EnumValue { value: (1.0 - power).clamp(0.0, 1.0), error_bound: missing })
}

/// Relative entropy from the chain rule `Σ_k E_A[g(X_{k-1})]` under the truncated law of `A`.
///
/// `value` is a rigorous lower end; `error_bound` is an estimate of the
/// discarded contribution, not a certificate.
pub fn enum_entropy(params: &ParamSet, omega0: u64, n: usize, policy: &TruncationPolicy) -> Result<EnumValue> {
    let law = forward_law(params, Hypothesis::A, omega0, n, policy)?;
    let eps = policy.per_step(n);
    let (g0, c) = (step_divergence(params, 0.0), slope_coefficient(params));
    let mut value = 0.0;
    let mut estimate = 0.0;
    for (k, level) in law.levels.iter().take(n).enumerate() {
        value += level.iter().enumerate().map(|(x, &p)| p * step_divergence(params, x as f64)).sum::<f64>();
        let top = level.len() as f64;
        estimate += eps * k as f64 * (g0 + c * 2.0 * top);
    }
    Ok(EnumValue { value, error_bound: estimate })
}

/// Monte Carlo estimate of the Hellinger integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    /// Sample mean of `Z_n^λ`.
    pub estimate: f64,
    /// `ln` of the estimate.
    pub log_estimate: f64,
    /// Standard error of the estimate.
    pub std_error: f64,
    /// Number of simulated paths.
    pub reps: usize,
    /// Seed of the generator.
    pub seed: u64,
    /// Generator description.
    pub rng: String,
}

/// `ln Σ exp(v)` with the running maximum factored out.
fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Simulates `reps` paths under `H` and averages `Z_n^λ` in log space.
///
/// Deterministic given `seed` and `reps`.
pub fn mc_log_hellinger(params: &ParamSet, lambda: Order, omega0: u64, n: usize, reps: usize, seed: u64) -> Result<McEstimate> {
    if reps < 2 {
        return Err(Error::InvalidInput("at least two replications are needed".into()));
    }
    let l = lambda.get();
    let blocks = reps.div_ceil(MC_BLOCK);
    let partial: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let size = MC_BLOCK.min(reps - b * MC_BLOCK);
            let mut logs = Vec::with_capacity(size);
            for _ in 0..size {
                let mut x = omega0 as f64;
                let mut log_z = 0.0;
                for _ in 0..n {
                    let (fa, fh) = (params.f_a(x), params.f_h(x));
                    let y = if fh > 0.0 { Poisson::new(fh).expect("positive rate").sample(&mut rng) } else { 0.0 };
                    if fa > 0.0 && fh > 0.0 {
                        log_z += -(fa - fh) + y * (fa / fh).ln();
                    }
                    x = y;
                }
                logs.push(l * log_z);
            }
            (log_sum_exp(logs.iter().copied()), log_sum_exp(logs.iter().map(|v| 2.0 * v)))
        })
        .collect();
    let ln_reps = (reps as f64).ln();
    let log_mean = log_sum_exp(partial.iter().map(|p| p.0)) - ln_reps;
    let log_second = log_sum_exp(partial.iter().map(|p| p.1)) - ln_reps;
    let mean = log_mean.exp();
    let var = (log_second.exp() - mean * mean).max(0.0) * reps as f64 / (reps - 1) as f64;
    Ok(McEstimate {
        estimate: mean,
        log_estimate: log_mean,
        std_error: (var / reps as f64).sqrt(),
        reps,
        seed,
        rng: RNG_ALGORITHM.to_string(),
    })
}
