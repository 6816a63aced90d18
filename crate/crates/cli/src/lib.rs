//! Command-line front end for `gwi-core`.
//!
//! Arguments are parsed into a serializable [`RunRequest`], dispatched by
//! [`run`], and rendered as a JSON report `{request, result}` or as CSV for
//! sweeps. Failures become an [`CliError`] with a stable code and exit status.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use gwi_core::closed_form::{closed_form_log_lower, closed_form_log_upper};
use gwi_core::decision::{
    bayes_risk_bounds, distinguishability, divergence_from_log_hellinger, min_bayes_upper_over_grid,
    min_np_bound_over_grid, np_type2_bound, DecisionConfig,
};
use gwi_core::diffusion::{
    approx_params, horizon, limit_entropy, limit_log_bounds, limit_scalars, min_admissible_m, prelimit_log_bounds,
    scaled_limit_checks, SDEParams,
};
use gwi_core::entropy::entropy_report;
use gwi_core::model::{classify_detailed, Order, ParamSet};
use gwi_core::oracle::{enum_log_hellinger, mc_log_hellinger, TruncationPolicy};
use gwi_core::recursion::log_hellinger_report;
use gwi_core::Error as CoreError;

/// Log values at or below this are reported without a linear counterpart.
const LINEAR_FLOOR: f64 = -700.0;

/// Tolerance used by `classify`.
const CLASSIFY_TOL: f64 = 1e-12;

/// Named parameter quadruples `(β_A, β_H, α_A, α_H)`.
pub const PRESETS: &[(&str, [f64; 4])] = &[
    ("a2-example", [1.8, 0.9, 2.8, 0.7]),
    ("a3-example", [1.8, 0.9, 2.9, 0.7]),
    ("a4-example", [1.8, 0.9, 1.1, 3.0]),
    ("a5-example", [1.8, 0.9, 1.2, 3.0]),
    ("a6-example", [1.0, 1.0, 2.0, 3.0]),
    ("a7-sp2", [0.8, 0.6, 2.0, 2.0]),
    ("a7-sp3a", [0.8, 0.6, 2.0, 1.9]),
    ("a7-sp3b", [0.8, 0.6, 2.0, 1.1]),
    ("a7-sp3c", [1.0, 1.5, 2.0, 1.8]),
    ("ni-small", [0.5, 0.25, 0.0, 0.0]),
    ("sp1-example", [4.0, 2.0, 4.0, 2.0]),
    ("entropy-sp3d", [1.0 / 3.0, 2.0 / 3.0, 2.0, 1.0]),
];

/// Looks up a preset by name.
pub fn preset(name: &str) -> Option<[f64; 4]> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
}

/// A failure with a machine-readable code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{code}: {message}")]
pub struct CliError {
    /// Stable identifier.
    pub code: String,
    /// Human-readable detail.
    pub message: String,
    /// Process exit status.
    pub exit_code: i32,
}

impl CliError {
    /// Malformed or incomplete arguments.
    pub fn parse(message: impl Into<String>) -> Self {
        Self { code: "parse".into(), message: message.into(), exit_code: 2 }
    }

    /// JSON object written to standard output on failure.
    pub fn to_json(&self) -> Value {
        json!({ "error": self })
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let (code, exit_code) = match e {
            CoreError::CaseMismatch { .. } => ("case_mismatch", 3),
            CoreError::InadmissibleStep { .. } => ("inadmissible_m", 4),
            CoreError::StateBlowup { .. } => ("state_blowup", 5),
            CoreError::InvalidParams(_) | CoreError::InvalidOrder(_) | CoreError::InvalidInput(_) => ("invalid_params", 6),
            _ => ("internal", 1),
        };
        Self { code: code.into(), message: e.to_string(), exit_code }
    }
}

/// Output encoding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// A single JSON report.
    #[default]
    Json,
    /// CSV with one header row (sweeps only).
    Csv,
}

/// The quantity varied by `sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Order of the Hellinger integral.
    Lambda,
    /// Number of generations.
    N,
    /// Time of the diffusion limit.
    T,
    /// Approximation step of the diffusion limit.
    M,
}

/// Spacing of sweep grid points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Evenly spaced.
    #[default]
    Linear,
    /// Evenly spaced in the logarithm.
    Log,
}

/// Sub-command names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    /// Case classification.
    Classify,
    /// Hellinger integral.
    Hellinger,
    /// Power and Renyi divergences.
    Divergence,
    /// Relative entropy.
    Entropy,
    /// Diffusion limit.
    Diffusion,
    /// Bayes risk bounds.
    Bayes,
    /// Neyman-Pearson bound.
    Nptest,
    /// Oracle comparison.
    Verify,
    /// Monte Carlo estimate.
    Simulate,
    /// Grid evaluation.
    Sweep,
}

/// Offspring and immigration means under both hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamInput {
    /// Offspring mean under A.
    pub beta_a: f64,
    /// Offspring mean under H.
    pub beta_h: f64,
    /// Immigration mean under A.
    pub alpha_a: f64,
    /// Immigration mean under H.
    pub alpha_h: f64,
}

impl ParamInput {
    fn build(&self) -> Result<ParamSet, CliError> {
        Ok(ParamSet::new(self.beta_a, self.beta_h, self.alpha_a, self.alpha_h)?)
    }
}

/// Grid of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Varied quantity.
    pub axis: Axis,
    /// First grid point.
    pub from: f64,
    /// Last grid point.
    pub to: f64,
    /// Number of grid points.
    pub steps: usize,
    /// Spacing of the points.
    pub scale: Scale,
}

impl SweepSpec {
    /// The grid points, rounded to integers on the `n` and `m` axes.
    pub fn points(&self) -> Vec<f64> {
        let k = self.steps.max(1);
        let mut pts: Vec<f64> = (0..k)
            .map(|i| {
                let s = if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
                match self.scale {
                    Scale::Linear => self.from + s * (self.to - self.from),
                    Scale::Log => (self.from.ln() + s * (self.to.ln() - self.from.ln())).exp(),
                }
            })
            .collect();
        if matches!(self.axis, Axis::N | Axis::M) {
            pts.iter_mut().for_each(|v| *v = v.round());
            pts.dedup();
        }
        pts
    }
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    /// Sub-command.
    pub command: CommandKind,
    /// Preset the parameters came from, if any.
    #[serde(default)]
    pub preset: Option<String>,
    /// Parameter quadruple.
    #[serde(default)]
    pub params: Option<ParamInput>,
    /// Order.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Initial population.
    #[serde(default)]
    pub omega0: Option<u64>,
    /// Number of generations.
    #[serde(default)]
    pub n: Option<usize>,
    /// Diffusion parameters.
    #[serde(default)]
    pub sde: Option<SDEParams>,
    /// Diffusion time.
    #[serde(default)]
    pub t: Option<f64>,
    /// Approximation step.
    #[serde(default)]
    pub m: Option<u64>,
    /// Losses, prior and level.
    #[serde(default)]
    pub decision: Option<DecisionConfig>,
    /// Also optimize over the order grid.
    #[serde(default)]
    pub optimize_lambda: bool,
    /// Enumeration tail budget.
    #[serde(default)]
    pub tail_budget: Option<f64>,
    /// Monte Carlo replications.
    #[serde(default)]
    pub reps: Option<usize>,
    /// Monte Carlo seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Sweep grid.
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    /// Output encoding.
    #[serde(default)]
    pub format: Format,
}

/// A JSON report; re-parses into the request that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// The resolved request.
    pub request: RunRequest,
    /// Command-specific result.
    pub result: Value,
}

/// Rendered output of a successful run.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    /// Pretty-printed JSON report.
    Json(String),
    /// CSV text.
    Csv(String),
}

impl Output {
    /// The text written to standard output.
    pub fn text(&self) -> &str {
        match self {
            Output::Json(s) | Output::Csv(s) => s,
        }
    }
}

/// Top-level arguments.
#[derive(Debug, Parser)]
#[command(name = "gwi", version, about = "Hellinger integrals, divergences and decision bounds for Poisson branching processes with immigration")]
pub struct Cli {
    /// Sub-command to run.
    #[command(subcommand)]
    pub command: Command,
}

/// Parameter flags shared by most sub-commands.
#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Named parameter set; explicit flags override its entries.
    #[arg(long)]
    pub preset: Option<String>,
    /// Offspring mean under A.
    #[arg(long, allow_negative_numbers = true)]
    pub beta_a: Option<f64>,
    /// Offspring mean under H.
    #[arg(long, allow_negative_numbers = true)]
    pub beta_h: Option<f64>,
    /// Immigration mean under A.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_a: Option<f64>,
    /// Immigration mean under H.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_h: Option<f64>,
}

/// Order, initial population and horizon.
#[derive(Debug, Clone, Args)]
pub struct HorizonArgs {
    /// Order in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Initial population.
    #[arg(long, default_value_t = 1)]
    pub omega0: u64,
    /// Number of generations.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
}

/// Diffusion parameters.
#[derive(Debug, Clone, Args)]
pub struct SdeArgs {
    /// Immigration drift.
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    /// Mean-reversion rate under A.
    #[arg(long)]
    pub kappa_a: Option<f64>,
    /// Mean-reversion rate under H.
    #[arg(long)]
    pub kappa_h: Option<f64>,
    /// Volatility.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Scaled initial value.
    #[arg(long, default_value_t = 1.0)]
    pub x0: f64,
}

/// Losses and prior of the Bayes problem.
#[derive(Debug, Clone, Args)]
pub struct LossArgs {
    /// Loss for wrongly rejecting H.
    #[arg(long, default_value_t = 1.0)]
    pub loss_a: f64,
    /// Loss for wrongly accepting H.
    #[arg(long, default_value_t = 1.0)]
    pub loss_h: f64,
    /// Prior probability of H.
    #[arg(long, default_value_t = 0.5)]
    pub prior_h: f64,
}

/// Sub-commands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Case of the parameter set.
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
    },
    /// Hellinger integral: exact value or bounds.
    Hellinger {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        horizon: HorizonArgs,
    },
    /// Power and Renyi divergences with contiguity verdicts.
    Divergence {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        horizon: HorizonArgs,
    },
    /// Relative entropy: exact value or bounds.
    Entropy {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1)]
        omega0: u64,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Diffusion-limit bounds, optionally with a prelimit step.
    Diffusion {
        #[command(flatten)]
        sde: SdeArgs,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Approximation step for the prelimit comparison.
        #[arg(long)]
        m: Option<u64>,
    },
    /// Bayes risk bounds.
    Bayes {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[command(flatten)]
        loss: LossArgs,
        /// Also minimize the upper bound over a grid of orders.
        #[arg(long)]
        optimize_lambda: bool,
    },
    /// Neyman-Pearson type II error bound.
    Nptest {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        horizon: HorizonArgs,
        /// Type I error level.
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        /// Also minimize the bound over a grid of orders.
        #[arg(long)]
        optimize_lambda: bool,
    },
    /// Compare against the path-enumeration oracle.
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[arg(long, default_value_t = 1e-9)]
        tail_budget: f64,
    },
    /// Monte Carlo estimate of the Hellinger integral.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate over a grid of one axis.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Scale::Linear)]
        scale: Scale,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[command(flatten)]
        sde: SdeArgs,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn resolve_params(a: &ParamArgs) -> Result<ParamInput, CliError> {
    let base = match &a.preset {
        Some(name) => Some(preset(name).ok_or_else(|| CliError::parse(format!("unknown preset '{name}'")))?),
        None => None,
    };
    let pick = |flag: Option<f64>, idx: usize, name: &str| {
        flag.or(base.map(|b| b[idx])).ok_or_else(|| CliError::parse(format!("missing --{name} (or --preset)")))
    };
    Ok(ParamInput {
        beta_a: pick(a.beta_a, 0, "beta-a")?,
        beta_h: pick(a.beta_h, 1, "beta-h")?,
        alpha_a: pick(a.alpha_a, 2, "alpha-a")?,
        alpha_h: pick(a.alpha_h, 3, "alpha-h")?,
    })
}

fn resolve_sde(a: &SdeArgs) -> Result<SDEParams, CliError> {
    let ka = a.kappa_a.ok_or_else(|| CliError::parse("missing --kappa-a"))?;
    let kh = a.kappa_h.ok_or_else(|| CliError::parse("missing --kappa-h"))?;
    Ok(SDEParams::new(a.eta, ka, kh, a.sigma, a.x0)?)
}

fn empty_request(command: CommandKind) -> RunRequest {
    RunRequest {
        command,
        preset: None,
        params: None,
        lambda: None,
        omega0: None,
        n: None,
        sde: None,
        t: None,
        m: None,
        decision: None,
        optimize_lambda: false,
        tail_budget: None,
        reps: None,
        seed: None,
        sweep: None,
        format: Format::Json,
    }
}

fn with_params(command: CommandKind, p: &ParamArgs) -> Result<RunRequest, CliError> {
    Ok(RunRequest { preset: p.preset.clone(), params: Some(resolve_params(p)?), ..empty_request(command) })
}

fn with_horizon(mut r: RunRequest, h: &HorizonArgs) -> RunRequest {
    r.lambda = Some(h.lambda);
    r.omega0 = Some(h.omega0);
    r.n = Some(h.n);
    r
}

impl Command {
    /// Resolves presets and defaults into a request.
    pub fn into_request(self) -> Result<RunRequest, CliError> {
        use CommandKind as K;
        Ok(match self {
            Command::Classify { params, lambda } => RunRequest { lambda: Some(lambda), ..with_params(K::Classify, &params)? },
            Command::Hellinger { params, horizon } => with_horizon(with_params(K::Hellinger, &params)?, &horizon),
            Command::Divergence { params, horizon } => with_horizon(with_params(K::Divergence, &params)?, &horizon),
            Command::Entropy { params, omega0, n } => {
                RunRequest { omega0: Some(omega0), n: Some(n), ..with_params(K::Entropy, &params)? }
            }
            Command::Diffusion { sde, lambda, t, m } => RunRequest {
                sde: Some(resolve_sde(&sde)?),
                lambda: Some(lambda),
                t: Some(t),
                m,
                ..empty_request(K::Diffusion)
            },
            Command::Bayes { params, horizon, loss, optimize_lambda } => RunRequest {
                decision: Some(DecisionConfig::new(loss.loss_a, loss.loss_h, loss.prior_h, 0.05)?),
                optimize_lambda,
                ..with_horizon(with_params(K::Bayes, &params)?, &horizon)
            },
            Command::Nptest { params, horizon, level, optimize_lambda } => RunRequest {
                decision: Some(DecisionConfig::new(1.0, 1.0, 0.5, level)?),
                optimize_lambda,
                ..with_horizon(with_params(K::Nptest, &params)?, &horizon)
            },
            Command::Verify { params, horizon, tail_budget } => RunRequest {
                tail_budget: Some(tail_budget),
                ..with_horizon(with_params(K::Verify, &params)?, &horizon)
            },
            Command::Simulate { params, horizon, reps, seed } => RunRequest {
                reps: Some(reps),
                seed: Some(seed),
                ..with_horizon(with_params(K::Simulate, &params)?, &horizon)
            },
            Command::Sweep { axis, from, to, steps, scale, params, horizon, sde, t, format } => {
                let sweep = Some(SweepSpec { axis, from, to, steps, scale });
                let base = match axis {
                    Axis::Lambda | Axis::N => with_horizon(with_params(K::Sweep, &params)?, &horizon),
                    Axis::T | Axis::M => RunRequest {
                        sde: Some(resolve_sde(&sde)?),
                        lambda: Some(horizon.lambda),
                        t: Some(t),
                        ..empty_request(K::Sweep)
                    },
                };
                RunRequest { sweep, format, ..base }
            }
        })
    }
}

/// `e^log` if representable, otherwise `None`.
pub fn linear(log: f64) -> Option<f64> {
    (log > LINEAR_FLOOR).then(|| log.exp())
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::parse(format!("request is missing '{name}'")))
}

struct Ctx {
    params: ParamSet,
    lambda: Order,
    omega0: u64,
    n: usize,
}

fn ctx(r: &RunRequest) -> Result<Ctx, CliError> {
    Ok(Ctx {
        params: need(r.params, "params")?.build()?,
        lambda: Order::new(r.lambda.unwrap_or(0.5))?,
        omega0: r.omega0.unwrap_or(1),
        n: r.n.unwrap_or(1),
    })
}

fn classify_result(r: &RunRequest) -> Result<Value, CliError> {
    let p = need(r.params, "params")?.build()?;
    let c = classify_detailed(&p, Order::new(r.lambda.unwrap_or(0.5))?, CLASSIFY_TOL);
    let x_star = c.x_star.map(|x| if x.fract() == 0.0 && x.abs() < 1e15 { json!(x as i64) } else { json!(x) });
    Ok(json!({
        "case": c.case.to_string(),
        "x_star": x_star,
        "phi_prime_at_zero": c.phi_prime_at_zero,
        "decided_by_tolerance": c.decided_by_tolerance,
    }))
}

fn hellinger_value(c: &Ctx) -> Result<Value, CliError> {
    let r = log_hellinger_report(&c.params, c.lambda, c.omega0, c.n)?;
    let cl = closed_form_log_lower(&c.params, c.lambda, c.omega0, c.n)?;
    let cg = closed_form_log_upper(&c.params, c.lambda, c.omega0, c.n).ok();
    Ok(json!({
        "case": r.case.to_string(),
        "method": r.method,
        "log_exact": r.log_exact,
        "log_lower": r.log_lower,
        "log_upper": r.log_upper,
        "log_upper_case": r.log_upper_case,
        "log_closed_form_lower": cl,
        "log_closed_form_upper": cg,
        "exact": r.log_exact.and_then(linear),
        "lower": linear(r.log_lower),
        "upper": linear(r.log_upper),
        "upper_components": r.components,
    }))
}

fn divergence_value(c: &Ctx) -> Result<Value, CliError> {
    let r = log_hellinger_report(&c.params, c.lambda, c.omega0, c.n)?;
    // an upper bound on the integral gives a lower bound on the divergence
    let lower = divergence_from_log_hellinger(r.log_upper, c.lambda);
    let upper = divergence_from_log_hellinger(r.log_lower, c.lambda);
    let exact = r.log_exact.map(|v| divergence_from_log_hellinger(v, c.lambda));
    Ok(json!({
        "case": r.case.to_string(),
        "exact": exact,
        "lower": lower,
        "upper": upper,
        "distinguishability": distinguishability(&c.params),
    }))
}

fn entropy_value(r: &RunRequest) -> Result<Value, CliError> {
    let p = need(r.params, "params")?.build()?;
    let e = entropy_report(&p, r.omega0.unwrap_or(1), r.n.unwrap_or(1))?;
    Ok(serde_json::to_value(e).expect("report serializes"))
}

fn diffusion_value(r: &RunRequest) -> Result<Value, CliError> {
    let sde = need(r.sde, "sde")?;
    let lambda = Order::new(r.lambda.unwrap_or(0.5))?;
    let t = r.t.unwrap_or(1.0);
    let (dl, du) = limit_log_bounds(&sde, lambda, t)?;
    let mut out = json!({
        "scalars": limit_scalars(&sde, lambda),
        "min_admissible_m": min_admissible_m(&sde),
        "log_limit_lower": dl,
        "log_limit_upper": du,
        "limit_lower": linear(dl),
        "limit_upper": linear(du),
        "limit_entropy": limit_entropy(&sde, t)?,
    });
    if let Some(m) = r.m {
        let x0 = (m as f64 * sde.x0_tilde).round() as u64;
        let (pl, pu) = prelimit_log_bounds(&sde, lambda, t, m, x0)?;
        out["prelimit"] = json!({
            "m": m,
            "params": approx_params(&sde, m)?,
            "n": horizon(&sde, m, t),
            "omega0": x0,
            "log_lower": pl,
            "log_upper": pu,
            "checks": scaled_limit_checks(&sde, lambda, t, m)?,
        });
    }
    Ok(out)
}

fn bayes_value(r: &RunRequest, c: &Ctx) -> Result<Value, CliError> {
    let cfg = r.decision.unwrap_or_default();
    let b = bayes_risk_bounds(&c.params, c.lambda, c.omega0, c.n, &cfg)?;
    let mut out = serde_json::to_value(&b).expect("bounds serialize");
    if r.optimize_lambda {
        let (l, v) = min_bayes_upper_over_grid(&c.params, c.omega0, c.n, &cfg)?;
        out["grid_min_upper"] = json!({ "lambda": l.get(), "upper": v });
    }
    Ok(out)
}

fn np_value(r: &RunRequest, c: &Ctx) -> Result<Value, CliError> {
    let cfg = r.decision.unwrap_or_default();
    let b = np_type2_bound(&c.params, c.lambda, c.omega0, c.n, &cfg)?;
    let mut out = json!({ "level": cfg.level, "type2_upper_bound": b });
    if r.optimize_lambda {
        let (l, v) = min_np_bound_over_grid(&c.params, c.omega0, c.n, &cfg)?;
        out["grid_min_bound"] = json!({ "lambda": l.get(), "bound": v });
    }
    Ok(out)
}

fn verify_value(r: &RunRequest, c: &Ctx) -> Result<Value, CliError> {
    let policy = TruncationPolicy { tail_budget: r.tail_budget.unwrap_or(1e-9), ..TruncationPolicy::default() };
    let e = enum_log_hellinger(&c.params, c.lambda, c.omega0, c.n, &policy)?;
    let rep = log_hellinger_report(&c.params, c.lambda, c.omega0, c.n)?;
    let slack = 1e-12 * e.value.max(1e-300);
    let (pass, deviation) = match rep.log_exact {
        Some(v) => {
            let d = (v.exp() - e.value).abs();
            (d <= e.error_bound + slack, Some(d))
        }
        None => (rep.log_lower.exp() <= e.value + e.error_bound + slack && e.value <= rep.log_upper.exp() + slack, None),
    };
    Ok(json!({
        "case": rep.case.to_string(),
        "enumerated": e,
        "log_exact": rep.log_exact,
        "log_lower": rep.log_lower,
        "log_upper": rep.log_upper,
        "abs_deviation": deviation,
        "status": if pass { "PASS" } else { "FAIL" },
    }))
}

fn simulate_value(r: &RunRequest, c: &Ctx) -> Result<Value, CliError> {
    let mc = mc_log_hellinger(&c.params, c.lambda, c.omega0, c.n, r.reps.unwrap_or(100_000), r.seed.unwrap_or(0))?;
    let rep = log_hellinger_report(&c.params, c.lambda, c.omega0, c.n)?;
    Ok(json!({
        "case": rep.case.to_string(),
        "monte_carlo": mc,
        "log_exact": rep.log_exact,
        "log_lower": rep.log_lower,
        "log_upper": rep.log_upper,
    }))
}

/// Header and rows of a sweep.
fn sweep_rows(r: &RunRequest) -> Result<(Vec<&'static str>, Vec<Vec<Option<f64>>>), CliError> {
    let spec = need(r.sweep, "sweep")?;
    let pts = spec.points();
    match spec.axis {
        Axis::Lambda | Axis::N => {
            let base = ctx(r)?;
            let header = vec!["value", "log_exact", "log_lower", "log_upper", "log_closed_form_lower", "log_closed_form_upper"];
            let mut rows = Vec::with_capacity(pts.len());
            for v in pts {
                let (lambda, n) = match spec.axis {
                    Axis::Lambda => (Order::new(v)?, base.n),
                    _ => (base.lambda, v as usize),
                };
                let rep = log_hellinger_report(&base.params, lambda, base.omega0, n)?;
                rows.push(vec![
                    Some(v),
                    rep.log_exact,
                    Some(rep.log_lower),
                    Some(rep.log_upper),
                    Some(closed_form_log_lower(&base.params, lambda, base.omega0, n)?),
                    closed_form_log_upper(&base.params, lambda, base.omega0, n).ok(),
                ]);
            }
            Ok((header, rows))
        }
        Axis::T => {
            let sde = need(r.sde, "sde")?;
            let lambda = Order::new(r.lambda.unwrap_or(0.5))?;
            let header = vec!["value", "log_limit_lower", "log_limit_upper", "limit_entropy"];
            let mut rows = Vec::with_capacity(pts.len());
            for t in pts {
                let (dl, du) = limit_log_bounds(&sde, lambda, t)?;
                rows.push(vec![Some(t), Some(dl), Some(du), Some(limit_entropy(&sde, t)?)]);
            }
            Ok((header, rows))
        }
        Axis::M => {
            let sde = need(r.sde, "sde")?;
            let lambda = Order::new(r.lambda.unwrap_or(0.5))?;
            let t = r.t.unwrap_or(1.0);
            let (dl, du) = limit_log_bounds(&sde, lambda, t)?;
            let header = vec!["value", "n", "log_prelimit_lower", "log_prelimit_upper", "log_limit_lower", "log_limit_upper"];
            let mut rows = Vec::with_capacity(pts.len());
            for m in pts {
                let m = m as u64;
                let x0 = (m as f64 * sde.x0_tilde).round() as u64;
                let (pl, pu) = prelimit_log_bounds(&sde, lambda, t, m, x0)?;
                rows.push(vec![Some(m as f64), Some(horizon(&sde, m, t) as f64), Some(pl), Some(pu), Some(dl), Some(du)]);
            }
            Ok((header, rows))
        }
    }
}

/// Shortest representation that round-trips (at most 17 significant digits).
fn csv_number(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn render_csv(header: &[&str], rows: &[Vec<Option<f64>>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| CliError { code: "internal".into(), message: e.to_string(), exit_code: 1 };
    w.write_record(header).map_err(internal)?;
    for row in rows {
        w.write_record(row.iter().map(|v| csv_number(*v))).map_err(internal)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError { code: "internal".into(), message: e.to_string(), exit_code: 1 })?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Runs a request and renders its output.
pub fn run(r: &RunRequest) -> Result<Output, CliError> {
    use CommandKind as K;
    if r.format == Format::Csv && r.command != K::Sweep {
        return Err(CliError::parse("CSV output is only available for sweep"));
    }
    let result = match r.command {
        K::Classify => classify_result(r)?,
        K::Hellinger => hellinger_value(&ctx(r)?)?,
        K::Divergence => divergence_value(&ctx(r)?)?,
        K::Entropy => entropy_value(r)?,
        K::Diffusion => diffusion_value(r)?,
        K::Bayes => bayes_value(r, &ctx(r)?)?,
        K::Nptest => np_value(r, &ctx(r)?)?,
        K::Verify => verify_value(r, &ctx(r)?)?,
        K::Simulate => simulate_value(r, &ctx(r)?)?,
        K::Sweep => {
            let (header, rows) = sweep_rows(r)?;
            if r.format == Format::Csv {
                return Ok(Output::Csv(render_csv(&header, &rows)?));
            }
            let rows: Vec<Value> = rows
                .iter()
                .map(|row| Value::Object(header.iter().zip(row).map(|(h, v)| (h.to_string(), json!(v))).collect()))
                .collect();
            json!({ "axis": need(r.sweep, "sweep")?.axis, "rows": rows })
        }
    };
    let report = Report { request: r.clone(), result };
    Ok(Output::Json(serde_json::to_string_pretty(&report).expect("report serializes")))
}

/// Parses arguments, runs, and returns the text to print with the exit status.
pub fn main_with_args<I, T>(args: I) -> (String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return (e.to_string(), 0);
            }
            let err = CliError::parse(e.to_string().trim().to_string());
            return (serde_json::to_string_pretty(&err.to_json()).expect("error serializes"), err.exit_code);
        }
    };
    match cli.command.into_request().and_then(|r| run(&r)) {
        Ok(out) => (out.text().to_string(), 0),
        Err(err) => (serde_json::to_string_pretty(&err.to_json()).expect("error serializes"), err.exit_code),
    }
}
