//! Power divergences between two Poisson branching processes with immigration.
//!
//! The two hypotheses `A` and `H` are Galton-Watson processes with Poisson
//! offspring and Poisson immigration. This crate computes Hellinger integrals
//! of order `λ`, their exact values where they exist, recursive and
//! closed-form bounds otherwise, relative entropies, diffusion limits and the
//! resulting bounds on Bayes risk and Neyman-Pearson type II error. An
//! enumeration and Monte Carlo oracle is included for cross-checking.

pub mod closed_form;
pub mod decision;
pub mod diffusion;
pub mod entropy;
pub mod error;
pub mod fixed_point;
pub mod model;
pub mod oracle;
pub mod recursion;

pub use closed_form::{
    closed_form_log_lower, closed_form_log_upper, closed_form_lower, closed_form_upper, linearized_sequences, ClosedFormOptions,
    ClosedFormReport, ClosedFormTerms, LinearizedSequences,
};
pub use error::{Error, Result};
pub use fixed_point::{solve_fixed_point, FixedPointResult};
pub use model::{classify, classify_detailed, CaseTag, Classification, LambdaWeights, Order, ParamSet};
pub use recursion::{
    exact_log_hellinger, log_hellinger_report, recursive_log_bounds, select_coeffs, CoefficientPair,
    LogBoundReport, Role,
};
pub use diffusion::{
    approx_params, limit_entropy, limit_log_bounds, prelimit_log_bounds, LimitScalars, SDEParams,
};
pub use entropy::{entropy_lower, entropy_report, entropy_upper, exact_entropy, EntropyReport};
pub use decision::{
    bayes_risk_bounds, distinguishability, divergence_from_log_hellinger, np_type2_bound, BayesBounds,
    DecisionConfig, DistinguishabilityVerdict, Divergences,
};
pub use oracle::{
    enum_bayes_risk, enum_entropy, enum_log_hellinger, enum_np_type2, mc_log_hellinger, EnumHellinger, EnumValue,
    McEstimate, TruncationPolicy,
};
