//! Error type shared by all modules.

use thiserror::Error;

use crate::model::CaseTag;

/// Errors raised by parameter validation and by the divergence computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The parameter quadruple violates the model constraints.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The order is not in the open unit interval.
    #[error("invalid order {0}: must lie strictly between 0 and 1")]
    InvalidOrder(f64),

    /// A scalar input is outside its admissible range.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The operation does not apply to the parameter constellation.
    #[error("{operation} is not available for case {case}: {hint}")]
    CaseMismatch {
        /// Name of the operation that refused.
        operation: &'static str,
        /// Case of the supplied parameters.
        case: CaseTag,
        /// Pointer to the operation that should be used instead.
        hint: &'static str,
    },

    /// The fixed-point equation has no negative root for the given slope.
    #[error("fixed point: {0}")]
    FixedPoint(String),

    /// The diffusion approximation step is too coarse.
    #[error("step m={m} is inadmissible; the smallest admissible step is {min_m}")]
    InadmissibleStep {
        /// Requested step.
        m: u64,
        /// Smallest admissible step.
        min_m: u64,
    },

    /// The enumeration oracle would exceed its state cap.
    #[error("state space too large ({states} states > cap {cap}); reduce n or loosen the tail budget")]
    StateBlowup {
        /// States required.
        states: usize,
        /// Configured cap.
        cap: usize,
    },
}

/// Result alias for this crate.
pub type Result<T> = std::result::Result<T, Error>;
