use thiserror::Error;

use crate::record::SolverResult;
use crate::Vector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An option or constructor argument failed validation.
    #[error("invalid configuration for `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid label {value} at sample {index}: {reason}")]
    Label {
        index: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("step size schedule divides by zero (decay-3 with step_lambda = 0 at k = 0)")]
    DivisionByZero,

    #[error("step size schedule returned a non-positive or non-finite value {0}")]
    InvalidStep(f64),

    /// The objective became non-finite. The partial run is preserved.
    #[error("{solver} diverged at epoch {epoch}: cost is not finite")]
    Diverged {
        solver: String,
        epoch: usize,
        partial: Box<SolverResult>,
    },

    #[error("line search failed after {trials} trials at iteration {iter}")]
    Stagnation { iter: usize, trials: usize, w: Vector },

    #[error("matrix is numerically singular: {0}")]
    Singular(String),

    #[error("optimization failed: {0}")]
    Optimization(String),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }
}
