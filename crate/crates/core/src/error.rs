use nalgebra::DVector;
use thiserror::Error;

use crate::methods::RunTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported problem: {0}")]
    Unsupported(String),

    #[error("inner solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    OracleFailure {
        iterations: usize,
        residual: f64,
        best: DVector<f64>,
    },

    /// A dual method stopped early; the records produced so far are kept.
    #[error("method aborted at iteration {}: {source}", partial.records.len())]
    MethodAborted {
        partial: Box<RunTrace>,
        #[source]
        source: Box<Error>,
    },

    #[error("reference inconsistent: {0}")]
    ReferenceInconsistent(String),

    #[error("reference required")]
    ReferenceRequired,

    #[error("iteration budget of {budget} exhausted (gradient mapping {gradient_mapping:.3e})")]
    BudgetExhausted {
        budget: usize,
        gradient_mapping: f64,
        best: Box<crate::harness::ReferenceSolution>,
    },

    #[error("malformed report {path}: {reason}")]
    MalformedReport { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn check_dim(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}
