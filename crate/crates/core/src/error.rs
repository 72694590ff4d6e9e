use thiserror::Error;

use crate::vector::DenseVector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    /// An iterative routine hit its iteration cap. `last` holds the final
    /// iterate so callers can inspect how far it got.
    #[error("{routine} did not converge after {iterations} iterations")]
    Convergence {
        routine: &'static str,
        iterations: usize,
        last: DenseVector,
    },

    #[error("power iteration did not converge after {iterations} iterations (last estimate {estimate})")]
    PowerIteration { iterations: usize, estimate: f64 },

    #[error("iterate diverged at iteration {iteration} (|coordinate| > {threshold:e})")]
    Divergence { iteration: usize, threshold: f64 },

    #[error("at iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
