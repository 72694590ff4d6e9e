use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid or inconsistent configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("solver {solver}, seed {seed}: {source}")]
    Solver {
        solver: &'static str,
        seed: u64,
        #[source]
        source: composite_sgd::Error,
    },

    #[error(transparent)]
    Core(#[from] composite_sgd::Error),

    #[error("{0}")]
    Io(String),

    /// A bound check ran to completion and at least one solver failed it.
    #[error("bound check failed")]
    VerifyFailed,
}

impl CliError {
    /// 2 for configuration errors, 3 for divergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver { source, .. } | CliError::Core(source) if is_divergence(source) => 3,
            CliError::Core(composite_sgd::Error::Parameter(_)) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{context}: {e}"))
    }
}

fn is_divergence(e: &composite_sgd::Error) -> bool {
    match e {
        composite_sgd::Error::Divergence { .. } => true,
        composite_sgd::Error::AtIteration { source, .. } => is_divergence(source),
        _ => false,
    }
}
