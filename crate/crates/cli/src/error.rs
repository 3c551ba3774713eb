use std::io;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("{path}: {source}")]
    Input {
        path: String,
        source: sparsify_core::Error,
    },

    #[error(transparent)]
    Core(#[from] sparsify_core::Error),

    #[error("{0}")]
    Precondition(String),

    #[error("report check failed: {0}")]
    Check(String),
}

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

impl CliError {
    /// 2 for unreadable or malformed input, 3 for precondition violations,
    /// 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Input { .. } => EXIT_PARSE,
            CliError::Core(sparsify_core::Error::Parse { .. }) => EXIT_PARSE,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(_) | CliError::Precondition(_) => EXIT_PRECONDITION,
            CliError::Check(_) => EXIT_NUMERICAL,
        }
    }
}
