//! CLI error type with stable exit codes: 2 usage, 3 data, 4 model.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or an unknown model name.
    #[error("{0}")]
    Usage(String),

    /// Unreadable or malformed input data.
    #[error("{0}")]
    Data(String),

    /// A model or interval computation failed.
    #[error("{0}")]
    Model(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
            CliError::Model(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
