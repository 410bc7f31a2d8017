use thiserror::Error;

/// Errors raised by the library. Each kind maps to a CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {message}")]
    Numerical {
        message: String,
        /// Best iterate or other data useful for a post-mortem, as JSON.
        diagnostic: Option<serde_json::Value>,
    },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical {
            message: msg.into(),
            diagnostic: None,
        }
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 1,
            Error::Numerical { .. } => 2,
            Error::Invariant(_) => 3,
        }
    }
}
