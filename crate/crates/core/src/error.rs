//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Non-finite or otherwise unusable numeric input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A domain invariant or command/config precondition was violated.
    #[error("validation error: {0}")]
    Validation(String),

    /// Structured-file parse failure, with the JSON path that failed.
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    /// Backend (LLM endpoint or its configuration) unavailable or misbehaving.
    #[error("backend error: {0}")]
    Backend(String),

    /// Stored artifacts disagree with recomputation.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Backend(_) => 2,
            Error::Integrity(_) => 3,
            _ => 1,
        }
    }
}
