//! Crate-wide error type.
//!
//! Errors fall into two broad classes that callers treat differently:
//! invalid input (bad files, malformed configs, out-of-range arguments) and
//! numeric failures (diverging optimizations, degenerate statistics). The
//! CLI maps these onto distinct process exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The caller supplied something malformed: a bad file, an argument out
    /// of its documented range, an inconsistent configuration.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A computation failed numerically: divergence, loss of positive
    /// definiteness, a degenerate statistic that cannot be normalized.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
