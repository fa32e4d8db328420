//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A malformed line in an RCDB document.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A structural violation: mismatched universes, duplicate ids,
    /// unknown test references, invalid weights.
    #[error("{0}")]
    Structural(String),

    /// A model file failed validation on load.
    #[error("model rejected: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }
}
