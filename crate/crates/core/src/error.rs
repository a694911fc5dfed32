use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library. Infinite energy branches are not errors;
/// they are reported through [`crate::functionals::EnergyReport::finite`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("asymmetric matrix: entry ({i}, {j}) = {a} but ({j}, {i}) = {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },

    #[error("size mismatch: {what} (expected {expected}, got {got})")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("budget exceeded: {what} needs {cost} (limit {limit}); {hint}")]
    Budget {
        what: &'static str,
        cost: String,
        limit: String,
        hint: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: parse error: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
