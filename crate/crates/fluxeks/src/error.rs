//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the solver, surrogate, and estimator
/// layers. Variants are grouped by failure category so callers (notably the
/// CLI) can map them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector/matrix/sample dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A value that must be finite was NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A numerical routine broke down (singular system, failed factorization).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Model training could not produce a usable model.
    #[error("training failure: {0}")]
    Training(String),

    /// A model file does not match the data or configuration it is used with.
    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    /// Malformed input file or configuration.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable category name, used by the CLI to pick an exit code.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Dimension(_) => "dimension",
            Error::NonFinite(_) => "non-finite",
            Error::Numerical(_) => "numerical",
            Error::Training(_) => "training",
            Error::ModelMismatch(_) => "model-mismatch",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
