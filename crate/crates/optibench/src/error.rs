//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty parameter vector")]
    EmptyVector,

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperParams(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error(
        "non-finite {quantity} at step {step} (theta norm {theta_norm:e}, grad norm {grad_norm:e})"
    )]
    NonFinite {
        quantity: &'static str,
        step: u64,
        theta_norm: f64,
        grad_norm: f64,
    },

    #[error("nothing to report: no run records")]
    EmptyReport,

    #[error("failed to parse {what}: {detail}")]
    Parse { what: String, detail: String },

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
