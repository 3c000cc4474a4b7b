use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller violated a precondition (length mismatch, bad index, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("QBER estimate {q_est} too high for the code pool")]
    QberTooHigh { q_est: f64 },

    #[error("sub-block exhausted: {eligible} eligible positions, {needed} needed")]
    SubBlockExhausted { eligible: usize, needed: usize },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("wire decode error: {0}")]
    Wire(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
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
