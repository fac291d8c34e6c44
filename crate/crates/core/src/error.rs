use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A covariance or other model parameter is unusable.
    #[error("model error: {0}")]
    Model(String),

    /// A class id or probability vector outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Association, landmark set and dataset disagree.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("{}:{line}: {message}", path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<input>".into()))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    /// Input parsed but violates a dataset invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for this error class: 2 for solver failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Solver(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
