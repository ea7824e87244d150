use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("stage {stage} infeasible (recourse assumption violated)")]
    Infeasible { stage: usize },
    #[error("stage {stage} unbounded (instance is missing a bound)")]
    Unbounded { stage: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("regression error: {0}")]
    Regression(String),
    #[error("schema error in {path}: {msg}")]
    Schema { path: PathBuf, msg: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 configuration, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Regression(_) | Error::Dimension(_) => 2,
            Error::Infeasible { .. } | Error::Unbounded { .. } => 3,
            Error::Schema { .. } | Error::Io { .. } | Error::Json(_) | Error::Csv(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
