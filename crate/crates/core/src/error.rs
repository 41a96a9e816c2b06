use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("cannot parse {value:?} at row {row}, column {column:?} as {expected}")]
    Parse {
        row: usize,
        column: String,
        value: String,
        expected: &'static str,
    },

    #[error("dataset has zero rows")]
    EmptyDataset,

    #[error("empty result: {0}")]
    EmptyResult(String),

    #[error("column {column:?}: {reason}")]
    InvalidColumn { column: String, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("ground-truth mean of column {0:?} is zero; numerical accuracy is undefined")]
    ZeroGroundTruthMean(String),

    #[error("target is not a classified (categorical) column")]
    NotClassified,

    #[error("infeasible plan: {0}")]
    Infeasible(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn column(column: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidColumn {
            column: column.into(),
            reason: reason.into(),
        }
    }

    /// Errors caused by input data or configuration rather than by a bug.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Internal(_))
    }
}
