use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, KvarError>;

#[derive(Debug, Error)]
pub enum KvarError {
    /// A distribution or routine parameter is outside its domain.
    #[error("invalid parameter `{name}`: {constraint}")]
    InvalidParameter {
        name: &'static str,
        constraint: String,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    /// Two point clouds (or lists) that must agree in size or dimension do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    /// The density vanishes at a quantile level where a reciprocal is needed.
    #[error("density is zero at quantile level p = {p}")]
    Singularity { p: f64 },

    #[error("divergent: {0}")]
    Divergent(String),

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl KvarError {
    pub(crate) fn param(name: &'static str, constraint: impl Into<String>) -> Self {
        KvarError::InvalidParameter {
            name,
            constraint: constraint.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        KvarError::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error originates from reading or writing files, as opposed
    /// to a bad parameter.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            KvarError::Io { .. }
                | KvarError::Csv(_)
                | KvarError::EmptyDataset
                | KvarError::RaggedRow { .. }
                | KvarError::Parse { .. }
        )
    }
}
