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

    #[error("file {path} has no header row")]
    MissingHeader { path: PathBuf },

    #[error("label column `{column}` not found in header")]
    MissingLabelColumn { column: String },

    #[error("label column `{column}` is not binary: found {found} distinct values")]
    NonBinaryLabel { column: String, found: usize },

    #[error("positive label `{label}` does not occur in column `{column}`")]
    PositiveLabelAbsent { column: String, label: String },

    #[error("row {row}: expected {expected} cells, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("no rows left after dropping {dropped} row(s) with missing cells")]
    NoRows { dropped: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("fold count k={k} out of range: need 2 <= k <= {max}")]
    FoldCount { k: usize, max: usize },

    #[error("mtry={mtry} out of range for p={p}")]
    Mtry { mtry: usize, p: usize },

    #[error("forest/dataset mismatch: {0}")]
    ShapeMismatch(String),

    #[error("AUC undefined: scores cover a single class")]
    SingleClass,

    #[error("no computable importance: all {skipped} trees had single-class out-of-bag samples")]
    NoComputableImportance { skipped: usize },

    #[error("no candidate feature set could be scored")]
    NoScorableCandidate,

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("forest checkpoint: {0}")]
    Checkpoint(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error originates from user-supplied data rather than a
    /// configuration or programming mistake.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Csv(_)
                | Error::MissingHeader { .. }
                | Error::MissingLabelColumn { .. }
                | Error::NonBinaryLabel { .. }
                | Error::PositiveLabelAbsent { .. }
                | Error::RaggedRow { .. }
                | Error::NoRows { .. }
                | Error::InvalidDataset(_)
                | Error::Checkpoint(_)
                | Error::Json(_)
                | Error::SingleClass
                | Error::NoComputableImportance { .. }
                | Error::NoScorableCandidate
        )
    }

    pub fn is_usage_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::FoldCount { .. }
                | Error::Mtry { .. }
                | Error::UnknownName { .. }
                | Error::ConfigParse(_)
        )
    }
}
