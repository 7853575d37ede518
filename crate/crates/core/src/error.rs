use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification of an [`Error`], used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad arguments or configuration.
    Usage,
    /// Input files or data that cannot be used.
    Data,
    /// A broken internal invariant.
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    #[error("line {line}: non-finite value in column {column:?}")]
    NonFinite { line: u64, column: String },

    #[error("input file is empty")]
    EmptyFile,

    #[error("duplicate feature name {0:?}")]
    DuplicateFeature(String),

    #[error("header must end with a column named \"label\"")]
    MissingLabelColumn,

    #[error("missing feature column {0:?}")]
    MissingColumn(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },

    #[error("stratification: {0}")]
    Stratification(String),

    #[error("unsupported schema version {found} (supported: {supported})")]
    SchemaVersion { found: u32, supported: u32 },

    #[error("corrupt file: {0}")]
    Corrupt(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => ErrorCategory::Usage,
            Error::Invariant(_) => ErrorCategory::Internal,
            _ => ErrorCategory::Data,
        }
    }
}
