use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong while encoding a series.
#[derive(Debug, Error)]
pub enum MtfError {
    #[error("series has {len} observations; at least 2 are required")]
    SeriesTooShort { len: usize },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid bin count {bins} for a series of length {len} (need 2 <= Q <= T)")]
    InvalidBinCount { bins: usize, len: usize },

    #[error("invalid index range {start}..{end} for a series of length {len}")]
    InvalidRange {
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("state {state} has no outgoing transitions and fallback policy is 'error'")]
    UnsampledState { state: usize },

    #[error("global fallback requested but no global matrix was supplied")]
    MissingGlobalMatrix,

    #[error("series length {len} is not divisible by chunk count {chunks}")]
    NotDivisible { len: usize, chunks: usize },

    #[error("chunk count {chunks} is out of range for length {len} (need 1 <= K <= T/2)")]
    ChunkTooSmall { len: usize, chunks: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("pool size {size} out of range for image side {side}")]
    PoolSize { size: usize, side: usize },

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Column { path: PathBuf, message: String },

    #[error("malformed npy data: {0}")]
    Npy(String),
}

/// Coarse classification used for CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// A parameter or flag combination that can never work.
    Usage,
    /// The input data (or its file) is at fault.
    Data,
}

impl MtfError {
    /// Stable machine-readable code, shared with foreign bindings.
    pub fn code(&self) -> &'static str {
        match self {
            MtfError::SeriesTooShort { .. } | MtfError::NonFinite { .. } => "invalid-input",
            MtfError::InvalidBinCount { .. } => "invalid-bin-count",
            MtfError::InvalidRange { .. } => "invalid-range",
            MtfError::UnsampledState { .. } => "unsampled-state",
            MtfError::MissingGlobalMatrix => "missing-global-matrix",
            MtfError::NotDivisible { .. } => "not-divisible",
            MtfError::ChunkTooSmall { .. } => "chunk-too-small",
            MtfError::DimensionMismatch(_) => "dimension-mismatch",
            MtfError::PoolSize { .. } => "invalid-pool-size",
            MtfError::InvalidGenerator(_) => "invalid-generator",
            MtfError::InvalidConfig(_) => "invalid-config",
            MtfError::Io { .. } => "io",
            MtfError::Parse { .. } => "parse",
            MtfError::Column { .. } => "bad-column",
            MtfError::Npy(_) => "npy",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            MtfError::InvalidBinCount { .. }
            | MtfError::NotDivisible { .. }
            | MtfError::ChunkTooSmall { .. }
            | MtfError::PoolSize { .. }
            | MtfError::InvalidGenerator(_)
            | MtfError::InvalidConfig(_)
            | MtfError::MissingGlobalMatrix
            | MtfError::DimensionMismatch(_)
            | MtfError::InvalidRange { .. } => ErrorClass::Usage,
            MtfError::SeriesTooShort { .. }
            | MtfError::NonFinite { .. }
            | MtfError::UnsampledState { .. }
            | MtfError::Io { .. }
            | MtfError::Parse { .. }
            | MtfError::Column { .. }
            | MtfError::Npy(_) => ErrorClass::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, MtfError>;
