use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Variants are grouped into config, data and capacity families so the CLI
/// can map them onto distinct exit codes (see [`Error::kind`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("level {k} is out of range for {m} attributes (expected 0..={m})")]
    LevelBounds { m: usize, k: usize },

    #[error("cannot split {spec} at position {position}: not a star")]
    InvalidSplit { spec: String, position: usize },

    #[error("subgroup spec has {found} attributes, lattice expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid subgroup spec {0:?}")]
    InvalidSpec(String),

    #[error("{0}")]
    Capacity(String),

    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("{0}")]
    Mode(String),

    #[error("level {level}: no subgroup has a defined rate")]
    EmptyLevel { level: usize },

    #[error("variance needs at least 2 samples, got {0}")]
    DegenerateVariance(usize),

    #[error("ISP benchmark: {0}")]
    Benchmark(String),

    #[error("vertex {vertex} holds {count} rows, fewer than the {required} requested per vertex")]
    UnderPopulatedVertex {
        vertex: String,
        count: usize,
        required: usize,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("row {row}: column {column:?} value {value:?} has no mapping")]
    Mapping {
        row: usize,
        column: String,
        value: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
}

/// Coarse failure family, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Capacity,
    Internal,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_)
            | Error::Mode(_)
            | Error::Benchmark(_)
            | Error::LevelBounds { .. }
            | Error::InvalidSplit { .. }
            | Error::InvalidSpec(_)
            | Error::DimensionMismatch { .. } => ErrorKind::Config,
            Error::MalformedRow { .. }
            | Error::EmptyDataset
            | Error::EmptyLevel { .. }
            | Error::DegenerateVariance(_)
            | Error::UnderPopulatedVertex { .. }
            | Error::Mapping { .. }
            | Error::Csv(_)
            | Error::Io { .. } => ErrorKind::Data,
            Error::Capacity(_) => ErrorKind::Capacity,
            Error::Json(_) | Error::OracleMismatch(_) => ErrorKind::Internal,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
