//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("parity mismatch: length {length} cannot reach endpoint {endpoint}")]
    Parity { length: usize, endpoint: i64 },
    #[error("enumeration cap exceeded: n = {n} > cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    #[error("table too small: {0}")]
    TableTooSmall(String),
    #[error("empty target set: {0}")]
    EmptyTarget(String),
    #[error("precision insufficient: {bits} bits leave error bound {error_bound:e} around {value}")]
    PrecisionInsufficient { bits: u64, error_bound: f64, value: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown experiment: {0}")]
    UnknownExperiment(String),
    #[error("cache format error: {0}")]
    CacheFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable category used by the CLI error prefix.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidTree(_) | Error::InvalidPath(_) | Error::Parity { .. } => "input",
            Error::CapExceeded { .. } | Error::SizeCap(_) => "cap",
            Error::TableTooSmall(_) => "table",
            Error::EmptyTarget(_) => "empty",
            Error::PrecisionInsufficient { .. } => "precision",
            Error::Domain(_) => "domain",
            Error::UnknownExperiment(_) => "experiment",
            Error::CacheFormat(_) => "cache",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
