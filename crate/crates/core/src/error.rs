use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    WavRead {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
    #[error("failed to write {path}: {source}")]
    WavWrite {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),
    #[error("empty audio: {0}")]
    Empty(String),
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("signals are incompatible: {0}")]
    Mismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0}")]
    Degenerate(String),
    #[error("basis dimension {dim} exceeds the configured cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("measure failed: {0}")]
    Measure(String),
    #[error("statistics: {0}")]
    Stats(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
