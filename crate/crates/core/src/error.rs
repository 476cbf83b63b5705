use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the CIPs pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty stack")]
    EmptyStack,
    #[error("inconsistent geometry: {}", .path.display())]
    InconsistentGeometry { path: PathBuf },
    #[error("not grayscale: {}", .path.display())]
    NotGrayscale { path: PathBuf },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("truncated volume: expected {expected} bytes, found {actual}")]
    TruncatedVolume { expected: u64, actual: u64 },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("empty image")]
    EmptyImage,
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", .path.display())]
    Decode { path: PathBuf, message: String },
    #[error("cannot interpolate single frame")]
    CannotInterpolateSingleFrame,
    #[error("empty series")]
    EmptySeries,
    #[error("invalid gain: {0}")]
    InvalidGain(f64),
    #[error("invalid color component: s={s}, b={b}, h={h}")]
    InvalidColorComponent { h: f64, s: f64, b: f64 },
    #[error("empty viewport")]
    EmptyViewport,
    #[error("path out of bounds")]
    PathOutOfBounds,
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
