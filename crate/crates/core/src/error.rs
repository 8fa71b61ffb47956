use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mask has no foreground pixel")]
    EmptyMask,
    #[error("distance transform source set is empty")]
    EmptySource,
    #[error("invalid bounding box ({x_min}, {y_min}, {x_max}, {y_max})")]
    InvalidBox {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
    },
    #[error("box ({x_min}, {y_min}, {x_max}, {y_max}) exceeds image extent {width}x{height}")]
    BoxOutOfBounds {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
        width: usize,
        height: usize,
    },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("probability {value} at index {index} is not strictly inside (0, 1)")]
    DomainError { index: usize, value: f64 },
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("dataset split is empty: {0}")]
    EmptyDataset(&'static str),
    #[error("no dataset manifest found in {0}")]
    MissingDataset(std::path::PathBuf),
    #[error("invalid window: lo {lo} must be below hi {hi}")]
    InvalidWindow { lo: f64, hi: f64 },
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: expected {expected} samples, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("unsupported PGM maxval {0} (must be 1..=255)")]
    UnsupportedMaxval(u32),
    #[error("bad magic bytes, expected \"F32G\"")]
    BadMagic,
    #[error("size mismatch: header declares {declared} values, payload holds {actual} bytes")]
    SizeMismatch { declared: usize, actual: usize },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid model file: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
