use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum PanoError {
    #[error("vector is not unit length (|v| = {0})")]
    NonUnitVector(f64),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("sample coordinate is not finite ({x}, {y})")]
    NonFiniteCoordinate { x: f64, y: f64 },
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("channel mismatch: expected {expected}, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no pixels left to evaluate after masking")]
    EmptyEvaluation,
    #[error("malformed tensor container: {0}")]
    Container(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PanoError>;

pub(crate) fn dims_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(PanoError::InvalidDimensions(msg.into()))
}
