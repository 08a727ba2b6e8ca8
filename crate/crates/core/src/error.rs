use thiserror::Error;

/// Errors produced by the simulation and estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two operands have incompatible shapes.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Normalization to the standard quantum level was requested but no
    /// vacuum calibration records were available.
    #[error("missing vacuum calibration: {0}")]
    MissingCalibration(String),

    /// A persisted dataset does not match the documented schema.
    #[error("dataset schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
