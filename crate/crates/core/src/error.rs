//! Error type for the whole crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TfgError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("rotation angle is within 1e-6 of pi; logarithm is ill-conditioned")]
    AngleNearPi,
    #[error("nu matrix is singular")]
    SingularNu,
    #[error("output frame does not match the filter error side")]
    FrameMismatch,
    #[error("innovation covariance is numerically singular (condition number {0:.3e})")]
    SingularInnovationCovariance(f64),
    #[error("matrix is not a rotation: {0}")]
    NotRotation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TfgError>;
