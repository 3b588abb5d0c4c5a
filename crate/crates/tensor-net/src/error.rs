//! Error type shared across the crate.

use thiserror::Error;

/// Failure modes for network construction, execution, and persistence.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    /// A network specification was structurally invalid.
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),

    /// Input, gradient, or state dimensions did not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A value that must be finite was NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Checkpoint file I/O failed.
    #[error("checkpoint I/O: {0}")]
    Io(String),

    /// Checkpoint contents could not be parsed or failed validation.
    #[error("checkpoint parse: {0}")]
    Parse(String),
}
