//! Error type for policy construction, training, and execution.

use thiserror::Error;

/// Everything that can go wrong around the policy.
#[derive(Debug, Error)]
pub enum PolicyError {
    /// A training or architecture setting violates its documented range.
    #[error("invalid config: {0}")]
    Config(String),

    /// Input dimensions disagree with the policy's.
    #[error("dimension mismatch: {0}")]
    Dim(String),

    /// The dataset cannot be trained on (empty, wrong shapes, chunk > T).
    #[error("bad training data: {0}")]
    Data(String),

    /// Training produced a non-finite loss; carries the location.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Filesystem failure.
    #[error("io: {0}")]
    Io(String),

    /// A checkpoint or log does not parse.
    #[error("parse: {0}")]
    Parse(String),

    /// Error bubbled up from the network layer.
    #[error(transparent)]
    Tensor(#[from] tensor_net::TensorError),

    /// Error bubbled up from the environment.
    #[error(transparent)]
    Env(#[from] transfer_env::EnvError),
}
