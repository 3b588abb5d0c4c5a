//! Error type for energy models, fitting, and the intervention loop.

use thiserror::Error;

/// Everything that can go wrong while searching for a graph.
#[derive(Debug, Error)]
pub enum InterventionError {
    /// A setting or model parameter violates its documented range.
    #[error("invalid config: {0}")]
    Config(String),

    /// Vector lengths disagree.
    #[error("dimension mismatch: {0}")]
    Dim(String),

    /// The normal equations have no unique solution.
    #[error("singular fit: {0}")]
    Singular(String),

    /// Filesystem failure.
    #[error("io: {0}")]
    Io(String),

    /// A report file does not parse.
    #[error("parse: {0}")]
    Parse(String),

    /// Error bubbled up from policy execution.
    #[error(transparent)]
    Policy(#[from] graph_policy::PolicyError),
}
