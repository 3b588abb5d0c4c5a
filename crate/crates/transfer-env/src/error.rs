//! Error type shared across the environment crate.

use thiserror::Error;

/// Everything that can go wrong while configuring, stepping, or recording
/// the environment.
#[derive(Debug, Error)]
pub enum EnvError {
    /// A configuration field violates its documented range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// `step` was called after the episode's final step.
    #[error("episode already finished (step index {step} of {len})")]
    EpisodeFinished { step: usize, len: usize },

    /// An action contained NaN or infinity.
    #[error("action contains a non-finite component")]
    NonFiniteAction,

    /// Stage flags violate the monotone ladder.
    #[error("stage flags violate the ladder: {0}")]
    InvalidFlags(String),

    /// The scripted expert failed to finish an episode — it is supposed to
    /// be an oracle, so this is always a bug or a broken configuration.
    #[error("expert reached reward {reward} (expected 4) on episode {episode}")]
    ExpertFailed { episode: usize, reward: u8 },

    /// A request with out-of-range arguments (bad exponent, zero episodes).
    #[error("invalid request: {0}")]
    InvalidRequest(String),

    /// Filesystem failure while reading or writing a dataset.
    #[error("io: {0}")]
    Io(String),

    /// A dataset file does not parse or is internally inconsistent.
    #[error("parse: {0}")]
    Parse(String),
}
