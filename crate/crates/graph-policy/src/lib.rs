//! A graph-masked, chunked-action imitation policy.
//!
//! The policy is a conditional VAE trained by behavior cloning on expert
//! demonstrations: an encoder turns observations into features, a style
//! encoder infers a latent `z` from the true action chunk, and a decoder
//! predicts the next `k` actions from `[x ⊙ g, g, joints, z]` where `g` is a
//! binary feature mask drawn fresh per training sample. Training under
//! random masks forces the decoder to cope with any feature subset; at
//! inference `z = 0` and the caller picks the mask, which turns "which
//! features does the policy need?" into a measurable, executable question —
//! the handle the intervention search grips.
//!
//! Masking is exact: a feature with `g_i = 0` cannot influence the decoder
//! output in any way (property-tested bit-for-bit). Pinning `g` to all-ones
//! during training recovers plain behavior cloning on the identical
//! architecture, which serves as the baseline.

pub mod checkpoint;
pub mod error;
pub mod mask;
pub mod params;
pub mod rollout;
pub mod train;

pub use checkpoint::{
    load_policy, save_policy, PolicyCheckpoint, PolicyHeader, POLICY_CHECKPOINT_VERSION,
};
pub use error::PolicyError;
pub use mask::{sample_uniform_graph, GraphMask};
pub use params::{ActionStats, EncoderMode, GraphSampling, PolicyDims, PolicyParams};
pub use rollout::{evaluate_mean_reward, queries_per_episode, rollout};
pub use train::{action_second_moment, dataset_loss, train, EpochStats, TrainConfig, TrainLog};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, PolicyError>;
