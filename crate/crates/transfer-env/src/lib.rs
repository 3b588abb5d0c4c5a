//! A deterministic 2D bimanual cube-transfer environment for studying what
//! imitation policies attend to.
//!
//! Two point grippers move under velocity control in a square arena. The
//! task: the right gripper picks up a cube from a random spawn box, carries
//! it to a meet point, and hands it to the left gripper. Progress is scored
//! on a staged ladder (touch, lift, transfer attempt, completed transfer:
//! reward 0–4).
//!
//! The interesting part is the *distractor block* of the observation —
//! `D` slots of `(x, y, color)` values that are task-irrelevant by
//! construction and configurable as confounds:
//!
//! * `fixed` — constant values every episode (spurious constants a policy
//!   can latch onto),
//! * `absent` — all zeros (the held-out test scene),
//! * `randomized` — a power-law-distributed number of slots get random
//!   values each episode (domain randomization),
//! * `action-correlated` — slots reproduce an affine encoding of the
//!   previous action (a maximal confound: they "explain" expert actions
//!   perfectly during demonstrations and vanish at test time).
//!
//! Everything is seeded and bit-exact: episodes are pure functions of
//! `(config, episode_seed)` and the action sequence, and per-episode seeds
//! derive from a master seed by a documented mixing function, so datasets
//! regenerate byte-identically.

pub mod config;
pub mod dataset;
pub mod dr;
pub mod env;
pub mod error;
pub mod expert;
pub mod state;

pub use config::{
    DistractorMode, DrExponent, EnvConfig, ACTION_SLOT_OFFSET, ACTION_SLOT_SCALE,
    FIXED_SLOT_TABLE, TASK_OBS_DIMS,
};
pub use dataset::{generate_demos, rollout_reward, Dataset, Episode, DATASET_SCHEMA_VERSION};
pub use dr::{dr_count_probabilities, dr_sample_count, episode_seed};
pub use env::{joints, observe, reset, step};
pub use error::EnvError;
pub use expert::expert_action;
pub use state::{episode_reward, Action, EnvState, Holder, StageFlags};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, EnvError>;
