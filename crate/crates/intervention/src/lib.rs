//! Post-training search for the feature mask a policy should act under.
//!
//! Training leaves the policy able to act under *any* mask; this crate
//! finds the mask worth keeping. It maintains a linear energy model
//! `p(g) ∝ exp(⟨ω, g⟩/τ)` over masks, alternates between sampling a mask,
//! scoring it by executing the frozen policy for a few episodes, and
//! refitting `ω` to the full reward history by ridge regression, then
//! returns the mask that keeps exactly the positive-weight features.
//! Features that merely correlate with expert actions earn negative or
//! near-zero weight — masking them costs no reward — while features the
//! task truly depends on earn positive weight.
//!
//! `energy` defines the model, its exact factorized sampler, and the
//! enumeration oracle; `fit` solves the ridge normal equations; `search`
//! runs the loop behind a swappable reward oracle; `report` persists the
//! trail and the final model.

mod energy;
mod error;
mod fit;
mod report;
mod search;

pub use energy::{best_graph, graph_prob, sample_graph, EnergyModel, MAX_ENUM_DIM};
pub use error::InterventionError;
pub use fit::fit_energy;
pub use report::{read_model_json, write_model_json, write_trail_csv};
pub use search::{
    intervene_with_oracle, targeted_intervention, InterventionConfig, InterventionOutcome,
    InterventionRecord, PolicyOracle, RewardOracle, FALLBACK_LAMBDA,
};

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, InterventionError>;
