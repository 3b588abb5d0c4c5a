//! Targeted intervention: search over feature masks by executing the frozen
//! policy and refitting a linear energy model to the observed rewards.
//!
//! Each iteration samples a mask from the current model, measures the mean
//! episodic reward of running the policy under that mask, appends the pair
//! to the record trail, and refits `(ω, b)` on the full trail. The returned
//! best mask keeps exactly the features whose fitted weight is positive.
//!
//! The loop talks to the policy through the [`RewardOracle`] seam, so tests
//! can substitute a rigged reward function for real rollouts.

use std::collections::HashSet;

use graph_policy::{rollout, GraphMask, PolicyParams};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use transfer_env::EnvConfig;

use crate::energy::{best_graph, sample_graph, EnergyModel};
use crate::error::InterventionError;
use crate::fit::fit_energy;
use crate::Result;

/// Ridge strength substituted while `lambda = 0` is still under-determined.
pub const FALLBACK_LAMBDA: f64 = 1e-3;

/// Settings for [`targeted_intervention`]. Everything has a task-scale
/// default, so partial JSON configs deserialize cleanly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InterventionConfig {
    /// Number of mask evaluations N.
    pub iterations: usize,
    /// Rollouts averaged per mask evaluation E.
    pub episodes_per_eval: usize,
    /// Ridge strength λ; 0 requests a pure least-squares fit.
    pub lambda: f64,
    /// Sampling temperature τ.
    pub tau: f64,
    pub seed: u64,
}

impl Default for InterventionConfig {
    fn default() -> Self {
        Self { iterations: 50, episodes_per_eval: 1, lambda: 1e-3, tau: 1.0, seed: 0 }
    }
}

impl InterventionConfig {
    /// Checks every field against its documented range.
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(InterventionError::Config("iterations must be >= 1".into()));
        }
        if self.episodes_per_eval == 0 {
            return Err(InterventionError::Config("episodes_per_eval must be >= 1".into()));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(InterventionError::Config(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(InterventionError::Config(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

/// One evaluated mask: the mean episodic reward over `episodes` rollouts.
#[derive(Debug, Clone, PartialEq)]
pub struct InterventionRecord {
    pub graph: GraphMask,
    pub reward: f64,
    pub episodes: usize,
}

impl InterventionRecord {
    /// Builds a record, rejecting rewards outside the staged range `[0, 4]`
    /// and empty evaluations.
    pub fn new(graph: GraphMask, reward: f64, episodes: usize) -> Result<Self> {
        if !(reward.is_finite() && (0.0..=4.0).contains(&reward)) {
            return Err(InterventionError::Config(format!(
                "reward must lie in [0, 4], got {reward}"
            )));
        }
        if episodes == 0 {
            return Err(InterventionError::Config("a record needs at least one episode".into()));
        }
        Ok(Self { graph, reward, episodes })
    }
}

/// Everything [`targeted_intervention`] produces: the selected mask, the
/// final fitted model, the full record trail, and the (1-based) iterations
/// where the λ = 0 fallback engaged — the log of that deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct InterventionOutcome {
    pub best_graph: GraphMask,
    pub model: EnergyModel,
    pub records: Vec<InterventionRecord>,
    pub lambda_fallback_iterations: Vec<usize>,
}

/// Source of mean episodic reward for a mask. Production code wraps policy
/// rollouts; tests plant exact reward functions.
pub trait RewardOracle {
    /// Mean reward over `episodes` evaluations of the mask `g`. Must stay
    /// within `[0, 4]` and draw any randomness it needs from `rng`.
    fn evaluate(&mut self, g: &GraphMask, episodes: usize, rng: &mut ChaCha8Rng) -> Result<f64>;
}

/// The production oracle: executes the frozen policy in `env` with style
/// latent z = 0, one freshly seeded episode per rollout.
pub struct PolicyOracle<'a> {
    params: &'a PolicyParams,
    env: &'a EnvConfig,
}

impl<'a> PolicyOracle<'a> {
    pub fn new(params: &'a PolicyParams, env: &'a EnvConfig) -> Self {
        Self { params, env }
    }
}

impl RewardOracle for PolicyOracle<'_> {
    fn evaluate(&mut self, g: &GraphMask, episodes: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
        let mut total = 0u64;
        for _ in 0..episodes {
            let (_, reward) = rollout(self.params, self.env, g, rng.random::<u64>())?;
            total += reward as u64;
        }
        Ok(total as f64 / episodes as f64)
    }
}

fn distinct_masks(records: &[InterventionRecord]) -> usize {
    records.iter().map(|r| r.graph.bits()).collect::<HashSet<_>>().len()
}

/// The intervention loop against an arbitrary oracle.
///
/// Starts from ω = 0 (every mask equally likely); each iteration samples a
/// mask, evaluates it, and refits on the full history. With `lambda = 0`
/// the fit is under-determined until `feature_dim + 1` distinct masks have
/// been visited, so [`FALLBACK_LAMBDA`] substitutes until then and the
/// affected iterations are reported in the outcome. Deterministic given the
/// config seed (for a deterministic oracle).
pub fn intervene_with_oracle(
    oracle: &mut impl RewardOracle,
    feature_dim: usize,
    config: &InterventionConfig,
) -> Result<InterventionOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = EnergyModel::zeros(feature_dim, config.tau)?;
    let mut records = Vec::with_capacity(config.iterations);
    let mut lambda_fallback_iterations = Vec::new();

    for iteration in 1..=config.iterations {
        let g = sample_graph(&model, &mut rng);
        let reward = oracle.evaluate(&g, config.episodes_per_eval, &mut rng)?;
        records.push(InterventionRecord::new(g, reward, config.episodes_per_eval)?);

        let mut lambda = config.lambda;
        if lambda == 0.0 && distinct_masks(&records) < feature_dim + 1 {
            lambda = FALLBACK_LAMBDA;
            lambda_fallback_iterations.push(iteration);
        }
        model = fit_energy(&records, lambda, config.tau)?;
    }

    Ok(InterventionOutcome {
        best_graph: best_graph(&model),
        model,
        records,
        lambda_fallback_iterations,
    })
}

/// Searches for the mask that maximizes the frozen policy's episodic reward
/// in `env`.
///
/// The policy is taken by shared reference and never modified — training
/// happens before intervention, never during. Rollouts run in whatever
/// environment configuration is passed; the experiment pipeline passes the
/// training configuration, because the deployment domain is unknown at
/// intervention time.
pub fn targeted_intervention(
    params: &PolicyParams,
    env: &EnvConfig,
    config: &InterventionConfig,
) -> Result<InterventionOutcome> {
    let mut oracle = PolicyOracle::new(params, env);
    intervene_with_oracle(&mut oracle, params.dims().feature_dim, config)
}
