//! Closed-loop policy execution: chunk-and-commit.
//!
//! The policy is queried once every `k` steps; the whole predicted chunk is
//! executed before the next query, so an episode of length `T` issues
//! exactly `⌈T/k⌉` queries. Inference uses `z = 0` and a caller-chosen
//! feature mask.

use transfer_env::{episode_reward, joints, observe, reset, step, Action, EnvConfig, StageFlags};

use crate::error::PolicyError;
use crate::mask::GraphMask;
use crate::params::PolicyParams;
use crate::Result;

/// Runs one episode under `params` with feature mask `g`. Returns the final
/// stage flags and the staged reward. Deterministic given
/// `(params, env_config, g, episode_seed)`.
pub fn rollout(
    params: &PolicyParams,
    env_config: &EnvConfig,
    g: &GraphMask,
    episode_seed: u64,
) -> Result<(StageFlags, u8)> {
    let dims = params.dims();
    if env_config.obs_dim() != dims.obs_dim
        || env_config.act_dim() != dims.act_dim
        || env_config.joints_dim() != dims.joints_dim
    {
        return Err(PolicyError::Dim(format!(
            "environment provides obs {} / act {} / joints {}, policy expects {} / {} / {}",
            env_config.obs_dim(),
            env_config.act_dim(),
            env_config.joints_dim(),
            dims.obs_dim,
            dims.act_dim,
            dims.joints_dim
        )));
    }
    if g.len() != dims.feature_dim {
        return Err(PolicyError::Dim(format!(
            "mask has {} bits, policy expects {}",
            g.len(),
            dims.feature_dim
        )));
    }
    let mut state = reset(env_config, episode_seed)?;
    let mut pending: Vec<Vec<f64>> = Vec::new();
    while !state.finished() {
        if pending.is_empty() {
            let obs = observe(&state);
            let js = joints(&state);
            let flat = params.act(&obs, &js, g)?;
            let mut rows = params.chunk_rows(&flat);
            rows.reverse(); // execute front-first by popping from the back
            pending = rows;
        }
        let row = pending.pop().expect("refilled above");
        let action = Action::from_vector(&row)?;
        let (next, _) = step(&state, &action)?;
        state = next;
    }
    let reward = episode_reward(&state.flags)?;
    Ok((state.flags, reward))
}

/// Counts the policy queries `rollout` would make for an episode length —
/// exactly `⌈T/k⌉`.
pub fn queries_per_episode(episode_len: usize, chunk: usize) -> usize {
    episode_len.div_ceil(chunk)
}

/// Mean staged reward of `params` under mask `g` across the given episode
/// seeds.
pub fn evaluate_mean_reward(
    params: &PolicyParams,
    env_config: &EnvConfig,
    g: &GraphMask,
    episode_seeds: &[u64],
) -> Result<f64> {
    if episode_seeds.is_empty() {
        return Err(PolicyError::Config("need at least one evaluation episode".into()));
    }
    let mut sum = 0.0;
    for &seed in episode_seeds {
        let (_, reward) = rollout(params, env_config, g, seed)?;
        sum += reward as f64;
    }
    Ok(sum / episode_seeds.len() as f64)
}
