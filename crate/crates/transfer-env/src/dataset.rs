//! Demonstration datasets: in-memory form, JSONL persistence, and expert
//! demo generation.
//!
//! File layout (JSON lines): the first line is a header
//! `{schema_version, obs_dim, act_dim, joints_dim, T, env_config}`; each
//! following line is one episode `{seed, obs, joints, actions, reward}`.
//! Serialization uses shortest-round-trip float formatting, so generating
//! the same dataset twice yields byte-identical files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::EnvConfig;
use crate::dr::episode_seed;
use crate::env::{joints, observe, reset, step};
use crate::error::EnvError;
use crate::expert::expert_action;
use crate::state::{episode_reward, Action, StageFlags};
use crate::Result;

/// Current dataset schema version.
pub const DATASET_SCHEMA_VERSION: u32 = 1;

/// One recorded episode: per-step observations, proprioception, and actions
/// (all of length `T`), plus the final staged reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub seed: u64,
    pub obs: Vec<Vec<f64>>,
    pub joints: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub reward: u8,
}

impl Episode {
    /// Reconstructs the final stage flags from the staged reward (the two
    /// are in bijection because the flags cascade).
    pub fn final_flags(&self) -> StageFlags {
        StageFlags {
            touched: self.reward >= 1,
            lifted: self.reward >= 2,
            attempted_transfer: self.reward >= 3,
            transferred: self.reward >= 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DatasetHeader {
    schema_version: u32,
    obs_dim: usize,
    act_dim: usize,
    joints_dim: usize,
    #[serde(rename = "T")]
    episode_len: usize,
    env_config: EnvConfig,
}

/// A set of episodes recorded under one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub config: EnvConfig,
    pub episodes: Vec<Episode>,
}

impl Dataset {
    /// Number of episodes.
    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    /// True when no episodes are present.
    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    /// Total recorded steps across episodes.
    pub fn total_steps(&self) -> usize {
        self.episodes.iter().map(|e| e.obs.len()).sum()
    }

    /// Checks the cross-episode shape invariants.
    pub fn validate(&self) -> Result<()> {
        let t = self.config.episode_len;
        let (od, ad, jd) = (self.config.obs_dim(), self.config.act_dim(), self.config.joints_dim());
        for (i, ep) in self.episodes.iter().enumerate() {
            if ep.obs.len() != t || ep.joints.len() != t || ep.actions.len() != t {
                return Err(EnvError::Parse(format!(
                    "episode {i}: expected {t} records, got obs {} / joints {} / actions {}",
                    ep.obs.len(),
                    ep.joints.len(),
                    ep.actions.len()
                )));
            }
            if ep.obs.iter().any(|r| r.len() != od)
                || ep.joints.iter().any(|r| r.len() != jd)
                || ep.actions.iter().any(|r| r.len() != ad)
            {
                return Err(EnvError::Parse(format!("episode {i}: row width mismatch")));
            }
            if ep.reward > 4 {
                return Err(EnvError::Parse(format!("episode {i}: reward {} > 4", ep.reward)));
            }
        }
        Ok(())
    }

    /// Writes the JSONL form.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let header = DatasetHeader {
            schema_version: DATASET_SCHEMA_VERSION,
            obs_dim: self.config.obs_dim(),
            act_dim: self.config.act_dim(),
            joints_dim: self.config.joints_dim(),
            episode_len: self.config.episode_len,
            env_config: self.config.clone(),
        };
        let mut out = serde_json::to_string(&header)
            .map_err(|e| EnvError::Parse(format!("encoding header: {e}")))?;
        out.push('\n');
        for ep in &self.episodes {
            out.push_str(
                &serde_json::to_string(ep)
                    .map_err(|e| EnvError::Parse(format!("encoding episode: {e}")))?,
            );
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| EnvError::Io(format!("writing {}: {e}", path.display())))
    }

    /// Reads and validates a JSONL dataset.
    pub fn load(path: &Path) -> Result<Dataset> {
        let body = fs::read_to_string(path)
            .map_err(|e| EnvError::Io(format!("reading {}: {e}", path.display())))?;
        let mut lines = body.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| EnvError::Parse(format!("{}: empty file", path.display())))?;
        let header: DatasetHeader = serde_json::from_str(header_line)
            .map_err(|e| EnvError::Parse(format!("header: {e}")))?;
        if header.schema_version != DATASET_SCHEMA_VERSION {
            return Err(EnvError::Parse(format!(
                "unsupported schema version {} (expected {DATASET_SCHEMA_VERSION})",
                header.schema_version
            )));
        }
        let config = header.env_config;
        if header.obs_dim != config.obs_dim()
            || header.act_dim != config.act_dim()
            || header.joints_dim != config.joints_dim()
            || header.episode_len != config.episode_len
        {
            return Err(EnvError::Parse("header dims disagree with env config".into()));
        }
        let mut episodes = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let ep: Episode = serde_json::from_str(line)
                .map_err(|e| EnvError::Parse(format!("episode line {}: {e}", i + 1)))?;
            episodes.push(ep);
        }
        let dataset = Dataset { config, episodes };
        dataset.validate()?;
        Ok(dataset)
    }
}

/// Rolls out the scripted expert for `n_episodes` episodes and records
/// `(observation, joints, action)` at every step. Episode `i` uses the seed
/// mixed from `(master_seed, i)`. Every episode must reach the full staged
/// reward of 4 — the expert is an oracle, so anything less is an error.
pub fn generate_demos(config: &EnvConfig, n_episodes: usize, master_seed: u64) -> Result<Dataset> {
    config.validate()?;
    if n_episodes < 1 {
        return Err(EnvError::InvalidRequest("need at least one episode".into()));
    }
    let mut episodes = Vec::with_capacity(n_episodes);
    for i in 0..n_episodes {
        let seed = episode_seed(master_seed, i as u64);
        let mut state = reset(config, seed)?;
        let mut obs = Vec::with_capacity(config.episode_len);
        let mut js = Vec::with_capacity(config.episode_len);
        let mut actions = Vec::with_capacity(config.episode_len);
        while !state.finished() {
            let action = expert_action(&state);
            obs.push(observe(&state));
            js.push(joints(&state).to_vec());
            let (next, _) = step(&state, &action)?;
            // Record the action as applied (post speed clipping), which is
            // also exactly what action-correlated slots encode.
            actions.push(next.prev_action.to_vec());
            state = next;
        }
        let reward = episode_reward(&state.flags)?;
        if reward != 4 {
            return Err(EnvError::ExpertFailed { episode: i, reward });
        }
        episodes.push(Episode { seed, obs, joints: js, actions, reward });
    }
    Ok(Dataset { config: config.clone(), episodes })
}

/// Rolls out an arbitrary controller in one episode and returns its staged
/// reward. The controller sees `(observation, joints)` and must return a
/// flat action vector; it is called once per step.
pub fn rollout_reward<F>(config: &EnvConfig, seed: u64, mut controller: F) -> Result<u8>
where
    F: FnMut(&[f64], &[f64]) -> Result<Vec<f64>>,
{
    let mut state = reset(config, seed)?;
    while !state.finished() {
        let obs = observe(&state);
        let js = joints(&state);
        let action_vec = controller(&obs, &js)?;
        let action = Action::from_vector(&action_vec)?;
        let (next, _) = step(&state, &action)?;
        state = next;
    }
    episode_reward(&state.flags)
}
