//! Experiment configuration: the method matrix, presets, and the seed
//! override contract.

use std::path::PathBuf;

use graph_policy::{EncoderMode, GraphSampling, TrainConfig};
use intervention::InterventionConfig;
use serde::{Deserialize, Serialize};
use transfer_env::{DistractorMode, DrExponent, EnvConfig};

use crate::error::{CliError, Result};

/// Environment variable that overrides configured seeds (see
/// [`seed_override`]).
pub const SEED_ENV_VAR: &str = "CAUSAL_ACT_SEED";

/// The five trainable/evaluable method labels.
///
/// The two `*-graph` variants are evaluation ablations: they train exactly
/// like `causal-act` (uniform graph sampling) but are scored with a random
/// or all-ones graph instead of the intervention's winner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Behavior cloning with all-ones graphs (the plain baseline).
    Act,
    /// Behavior cloning on domain-randomized demonstrations.
    ActDr,
    /// Graph-conditioned policy + targeted intervention.
    CausalAct,
    /// Causal-act checkpoint evaluated with a random graph.
    CausalActRandomGraph,
    /// Causal-act checkpoint evaluated with an all-ones graph.
    CausalActFullGraph,
}

impl Method {
    /// The graph distribution this method trains under.
    pub fn graph_sampling(self) -> GraphSampling {
        match self {
            Method::Act | Method::ActDr => GraphSampling::AllOnes,
            Method::CausalAct | Method::CausalActRandomGraph | Method::CausalActFullGraph => {
                GraphSampling::Uniform
            }
        }
    }

    /// The kebab-case label used in file names and report rows.
    pub fn label(self) -> &'static str {
        match self {
            Method::Act => "act",
            Method::ActDr => "act-dr",
            Method::CausalAct => "causal-act",
            Method::CausalActRandomGraph => "causal-act-random-graph",
            Method::CausalActFullGraph => "causal-act-full-graph",
        }
    }
}

/// Everything one experiment needs: environment, training, intervention,
/// and evaluation settings plus the output location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Training/in-distribution environment.
    pub env: EnvConfig,
    /// Policy training settings (graph sampling is overridden per method).
    pub train: TrainConfig,
    /// Targeted-intervention settings.
    pub intervention: InterventionConfig,
    /// Rollouts per evaluation cell.
    pub eval_episodes: usize,
    /// One complete run of the method grid per seed.
    pub seeds: Vec<u64>,
    /// Method for the single-run subcommands; `experiment` runs all of them.
    pub method: Method,
    /// DR exponent for `act-dr` single runs; `experiment` sweeps its own.
    pub dr_exponent: DrExponent,
    /// Where artifacts land.
    pub out_dir: PathBuf,
    /// Demonstration episodes per dataset (equal across methods).
    pub demo_episodes: usize,
    /// Master seed for demonstration generation.
    pub demo_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        headline()
    }
}

impl ExperimentConfig {
    /// Checks every field against its documented range.
    pub fn validate(&self) -> Result<()> {
        self.env.validate().map_err(CliError::from)?;
        self.intervention.validate().map_err(CliError::from)?;
        if self.eval_episodes == 0 {
            return Err(CliError::Usage("eval_episodes must be >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Usage("seeds must be non-empty".into()));
        }
        if self.demo_episodes == 0 {
            return Err(CliError::Usage("demo_episodes must be >= 1".into()));
        }
        Ok(())
    }

    /// The out-of-distribution variant of the configured environment: the
    /// identical task with every distractor slot zeroed.
    pub fn ood_env(&self) -> EnvConfig {
        EnvConfig { distractor_mode: DistractorMode::Absent, ..self.env.clone() }
    }

    /// The domain-randomization training environment for exponent `k`.
    pub fn dr_env(&self, k: DrExponent) -> EnvConfig {
        EnvConfig { distractor_mode: DistractorMode::Randomized, dr_exponent: k, ..self.env.clone() }
    }
}

/// The headline preset: identity encoder with the action-correlated
/// distractor — the hardest confound this environment offers, because every
/// slot dimension replays the previous action and so "explains" expert
/// actions perfectly while vanishing at test time.
pub fn headline() -> ExperimentConfig {
    ExperimentConfig {
        env: EnvConfig {
            distractor_mode: DistractorMode::ActionCorrelated,
            ..EnvConfig::default()
        },
        train: TrainConfig {
            epochs: 100,
            hidden: vec![128, 128],
            encoder_mode: EncoderMode::Identity,
            graph_sampling: GraphSampling::Uniform,
            joint_noise_sd: 0.05,
            ..TrainConfig::default()
        },
        intervention: InterventionConfig::default(),
        eval_episodes: 50,
        seeds: vec![0, 1, 2],
        method: Method::CausalAct,
        dr_exponent: DrExponent::Finite(0.0),
        out_dir: PathBuf::from("out"),
        demo_episodes: 200,
        demo_seed: 7,
    }
}

/// The conservative preset: learned MLP encoder with fixed distractors —
/// closer to the classic setup, with a milder confound.
pub fn paper_faithful() -> ExperimentConfig {
    let mut cfg = headline();
    cfg.env.distractor_mode = DistractorMode::Fixed;
    cfg.train.encoder_mode = EncoderMode::Mlp;
    cfg.train.feature_dim = 32;
    cfg
}

/// Reads the `CAUSAL_ACT_SEED` override. `Ok(None)` when unset; a set but
/// unparsable value is a usage error so typos cannot silently run the
/// default seeds.
pub fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Usage(format!("{SEED_ENV_VAR}: {e}"))),
        Ok(raw) => raw
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|e| CliError::Usage(format!("{SEED_ENV_VAR}={raw:?} is not a u64: {e}"))),
    }
}

/// Applies a seed override to a loaded config: the seeds list becomes
/// `[k, k+1, ..]` (count preserved) and the training and intervention seeds
/// follow the first entry. The demonstration seed is untouched — it names
/// the dataset, not the run.
pub fn apply_seed_override(cfg: &mut ExperimentConfig, k: u64) {
    cfg.seeds = (0..cfg.seeds.len() as u64).map(|i| k.wrapping_add(i)).collect();
    cfg.train.seed = k;
    cfg.intervention.seed = k;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn methods_map_to_their_training_distributions() {
        assert_eq!(Method::Act.graph_sampling(), GraphSampling::AllOnes);
        assert_eq!(Method::ActDr.graph_sampling(), GraphSampling::AllOnes);
        assert_eq!(Method::CausalAct.graph_sampling(), GraphSampling::Uniform);
        assert_eq!(Method::CausalActRandomGraph.graph_sampling(), GraphSampling::Uniform);
        assert_eq!(Method::CausalActFullGraph.graph_sampling(), GraphSampling::Uniform);
    }

    #[test]
    fn method_serde_uses_kebab_case() {
        let m: Method = serde_json::from_str("\"causal-act-full-graph\"").unwrap();
        assert_eq!(m, Method::CausalActFullGraph);
        assert_eq!(serde_json::to_string(&Method::ActDr).unwrap(), "\"act-dr\"");
    }

    #[test]
    fn presets_validate_and_differ_where_documented() {
        let h = headline();
        let p = paper_faithful();
        h.validate().unwrap();
        p.validate().unwrap();
        assert_eq!(h.env.distractor_mode, DistractorMode::ActionCorrelated);
        assert_eq!(h.train.encoder_mode, EncoderMode::Identity);
        assert_eq!(p.env.distractor_mode, DistractorMode::Fixed);
        assert_eq!(p.train.encoder_mode, EncoderMode::Mlp);
        assert_eq!(h.eval_episodes, 50);
        assert_eq!(h.seeds.len(), 3);
    }

    #[test]
    fn ood_env_zeroes_distractors_and_nothing_else() {
        let cfg = headline();
        let ood = cfg.ood_env();
        assert_eq!(ood.distractor_mode, DistractorMode::Absent);
        assert_eq!(ood.n_distractors, cfg.env.n_distractors);
        assert_eq!(ood.episode_len, cfg.env.episode_len);
    }

    #[test]
    fn seed_override_shifts_the_whole_list() {
        let mut cfg = headline();
        apply_seed_override(&mut cfg, 40);
        assert_eq!(cfg.seeds, vec![40, 41, 42]);
        assert_eq!(cfg.train.seed, 40);
        assert_eq!(cfg.intervention.seed, 40);
        assert_eq!(cfg.demo_seed, 7);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = paper_faithful();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_top_level_fields_are_rejected() {
        let err = serde_json::from_str::<ExperimentConfig>("{\"epohcs\": 3}").unwrap_err();
        assert!(err.to_string().contains("epohcs"), "{err}");
    }

    #[test]
    fn partial_configs_fall_back_to_headline_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str("{\"eval_episodes\": 10}").unwrap();
        assert_eq!(cfg.eval_episodes, 10);
        assert_eq!(cfg.seeds, vec![0, 1, 2]);
        assert_eq!(cfg.env.distractor_mode, DistractorMode::ActionCorrelated);
    }
}
