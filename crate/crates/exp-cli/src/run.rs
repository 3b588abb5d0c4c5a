//! Single-run operations behind the CLI subcommands: demo generation,
//! training, intervention, and evaluation. Each returns a summary struct so
//! both the CLI layer and the experiment grid can reuse it.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use graph_policy::{
    load_policy, rollout, save_policy, train, GraphMask, GraphSampling, PolicyParams, TrainConfig,
};
use intervention::{
    targeted_intervention, write_model_json, write_trail_csv, InterventionConfig,
    InterventionOutcome,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use transfer_env::{episode_seed, generate_demos, Dataset, EnvConfig};

use crate::config::Method;
use crate::error::{CliError, Result};
use crate::report::{Condition, ResultRow};

/// Salt mixed into evaluation episode seeds so evaluation never replays the
/// demonstration episode stream for the same numeric seed.
const EVAL_SEED_SALT: u64 = 0x5EED_EA1;

/// Summary of one demo-generation run.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSummary {
    /// Episodes written.
    pub episodes: usize,
    /// Steps across all episodes.
    pub total_steps: usize,
    /// How many episodes ended at each staged reward 0..=4.
    pub reward_histogram: [usize; 5],
    /// Where the dataset landed.
    pub path: PathBuf,
}

/// Generates expert demonstrations and writes the JSONL dataset.
pub fn cmd_gen_demos(
    env: &EnvConfig,
    episodes: usize,
    seed: u64,
    out: &Path,
) -> Result<GenSummary> {
    let dataset = generate_demos(env, episodes, seed)?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Data(format!("creating {}: {e}", parent.display())))?;
        }
    }
    dataset.save(out)?;
    let mut reward_histogram = [0usize; 5];
    for ep in &dataset.episodes {
        reward_histogram[ep.reward.min(4) as usize] += 1;
    }
    Ok(GenSummary {
        episodes: dataset.len(),
        total_steps: dataset.total_steps(),
        reward_histogram,
        path: out.to_path_buf(),
    })
}

/// Summary of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    /// Graph distribution the method trained under.
    pub graph_sampling: GraphSampling,
    /// First epoch's total loss.
    pub initial_loss: f64,
    /// Last epoch's total loss.
    pub final_loss: f64,
    /// Where the checkpoint landed.
    pub checkpoint: PathBuf,
    /// Where the CSV training log landed.
    pub log: PathBuf,
}

/// Trains one policy per the method's graph distribution and writes the
/// checkpoint plus the per-epoch CSV log.
pub fn cmd_train(
    dataset_path: &Path,
    method: Method,
    train_config: &TrainConfig,
    checkpoint_out: &Path,
    log_out: &Path,
) -> Result<TrainSummary> {
    let dataset = Dataset::load(dataset_path)?;
    let config = TrainConfig { graph_sampling: method.graph_sampling(), ..train_config.clone() };
    let (params, log) = train(&dataset, &config)?;
    for path in [checkpoint_out, log_out] {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)
                    .map_err(|e| CliError::Data(format!("creating {}: {e}", parent.display())))?;
            }
        }
    }
    save_policy(&params, config.graph_sampling, checkpoint_out)?;
    log.save_csv(log_out)?;
    let first = log.rows.first().ok_or_else(|| CliError::Numeric("empty training log".into()))?;
    let last = log.rows.last().expect("non-empty after first()");
    Ok(TrainSummary {
        graph_sampling: config.graph_sampling,
        initial_loss: first.total,
        final_loss: last.total,
        checkpoint: checkpoint_out.to_path_buf(),
        log: log_out.to_path_buf(),
    })
}

/// Summary of one targeted-intervention run.
#[derive(Debug, Clone)]
pub struct InterveneSummary {
    /// The winning graph as a bit string.
    pub best_graph: String,
    /// Mask evaluations performed.
    pub iterations: usize,
    /// Where the trail CSV landed.
    pub trail: PathBuf,
    /// Where the energy-model JSON landed.
    pub model: PathBuf,
    /// Full outcome for callers that need the fitted model.
    pub outcome: InterventionOutcome,
}

/// Loads a graph-conditioned checkpoint and runs the targeted intervention
/// in `env`, writing the trail CSV and the fitted-model JSON.
///
/// Checkpoints trained with all-ones graphs are refused: such a policy never
/// saw a zeroed feature during training, so masked rollouts would probe
/// inputs it has no defined behavior on, and the fitted energies would be
/// noise.
pub fn cmd_intervene(
    checkpoint_path: &Path,
    env: &EnvConfig,
    config: &InterventionConfig,
    out_dir: &Path,
) -> Result<InterveneSummary> {
    let (params, sampling) = load_policy(checkpoint_path)?;
    if sampling == GraphSampling::AllOnes {
        return Err(CliError::Data(format!(
            "{}: checkpoint was trained with all-ones graphs (method act); it was never \
             conditioned on partial graphs, so intervention rewards would be meaningless — \
             train with method causal-act instead",
            checkpoint_path.display()
        )));
    }
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Data(format!("creating {}: {e}", out_dir.display())))?;
    let outcome = targeted_intervention(&params, env, config)?;
    let trail = out_dir.join("trail.csv");
    let model = out_dir.join("model.json");
    write_trail_csv(&trail, &outcome.records)?;
    write_model_json(&model, &outcome.model, &outcome.best_graph)?;
    Ok(InterveneSummary {
        best_graph: outcome.best_graph.to_bit_string(),
        iterations: outcome.records.len(),
        trail,
        model,
        outcome,
    })
}

/// Where the evaluation graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    /// Every feature visible (the baseline's graph).
    AllOnes,
    /// Every feature hidden (sanity floor).
    AllZeros,
    /// One uniform draw per seed, logged in the result row.
    Random,
    /// The winner stored in an intervention model JSON.
    File(PathBuf),
}

impl FromStr for GraphSource {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-ones" => Ok(GraphSource::AllOnes),
            "all-zeros" => Ok(GraphSource::AllZeros),
            "random" => Ok(GraphSource::Random),
            other => match other.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(GraphSource::File(PathBuf::from(path))),
                _ => Err(CliError::Usage(format!(
                    "graph source must be all-ones, all-zeros, random, or file:<model.json>, \
                     got {other:?}"
                ))),
            },
        }
    }
}

impl GraphSource {
    /// Materializes the mask for one seed. `Random` draws once from a
    /// ChaCha stream over the seed; the other sources ignore the seed.
    pub fn resolve(&self, feature_dim: usize, seed: u64) -> Result<GraphMask> {
        match self {
            GraphSource::AllOnes => Ok(GraphMask::ones(feature_dim)),
            GraphSource::AllZeros => Ok(GraphMask::zeros(feature_dim)),
            GraphSource::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let bits: Vec<u8> = (0..feature_dim).map(|_| rng.random_range(0..=1u8)).collect();
                Ok(GraphMask::from_bits(bits)?)
            }
            GraphSource::File(path) => {
                let (_, best) = intervention::read_model_json(path)?;
                if best.len() != feature_dim {
                    return Err(CliError::Data(format!(
                        "{}: stored graph has {} bits, policy expects {}",
                        path.display(),
                        best.len(),
                        feature_dim
                    )));
                }
                Ok(best)
            }
        }
    }
}

/// Evaluates one checkpoint+graph in one environment: `episodes` rollouts
/// per seed, one [`ResultRow`] per seed.
pub fn eval_rows(
    params: &PolicyParams,
    graph_source: &GraphSource,
    env: &EnvConfig,
    episodes: usize,
    seeds: &[u64],
    method_label: &str,
    condition: Condition,
) -> Result<Vec<ResultRow>> {
    if episodes == 0 {
        return Err(CliError::Usage("episodes must be >= 1".into()));
    }
    if seeds.is_empty() {
        return Err(CliError::Usage("seeds must be non-empty".into()));
    }
    let mut rows = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let g = graph_source.resolve(params.dims().feature_dim, seed)?;
        let (mut touched, mut lifted, mut transferred) = (0usize, 0usize, 0usize);
        for i in 0..episodes {
            let ep_seed = episode_seed(seed.wrapping_add(EVAL_SEED_SALT), i as u64);
            let (flags, _) = rollout(params, env, &g, ep_seed)?;
            touched += flags.touched as usize;
            lifted += flags.lifted as usize;
            transferred += flags.transferred as usize;
        }
        let n = episodes as f64;
        let row = ResultRow {
            method: method_label.to_string(),
            condition,
            seed,
            graph: g.to_bit_string(),
            episodes,
            touched: touched as f64 / n,
            lifted: lifted as f64 / n,
            transfer: transferred as f64 / n,
        };
        row.validate()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Loads a checkpoint and evaluates it (the CLI-facing wrapper around
/// [`eval_rows`]).
pub fn cmd_eval(
    checkpoint_path: &Path,
    graph_source: &GraphSource,
    env: &EnvConfig,
    episodes: usize,
    seeds: &[u64],
    method_label: &str,
    condition: Condition,
) -> Result<Vec<ResultRow>> {
    let (params, _) = load_policy(checkpoint_path)?;
    eval_rows(&params, graph_source, env, episodes, seeds, method_label, condition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use graph_policy::{ActionStats, EncoderMode, PolicyDims};
    use transfer_env::DistractorMode;

    fn tiny_env() -> EnvConfig {
        EnvConfig {
            n_distractors: 2,
            episode_len: 8,
            distractor_mode: DistractorMode::Absent,
            ..EnvConfig::default()
        }
    }

    fn untrained_params(env: &EnvConfig) -> PolicyParams {
        let dims = PolicyDims {
            obs_dim: env.obs_dim(),
            act_dim: env.act_dim(),
            joints_dim: env.joints_dim(),
            feature_dim: env.obs_dim(),
            z_dim: 4,
            chunk: 4,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        PolicyParams::new(
            dims,
            EncoderMode::Identity,
            &[16],
            ActionStats::identity(env.act_dim()),
            &mut rng,
        )
        .unwrap()
    }

    #[test]
    fn gen_demos_writes_header_plus_episode_lines() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("demos.jsonl");
        let summary = cmd_gen_demos(&tiny_env(), 5, 3, &out).unwrap();
        assert_eq!(summary.episodes, 5);
        assert_eq!(summary.reward_histogram[4], 5, "expert demos all reach reward 4");
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), 6);
    }

    #[test]
    fn graph_sources_parse_and_resolve() {
        assert_eq!(GraphSource::from_str("all-ones").unwrap(), GraphSource::AllOnes);
        assert_eq!(GraphSource::from_str("all-zeros").unwrap(), GraphSource::AllZeros);
        assert_eq!(GraphSource::from_str("random").unwrap(), GraphSource::Random);
        assert_eq!(
            GraphSource::from_str("file:out/model.json").unwrap(),
            GraphSource::File(PathBuf::from("out/model.json"))
        );
        assert_eq!(GraphSource::from_str("coin-flip").unwrap_err().exit_code(), 1);
        assert_eq!(GraphSource::from_str("file:").unwrap_err().exit_code(), 1);

        assert_eq!(GraphSource::AllOnes.resolve(4, 0).unwrap().count_ones(), 4);
        assert_eq!(GraphSource::AllZeros.resolve(4, 9).unwrap().count_ones(), 0);
        let a = GraphSource::Random.resolve(32, 1).unwrap();
        let b = GraphSource::Random.resolve(32, 1).unwrap();
        let c = GraphSource::Random.resolve(32, 2).unwrap();
        assert_eq!(a, b, "same seed, same mask");
        assert_ne!(a, c, "different seeds draw different masks");
    }

    #[test]
    fn eval_rows_respect_the_stage_ladder_and_count_episodes() {
        let env = tiny_env();
        let params = untrained_params(&env);
        let rows =
            eval_rows(&params, &GraphSource::AllZeros, &env, 4, &[0, 1], "act", Condition::InDistribution)
                .unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert_eq!(row.episodes, 4);
            assert!(row.touched >= row.lifted && row.lifted >= row.transfer);
            assert_eq!(row.graph, "0".repeat(env.obs_dim()));
        }
    }

    #[test]
    fn random_graph_provenance_lands_in_the_row() {
        let env = tiny_env();
        let params = untrained_params(&env);
        let rows = eval_rows(
            &params,
            &GraphSource::Random,
            &env,
            2,
            &[0, 1],
            "causal-act-random-graph",
            Condition::OutOfDistribution,
        )
        .unwrap();
        assert_ne!(rows[0].graph, rows[1].graph, "per-seed resample should differ");
        let expected = GraphSource::Random.resolve(env.obs_dim(), 0).unwrap().to_bit_string();
        assert_eq!(rows[0].graph, expected);
    }

    #[test]
    fn intervene_refuses_all_ones_checkpoints() {
        let dir = tempfile::tempdir().unwrap();
        let env = tiny_env();
        let params = untrained_params(&env);
        let ckpt = dir.path().join("act.json");
        save_policy(&params, GraphSampling::AllOnes, &ckpt).unwrap();
        let err = cmd_intervene(
            &ckpt,
            &env,
            &InterventionConfig { iterations: 2, ..InterventionConfig::default() },
            dir.path(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("all-ones"), "{err}");
    }

    #[test]
    fn intervene_writes_trail_and_model_for_graph_conditioned_checkpoints() {
        let dir = tempfile::tempdir().unwrap();
        let env = tiny_env();
        let params = untrained_params(&env);
        let ckpt = dir.path().join("causal.json");
        save_policy(&params, GraphSampling::Uniform, &ckpt).unwrap();
        let config = InterventionConfig {
            iterations: 6,
            episodes_per_eval: 1,
            ..InterventionConfig::default()
        };
        let summary = cmd_intervene(&ckpt, &env, &config, dir.path()).unwrap();
        assert_eq!(summary.iterations, 6);
        assert_eq!(summary.best_graph.len(), env.obs_dim());
        let trail = std::fs::read_to_string(&summary.trail).unwrap();
        assert_eq!(trail.lines().count(), 7, "header plus one line per iteration");
        assert!(summary.model.exists());
    }
}
