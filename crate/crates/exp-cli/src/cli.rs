//! Argument parsing and dispatch for the `causal-act` binary.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{
    apply_seed_override, headline, paper_faithful, seed_override, ExperimentConfig, Method,
};
use crate::error::{CliError, Result, EXIT_OK, EXIT_USAGE};
use crate::experiment::cmd_experiment;
use crate::report::{render_tables, write_results_csv, Condition};
use crate::run::{cmd_eval, cmd_gen_demos, cmd_intervene, cmd_train, GraphSource};
use crate::scm::cmd_scm_check;

/// Built-in configurations selectable with `--preset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Identity encoder, action-correlated distractors (the hard confound).
    Headline,
    /// MLP encoder, fixed distractors (the milder, classic setup).
    PaperFaithful,
}

/// Batch experiment runner for graph-conditioned imitation learning:
/// generate demonstrations, train policies, search for the reward-relevant
/// feature graph, and evaluate the method grid.
#[derive(Debug, Parser)]
#[command(name = "causal-act", version, max_term_width = 100)]
pub struct Cli {
    /// JSON experiment config; mutually exclusive with --preset.
    #[arg(long, global = true, value_name = "FILE", conflicts_with = "preset")]
    pub config: Option<PathBuf>,

    /// Built-in config to start from (default: headline).
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,

    #[command(subcommand)]
    pub command: Cmd,
}

/// One subcommand per pipeline stage.
#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Generate expert demonstrations as a JSONL dataset.
    GenDemos {
        /// Output dataset path.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Override the configured episode count.
        #[arg(long)]
        episodes: Option<usize>,
        /// Override the demonstration master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the distractor mode (fixed, absent, randomized,
        /// action-correlated).
        #[arg(long, value_name = "MODE")]
        mode: Option<String>,
        /// Override the DR exponent (a number, or "inf").
        #[arg(long, value_name = "K")]
        k: Option<String>,
    },
    /// Train one policy on a dataset and write checkpoint + training log.
    Train {
        /// Input dataset (from gen-demos).
        #[arg(long, value_name = "FILE")]
        dataset: PathBuf,
        /// Method whose graph distribution to train under.
        #[arg(long, value_enum)]
        method: Option<Method>,
        /// Output directory (checkpoint.json, train-log.csv).
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Search for the reward-relevant feature graph of a trained policy.
    Intervene {
        /// Graph-conditioned checkpoint (from train --method causal-act).
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        /// Output directory (trail.csv, model.json).
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Evaluate a checkpoint under a graph source; append rows to a CSV.
    Eval {
        /// Checkpoint to evaluate.
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        /// all-ones, all-zeros, random, or file:<model.json>.
        #[arg(long, value_name = "SOURCE")]
        graph_source: String,
        /// Evaluate with distractors removed instead of in-distribution.
        #[arg(long)]
        ood: bool,
        /// Method label recorded in the rows.
        #[arg(long, value_name = "LABEL")]
        label: String,
        /// Results CSV to write.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Run the full method grid and emit results.csv + report.txt.
    Experiment {
        /// Override the configured output directory.
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
    },
    /// Run the causal-foundation verification suite.
    ScmCheck {
        /// Optional dataset for the disentanglement scan.
        #[arg(long, value_name = "FILE")]
        dataset: Option<PathBuf>,
        /// Seed for the generated graphs and chains.
        #[arg(long, default_value_t = 0x5EED)]
        seed: u64,
    },
}

/// Loads the active config: `--config` file, `--preset`, or headline.
fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, cli.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("reading {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Data(format!("parsing {}: {e}", path.display())))?
        }
        (None, Some(Preset::PaperFaithful)) => paper_faithful(),
        (None, Some(Preset::Headline)) | (None, None) => headline(),
    };
    if let Some(k) = seed_override()? {
        apply_seed_override(&mut cfg, k);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_mode(s: &str) -> Result<transfer_env::DistractorMode> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| CliError::Usage(format!(
            "mode must be fixed, absent, randomized, or action-correlated, got {s:?}"
        )))
}

fn parse_exponent(s: &str) -> Result<transfer_env::DrExponent> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .or_else(|_| {
            s.parse::<f64>().map(transfer_env::DrExponent::Finite).map_err(|_| {
                CliError::Usage(format!("exponent must be a number >= 0 or \"inf\", got {s:?}"))
            })
        })
}

/// Executes one parsed invocation, writing human-readable progress to
/// `out`. Returns the process exit code.
pub fn dispatch(cli: Cli, out: &mut impl std::io::Write) -> Result<()> {
    let cfg = load_config(&cli)?;
    match cli.command {
        Cmd::GenDemos { out: out_path, episodes, seed, mode, k } => {
            let mut env = cfg.env.clone();
            if let Some(m) = mode.as_deref() {
                env.distractor_mode = parse_mode(m)?;
            }
            if let Some(k) = k.as_deref() {
                env.dr_exponent = parse_exponent(k)?;
            }
            let episodes = episodes.unwrap_or(cfg.demo_episodes);
            let seed = match seed {
                Some(s) => s,
                None => seed_override()?.unwrap_or(cfg.demo_seed),
            };
            let summary = cmd_gen_demos(&env, episodes, seed, &out_path)?;
            let _ = writeln!(
                out,
                "wrote {} episodes ({} steps) to {}",
                summary.episodes,
                summary.total_steps,
                summary.path.display()
            );
            let _ = writeln!(out, "reward histogram 0..4: {:?}", summary.reward_histogram);
        }
        Cmd::Train { dataset, method, out_dir } => {
            let method = method.unwrap_or(cfg.method);
            let ckpt = out_dir.join("checkpoint.json");
            let log = out_dir.join("train-log.csv");
            let summary = cmd_train(&dataset, method, &cfg.train, &ckpt, &log)?;
            let _ = writeln!(
                out,
                "trained {} ({:?} graphs): loss {} -> {}",
                method.label(),
                summary.graph_sampling,
                summary.initial_loss,
                summary.final_loss
            );
            let _ = writeln!(out, "checkpoint: {}", summary.checkpoint.display());
            let _ = writeln!(out, "log: {}", summary.log.display());
        }
        Cmd::Intervene { checkpoint, out_dir } => {
            let summary = cmd_intervene(&checkpoint, &cfg.env, &cfg.intervention, &out_dir)?;
            let _ = writeln!(out, "best graph: {}", summary.best_graph);
            let _ = writeln!(out, "iterations: {}", summary.iterations);
            if !summary.outcome.lambda_fallback_iterations.is_empty() {
                let _ = writeln!(
                    out,
                    "ridge fallback engaged on iterations {:?}",
                    summary.outcome.lambda_fallback_iterations
                );
            }
            let _ = writeln!(out, "trail: {}", summary.trail.display());
            let _ = writeln!(out, "model: {}", summary.model.display());
        }
        Cmd::Eval { checkpoint, graph_source, ood, label, out: out_path } => {
            let source: GraphSource = graph_source.parse()?;
            let (env, condition) = if ood {
                (cfg.ood_env(), Condition::OutOfDistribution)
            } else {
                (cfg.env.clone(), Condition::InDistribution)
            };
            let rows = cmd_eval(
                &checkpoint,
                &source,
                &env,
                cfg.eval_episodes,
                &cfg.seeds,
                &label,
                condition,
            )?;
            write_results_csv(&out_path, &rows)?;
            let _ = write!(out, "{}", render_tables(&rows));
            let _ = writeln!(out, "rows: {}", out_path.display());
        }
        Cmd::Experiment { out_dir } => {
            let mut cfg = cfg;
            if let Some(dir) = out_dir {
                cfg.out_dir = dir;
            }
            let outcome = cmd_experiment(&cfg)?;
            let _ = writeln!(out, "grid complete: {} rows", outcome.rows.len());
            for (seed, graph) in cfg.seeds.iter().zip(&outcome.best_graphs) {
                let _ = writeln!(out, "seed {seed}: best graph {graph}");
            }
            let text = fs::read_to_string(&outcome.report_txt)
                .map_err(|e| CliError::Data(format!("{}: {e}", outcome.report_txt.display())))?;
            let _ = write!(out, "{text}");
            let _ = writeln!(out, "results: {}", outcome.results_csv.display());
            let _ = writeln!(out, "report: {}", outcome.report_txt.display());
        }
        Cmd::ScmCheck { dataset, seed } => {
            let summary = cmd_scm_check(dataset.as_deref(), seed)?;
            let _ = writeln!(
                out,
                "policy-graph family: {}/{} solvable, {}/{} mutants rejected",
                summary.family_solvable,
                crate::scm::FAMILY_TRIALS,
                summary.mutants_rejected,
                crate::scm::FAMILY_TRIALS
            );
            let _ = writeln!(
                out,
                "local Markov chain fixture: {}/{} trials passed (need >= {})",
                summary.markov_passed,
                crate::scm::MARKOV_TRIALS,
                crate::scm::MARKOV_REQUIRED
            );
            if let Some(scan) = &summary.disentanglement {
                let _ = writeln!(
                    out,
                    "disentanglement scan: {} rows, {} pairs tested, {} degenerate pairs \
                     skipped, dependent fraction {:.3}",
                    scan.rows, scan.tested_pairs, scan.skipped_pairs, scan.dependent_fraction
                );
            }
            if !summary.passed() {
                return Err(CliError::Numeric("verification suite failed".into()));
            }
            let _ = writeln!(out, "verification suite passed");
        }
    }
    Ok(())
}

/// Full CLI entry: parse, dispatch, and map errors to exit codes. Writes
/// normal output to stdout and failures to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version through the same error path.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut stdout = std::io::stdout();
    match dispatch(cli, &mut stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Test helper: run against string args, capturing stdout text.
#[cfg(test)]
pub fn run_captured(args: &[&str]) -> (Result<()>, String) {
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()));
    let mut buf: Vec<u8> = Vec::new();
    let result = cli.and_then(|c| dispatch(c, &mut buf));
    (result, String::from_utf8_lossy(&buf).into_owned())
}
