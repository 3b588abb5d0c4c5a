//! Experiment orchestration for graph-conditioned imitation learning.
//!
//! This crate is the batch front end over the rest of the workspace: it
//! generates expert demonstrations, trains the baseline and the
//! graph-conditioned policies, runs the targeted intervention that recovers
//! the reward-relevant feature graph, evaluates the whole method grid under
//! in-distribution and out-of-distribution conditions, and writes merged
//! CSV results plus plain-text summary tables.
//!
//! Everything is driven by one JSON [`config::ExperimentConfig`]; every run
//! is deterministic in that config, and the `CAUSAL_ACT_SEED` environment
//! variable re-seeds a run without editing it. Exit codes are stable: 0
//! success, 1 usage, 2 data error, 3 numeric failure.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod report;
pub mod run;
pub mod scm;

pub use cli::{run, Cli, Cmd, Preset};
pub use config::{
    apply_seed_override, headline, paper_faithful, seed_override, ExperimentConfig, Method,
    SEED_ENV_VAR,
};
pub use error::{CliError, Result, EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};
pub use experiment::{cmd_experiment, GridOutcome, DR_SWEEP};
pub use report::{
    mean_transfer, read_results_csv, render_tables, results_to_csv, rows_by_method,
    write_results_csv, Condition, ResultRow, METHOD_ORDER, RESULTS_CSV_HEADER,
};
pub use run::{
    cmd_eval, cmd_gen_demos, cmd_intervene, cmd_train, eval_rows, GenSummary, GraphSource,
    InterveneSummary, TrainSummary,
};
pub use scm::{
    cmd_scm_check, DisentanglementSummary, ScmCheckSummary, FAMILY_TRIALS, MARKOV_REQUIRED,
    MARKOV_TRIALS,
};
