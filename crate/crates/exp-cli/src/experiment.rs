//! The full method grid: ACT, the DR ladder, Causal-ACT, and the two graph
//! ablations, over in-distribution and out-of-distribution conditions.

use std::fs;
use std::path::{Path, PathBuf};

use graph_policy::load_policy;
use transfer_env::DrExponent;

use crate::config::{ExperimentConfig, Method};
use crate::error::{CliError, Result};
use crate::report::{render_tables, write_results_csv, Condition, ResultRow};
use crate::run::{cmd_gen_demos, cmd_intervene, cmd_train, eval_rows, GraphSource};

/// The DR exponents swept by the grid, with the labels used in file names
/// and report rows.
pub const DR_SWEEP: [(&str, DrExponent); 4] = [
    ("k0", DrExponent::Finite(0.0)),
    ("k3", DrExponent::Finite(3.0)),
    ("k6", DrExponent::Finite(6.0)),
    ("kinf", DrExponent::Infinite),
];

/// Everything the grid produced.
#[derive(Debug, Clone)]
pub struct GridOutcome {
    /// Every evaluation cell, in deterministic emission order.
    pub rows: Vec<ResultRow>,
    /// Winning graphs per seed, as bit strings (one per configured seed).
    pub best_graphs: Vec<String>,
    /// The merged CSV path.
    pub results_csv: PathBuf,
    /// The plain-text table path.
    pub report_txt: PathBuf,
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path)
        .map_err(|e| CliError::Data(format!("creating {}: {e}", path.display())))
}

/// Runs the whole grid for `cfg`:
///
/// 1. one demonstration set in the configured environment plus one per DR
///    exponent (equal episode counts — demo parity across methods);
/// 2. per seed: train ACT, the four DR baselines, and the graph-conditioned
///    policy; run the targeted intervention on the latter;
/// 3. evaluate every method in its own training environment
///    (in-distribution) and with distractors removed (out-of-distribution);
/// 4. write `results.csv` and `report.txt` under `cfg.out_dir`.
///
/// Everything is seeded from the config, so reruns are byte-identical.
pub fn cmd_experiment(cfg: &ExperimentConfig) -> Result<GridOutcome> {
    cfg.validate()?;
    let out = &cfg.out_dir;
    ensure_dir(out)?;
    let demo_dir = out.join("demos");
    let ckpt_dir = out.join("checkpoints");
    let log_dir = out.join("logs");
    let intervention_dir = out.join("intervention");
    for dir in [&demo_dir, &ckpt_dir, &log_dir, &intervention_dir] {
        ensure_dir(dir)?;
    }

    // Demonstrations: the configured environment for ACT and Causal-ACT,
    // plus one randomized set per DR exponent, all with the same episode
    // count and master seed.
    let base_demos = demo_dir.join("base.jsonl");
    cmd_gen_demos(&cfg.env, cfg.demo_episodes, cfg.demo_seed, &base_demos)?;
    let mut dr_demos: Vec<(&str, DrExponent, PathBuf)> = Vec::new();
    for (label, k) in DR_SWEEP {
        let path = demo_dir.join(format!("dr-{label}.jsonl"));
        cmd_gen_demos(&cfg.dr_env(k), cfg.demo_episodes, cfg.demo_seed, &path)?;
        dr_demos.push((label, k, path));
    }

    let ood_env = cfg.ood_env();
    let mut rows: Vec<ResultRow> = Vec::new();
    let mut best_graphs: Vec<String> = Vec::new();

    for &seed in &cfg.seeds {
        // `cmd_train` pins the graph distribution per method; only the seed
        // varies across grid rows.
        let train_seeded = graph_policy::TrainConfig { seed, ..cfg.train.clone() };

        // ACT baseline: all-ones graphs on the confounded demonstrations.
        let act_ckpt = ckpt_dir.join(format!("act-seed{seed}.json"));
        let act_log = log_dir.join(format!("train-act-seed{seed}.csv"));
        cmd_train(&base_demos, Method::Act, &train_seeded, &act_ckpt, &act_log)?;
        let (act_params, _) = load_policy(&act_ckpt)?;
        rows.extend(eval_rows(
            &act_params,
            &GraphSource::AllOnes,
            &cfg.env,
            cfg.eval_episodes,
            &[seed],
            "act",
            Condition::InDistribution,
        )?);
        rows.extend(eval_rows(
            &act_params,
            &GraphSource::AllOnes,
            &ood_env,
            cfg.eval_episodes,
            &[seed],
            "act",
            Condition::OutOfDistribution,
        )?);

        // DR ladder: all-ones graphs on randomized demonstrations; the
        // in-distribution environment is the randomized one they trained in.
        for (label, k, demos) in &dr_demos {
            let method_label = format!("act-dr-{label}");
            let ckpt = ckpt_dir.join(format!("{method_label}-seed{seed}.json"));
            let log = log_dir.join(format!("train-{method_label}-seed{seed}.csv"));
            cmd_train(demos, Method::ActDr, &train_seeded, &ckpt, &log)?;
            let (params, _) = load_policy(&ckpt)?;
            let dr_env = cfg.dr_env(*k);
            rows.extend(eval_rows(
                &params,
                &GraphSource::AllOnes,
                &dr_env,
                cfg.eval_episodes,
                &[seed],
                &method_label,
                Condition::InDistribution,
            )?);
            rows.extend(eval_rows(
                &params,
                &GraphSource::AllOnes,
                &ood_env,
                cfg.eval_episodes,
                &[seed],
                &method_label,
                Condition::OutOfDistribution,
            )?);
        }

        // Causal-ACT: uniform graphs on the confounded demonstrations, then
        // the targeted intervention in the training environment.
        let causal_ckpt = ckpt_dir.join(format!("causal-act-seed{seed}.json"));
        let causal_log = log_dir.join(format!("train-causal-act-seed{seed}.csv"));
        cmd_train(
            &base_demos,
            Method::CausalAct,
            &train_seeded,
            &causal_ckpt,
            &causal_log,
        )?;
        let (causal_params, _) = load_policy(&causal_ckpt)?;
        let seed_dir = intervention_dir.join(format!("seed{seed}"));
        let intervention_config =
            intervention::InterventionConfig { seed, ..cfg.intervention.clone() };
        let intervene =
            cmd_intervene(&causal_ckpt, &cfg.env, &intervention_config, &seed_dir)?;
        best_graphs.push(intervene.best_graph.clone());
        let g_star = GraphSource::File(intervene.model.clone());

        for (graph_source, method_label) in [
            (&g_star, "causal-act"),
            (&GraphSource::Random, "causal-act-random-graph"),
            (&GraphSource::AllOnes, "causal-act-full-graph"),
        ] {
            rows.extend(eval_rows(
                &causal_params,
                graph_source,
                &cfg.env,
                cfg.eval_episodes,
                &[seed],
                method_label,
                Condition::InDistribution,
            )?);
            rows.extend(eval_rows(
                &causal_params,
                graph_source,
                &ood_env,
                cfg.eval_episodes,
                &[seed],
                method_label,
                Condition::OutOfDistribution,
            )?);
        }
    }

    let results_csv = out.join("results.csv");
    let report_txt = out.join("report.txt");
    write_results_csv(&results_csv, &rows)?;
    fs::write(&report_txt, render_tables(&rows))
        .map_err(|e| CliError::Data(format!("writing {}: {e}", report_txt.display())))?;
    Ok(GridOutcome { rows, best_graphs, results_csv, report_txt })
}
