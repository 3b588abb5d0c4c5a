//! Result rows, the merged CSV, and the plain-text summary tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Where an evaluation ran relative to the training distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// The method's own training environment.
    InDistribution,
    /// The same task with every distractor slot zeroed.
    OutOfDistribution,
}

impl Condition {
    /// The kebab-case label used in CSV rows and table headers.
    pub fn label(self) -> &'static str {
        match self {
            Condition::InDistribution => "in-distribution",
            Condition::OutOfDistribution => "out-of-distribution",
        }
    }
}

/// One evaluation cell: a method, a condition, a seed, and the three stage
/// success rates over the evaluation episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// Method label, e.g. `act-dr-k3` or `causal-act`.
    pub method: String,
    /// Evaluation environment class.
    pub condition: Condition,
    /// Seed this cell ran under.
    pub seed: u64,
    /// The exact graph mask used, as a bit string — provenance for the
    /// random ablation and the intervention winner alike.
    pub graph: String,
    /// Rollouts aggregated into the rates.
    pub episodes: usize,
    /// Fraction of episodes where the cube was touched.
    pub touched: f64,
    /// Fraction where the cube was lifted to the meet band.
    pub lifted: f64,
    /// Fraction where the full transfer succeeded.
    pub transfer: f64,
}

impl ResultRow {
    /// Enforces the stage ladder and rate ranges.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("touched", self.touched), ("lifted", self.lifted), ("transfer", self.transfer)]
        {
            if !(0.0..=1.0).contains(&v) {
                return Err(CliError::Numeric(format!("{name} rate {v} outside [0, 1]")));
            }
        }
        if self.touched < self.lifted || self.lifted < self.transfer {
            return Err(CliError::Numeric(format!(
                "stage ladder violated: touched {} < lifted {} or lifted < transfer {}",
                self.touched, self.lifted, self.transfer
            )));
        }
        if self.episodes == 0 {
            return Err(CliError::Numeric("row aggregates zero episodes".into()));
        }
        Ok(())
    }
}

/// Header line of the results CSV.
pub const RESULTS_CSV_HEADER: &str = "method,condition,seed,graph,episodes,touched,lifted,transfer";

/// Renders rows to CSV text (header + one line per row, `{:?}` floats so
/// values round-trip exactly).
pub fn results_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:?},{:?},{:?}",
            r.method,
            r.condition.label(),
            r.seed,
            r.graph,
            r.episodes,
            r.touched,
            r.lifted,
            r.transfer
        );
    }
    out
}

/// Validates every row, then writes the merged CSV.
pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    for r in rows {
        r.validate()?;
    }
    fs::write(path, results_to_csv(rows))
        .map_err(|e| CliError::Data(format!("writing {}: {e}", path.display())))
}

/// Reads a results CSV back into rows.
pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("reading {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == RESULTS_CSV_HEADER => {}
        other => {
            return Err(CliError::Data(format!(
                "{}: expected header {RESULTS_CSV_HEADER:?}, got {other:?}",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 8 {
            return Err(CliError::Data(format!(
                "{} line {}: expected 8 fields, got {}",
                path.display(),
                i + 2,
                parts.len()
            )));
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| {
                CliError::Data(format!("{} line {}: {what}: {e}", path.display(), i + 2))
            })
        };
        let condition = match parts[1] {
            "in-distribution" => Condition::InDistribution,
            "out-of-distribution" => Condition::OutOfDistribution,
            other => {
                return Err(CliError::Data(format!(
                    "{} line {}: unknown condition {other:?}",
                    path.display(),
                    i + 2
                )))
            }
        };
        rows.push(ResultRow {
            method: parts[0].to_string(),
            condition,
            seed: parts[2].parse().map_err(|e| {
                CliError::Data(format!("{} line {}: seed: {e}", path.display(), i + 2))
            })?,
            graph: parts[3].to_string(),
            episodes: parts[4].parse().map_err(|e| {
                CliError::Data(format!("{} line {}: episodes: {e}", path.display(), i + 2))
            })?,
            touched: parse_f(parts[5], "touched")?,
            lifted: parse_f(parts[6], "lifted")?,
            transfer: parse_f(parts[7], "transfer")?,
        });
    }
    Ok(rows)
}

/// The canonical method order for report tables: baseline, the DR ladder,
/// then the graph-conditioned method and its two ablations.
pub const METHOD_ORDER: [&str; 8] = [
    "act",
    "act-dr-k0",
    "act-dr-k3",
    "act-dr-k6",
    "act-dr-kinf",
    "causal-act",
    "causal-act-random-graph",
    "causal-act-full-graph",
];

/// Renders the two seed-mean tables (one per condition). Methods appear in
/// [`METHOD_ORDER`]; methods absent from `rows` are skipped, unknown ones
/// are appended in first-seen order so nothing is silently dropped.
pub fn render_tables(rows: &[ResultRow]) -> String {
    let mut methods: Vec<String> = METHOD_ORDER
        .iter()
        .map(|m| m.to_string())
        .filter(|m| rows.iter().any(|r| &r.method == m))
        .collect();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
    }

    let mut out = String::new();
    for condition in [Condition::InDistribution, Condition::OutOfDistribution] {
        let _ = writeln!(out, "== {} (mean over seeds) ==", condition.label());
        let _ = writeln!(out, "{:<28} {:>8} {:>8} {:>8} {:>6}", "method", "touched", "lifted", "transfer", "seeds");
        for method in &methods {
            let cells: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| &r.method == method && r.condition == condition)
                .collect();
            if cells.is_empty() {
                continue;
            }
            let n = cells.len() as f64;
            let mean = |f: fn(&ResultRow) -> f64| cells.iter().map(|r| f(r)).sum::<f64>() / n;
            let _ = writeln!(
                out,
                "{:<28} {:>8.3} {:>8.3} {:>8.3} {:>6}",
                method,
                mean(|r| r.touched),
                mean(|r| r.lifted),
                mean(|r| r.transfer),
                cells.len()
            );
        }
        out.push('\n');
    }
    out
}

/// Mean transfer rate for one method under one condition.
pub fn mean_transfer(rows: &[ResultRow], method: &str, condition: Condition) -> Option<f64> {
    let cells: Vec<f64> = rows
        .iter()
        .filter(|r| r.method == method && r.condition == condition)
        .map(|r| r.transfer)
        .collect();
    if cells.is_empty() {
        None
    } else {
        Some(cells.iter().sum::<f64>() / cells.len() as f64)
    }
}

/// Groups rows by method label, preserving row order within groups.
pub fn rows_by_method(rows: &[ResultRow]) -> BTreeMap<String, Vec<ResultRow>> {
    let mut map: BTreeMap<String, Vec<ResultRow>> = BTreeMap::new();
    for r in rows {
        map.entry(r.method.clone()).or_default().push(r.clone());
    }
    map
}
