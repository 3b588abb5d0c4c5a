//! Conditional-independence testing: Fisher z on partial correlations, the
//! local-Markov check of a node against its non-descendants, and the pairwise
//! observation-disentanglement scan.
//!
//! Verdicts compare the Fisher-transformed partial correlation against the
//! two-sided normal critical value for the requested significance level.
//! A variable that is an exact affine function of the conditioning set has no
//! residual variation; such degenerate pairs carry no testable conditional
//! association and are skipped rather than given a fabricated verdict.

use serde::{Deserialize, Serialize};

use crate::error::CausalError;
use crate::graph::CausalGraph;
use crate::scm::DataMatrix;
use crate::stats::{normal_quantile, ols_residuals, partial_correlation, pearson};
use crate::Result;

/// Outcome of one conditional-independence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Independent,
    Dependent,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Independent => write!(f, "independent"),
            Verdict::Dependent => write!(f, "dependent"),
        }
    }
}

/// One tested pair: the variables, the conditioning set, the partial
/// correlation used as the test statistic, and the verdict at level `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiReport {
    pub node_a: String,
    pub node_b: String,
    pub cond_set: Vec<String>,
    /// Partial correlation (dimensionless, in [-1, 1]).
    pub statistic: f64,
    pub n_samples: usize,
    pub alpha: f64,
    pub verdict: Verdict,
}

impl CiReport {
    /// CSV column header matching [`Self::to_csv_row`].
    pub fn csv_header() -> &'static str {
        "node_a,node_b,cond_set,stat,n,alpha,verdict"
    }

    /// One CSV row; the conditioning set is `;`-joined inside its field.
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.node_a,
            self.node_b,
            self.cond_set.join(";"),
            self.statistic,
            self.n_samples,
            self.alpha,
            self.verdict
        )
    }
}

/// Result of the pairwise disentanglement scan.
#[derive(Debug, Clone)]
pub struct DisentanglementReport {
    /// One report per testable pair (degenerate pairs are omitted).
    pub reports: Vec<CiReport>,
    /// Pairs skipped because at least one side had no residual variance
    /// given the conditioning set.
    pub skipped_pairs: usize,
    /// Fraction of tested pairs judged dependent; 0 when nothing was
    /// testable.
    pub dependent_fraction: f64,
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CausalError::InvalidAlpha(alpha));
    }
    Ok(())
}

/// Fisher z verdict for partial correlation `r` with `cond` conditioning
/// variables and `n` samples. Requires `n - cond - 3 >= 1`.
fn fisher_z_verdict(r: f64, n: usize, cond: usize, alpha: f64) -> Result<Verdict> {
    let needed = cond + 4;
    if n < needed {
        return Err(CausalError::InsufficientSamples { cond, needed, n });
    }
    let df = (n - cond - 3) as f64;
    // atanh(±1) is ±inf, which compares as dependent — the right answer for
    // an exactly deterministic pair.
    let z = r.atanh() * df.sqrt();
    let crit = normal_quantile(1.0 - alpha / 2.0);
    Ok(if z.abs() > crit { Verdict::Dependent } else { Verdict::Independent })
}

/// Residuals of `y` given conditioning columns, plus a degeneracy flag: the
/// residual is considered degenerate when it retains essentially none of the
/// variable's scale (the variable is an affine function of the conditioners).
fn conditioned(y: &[f64], z: &[&[f64]]) -> Result<(Vec<f64>, bool)> {
    if z.is_empty() {
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let centered: Vec<f64> = y.iter().map(|v| v - mean).collect();
        let var = centered.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
        let scale = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
        return Ok((centered, var <= 1e-10 * scale.max(1e-300)));
    }
    let resid = ols_residuals(y, z)?;
    let var = resid.iter().map(|v| v * v).sum::<f64>() / resid.len() as f64;
    let scale = {
        let m = y.iter().sum::<f64>() / y.len() as f64;
        (y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / y.len() as f64).max(1e-300)
    };
    Ok((resid, var <= 1e-10 * scale))
}

/// Checks the local-Markov property of `node`: for every non-descendant `w`,
/// tests `node ⟂ w | parents(node)`. A `w` that is itself a parent is tested
/// with the remaining parents as the conditioning set (independence given a
/// set containing `w` would be vacuous); for a real edge that test should
/// come back dependent.
///
/// `data` columns must be exactly the graph's nodes. Returns one report per
/// non-descendant, in node order; a node with no non-descendants yields an
/// empty list.
pub fn check_local_markov(
    data: &DataMatrix,
    graph: &CausalGraph,
    node: &str,
    alpha: f64,
) -> Result<Vec<CiReport>> {
    validate_alpha(alpha)?;
    let mut graph_nodes: Vec<&str> = graph.nodes().iter().map(String::as_str).collect();
    let mut data_cols: Vec<&str> = data.columns().iter().map(String::as_str).collect();
    graph_nodes.sort_unstable();
    data_cols.sort_unstable();
    if graph_nodes != data_cols {
        return Err(CausalError::DataMismatch(
            "data columns do not match graph nodes".into(),
        ));
    }

    let parents = graph.parents(node)?;
    let target = data.column(node)?;
    let n = data.n_rows();
    let mut reports = Vec::new();
    for w in graph.non_descendants(node)? {
        let cond_names: Vec<String> = parents.iter().filter(|p| **p != w).cloned().collect();
        let cond_cols: Vec<Vec<f64>> =
            cond_names.iter().map(|p| data.column(p)).collect::<Result<_>>()?;
        let cond_refs: Vec<&[f64]> = cond_cols.iter().map(Vec::as_slice).collect();

        // Degrees-of-freedom check up front so degenerate shortcuts cannot
        // mask an undersized sample.
        let needed = cond_refs.len() + 4;
        if n < needed {
            return Err(CausalError::InsufficientSamples { cond: cond_refs.len(), needed, n });
        }

        let w_col = data.column(&w)?;
        let (statistic, verdict) = match partial_correlation(&target, &w_col, &cond_refs)? {
            // No residual variation on one side: nothing left to associate.
            None => (0.0, Verdict::Independent),
            Some(r) => (r, fisher_z_verdict(r, n, cond_refs.len(), alpha)?),
        };
        reports.push(CiReport {
            node_a: node.to_string(),
            node_b: w.clone(),
            cond_set: cond_names,
            statistic,
            n_samples: n,
            alpha,
            verdict,
        });
    }
    Ok(reports)
}

/// Pairwise scan over observation dimensions: tests every pair of `obs`
/// columns for independence given all `cond` columns (in the intended use,
/// the previous action vector).
///
/// Dimensions that are affine functions of the conditioning set have no
/// residual variance; pairs touching them are counted in `skipped_pairs` and
/// excluded from the dependent fraction.
pub fn check_disentanglement(
    obs: &DataMatrix,
    cond: &DataMatrix,
    alpha: f64,
) -> Result<DisentanglementReport> {
    validate_alpha(alpha)?;
    if obs.n_rows() != cond.n_rows() {
        return Err(CausalError::DataMismatch(format!(
            "observation rows ({}) and conditioning rows ({}) differ",
            obs.n_rows(),
            cond.n_rows()
        )));
    }
    let n = obs.n_rows();
    if n < 3 {
        return Err(CausalError::InsufficientSamples { cond: cond.columns().len(), needed: 3, n });
    }
    let cond_cols: Vec<Vec<f64>> = (0..cond.columns().len()).map(|j| cond.column_at(j)).collect();
    let cond_refs: Vec<&[f64]> = cond_cols.iter().map(Vec::as_slice).collect();
    let needed = cond_refs.len() + 4;
    if n < needed {
        return Err(CausalError::InsufficientSamples { cond: cond_refs.len(), needed, n });
    }

    // Residualize every observation dimension once; pairs then reduce to
    // plain correlations between residuals.
    let d = obs.columns().len();
    let mut residuals: Vec<Option<Vec<f64>>> = Vec::with_capacity(d);
    for j in 0..d {
        let col = obs.column_at(j);
        let (resid, degenerate) = conditioned(&col, &cond_refs)?;
        residuals.push(if degenerate { None } else { Some(resid) });
    }

    let cond_names = cond.columns().to_vec();
    let mut reports = Vec::new();
    let mut skipped = 0usize;
    let mut dependent = 0usize;
    for i in 0..d {
        for j in (i + 1)..d {
            match (&residuals[i], &residuals[j]) {
                (Some(ri), Some(rj)) => {
                    let r = pearson(ri, rj).unwrap_or(0.0);
                    let verdict = fisher_z_verdict(r, n, cond_refs.len(), alpha)?;
                    if verdict == Verdict::Dependent {
                        dependent += 1;
                    }
                    reports.push(CiReport {
                        node_a: obs.columns()[i].clone(),
                        node_b: obs.columns()[j].clone(),
                        cond_set: cond_names.clone(),
                        statistic: r,
                        n_samples: n,
                        alpha,
                        verdict,
                    });
                }
                _ => skipped += 1,
            }
        }
    }
    let tested = reports.len();
    Ok(DisentanglementReport {
        reports,
        skipped_pairs: skipped,
        dependent_fraction: if tested == 0 { 0.0 } else { dependent as f64 / tested as f64 },
    })
}
