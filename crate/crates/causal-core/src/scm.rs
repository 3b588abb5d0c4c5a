//! Linear-Gaussian structural causal models and ancestral sampling.
//!
//! Each node's value is an intercept plus a weighted sum of its parents plus
//! Gaussian noise. Sampling walks a deterministic topological order (Kahn's
//! algorithm with the smallest node index chosen first) and draws noise from
//! a ChaCha stream, so a given `(scm, n_samples, seed)` triple always yields
//! the same matrix, bit for bit.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::CausalError;
use crate::graph::CausalGraph;
use crate::Result;

/// One node's structural assignment: `value = intercept + Σ coeff·parent + noise_sd·ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    /// Weight per parent, keyed by parent name. Must cover the node's parent
    /// set exactly.
    pub coefficients: BTreeMap<String, f64>,
    /// Additive constant.
    pub intercept: f64,
    /// Standard deviation of the Gaussian noise term; must be finite and >= 0.
    pub noise_sd: f64,
}

impl Mechanism {
    /// Convenience constructor from `(parent, coefficient)` pairs.
    pub fn linear<S: Into<String>>(coefficients: Vec<(S, f64)>, intercept: f64, noise_sd: f64) -> Self {
        Self {
            coefficients: coefficients.into_iter().map(|(k, v)| (k.into(), v)).collect(),
            intercept,
            noise_sd,
        }
    }
}

/// A graph plus one mechanism per node.
#[derive(Debug, Clone)]
pub struct Scm {
    graph: CausalGraph,
    mechanisms: BTreeMap<String, Mechanism>,
}

impl Scm {
    /// Validates that every node carries exactly one mechanism, that each
    /// mechanism's coefficient keys equal the node's parent set, and that all
    /// numbers are finite with non-negative noise.
    pub fn new(graph: CausalGraph, mechanisms: BTreeMap<String, Mechanism>) -> Result<Self> {
        for node in graph.nodes() {
            let mech = mechanisms
                .get(node)
                .ok_or_else(|| CausalError::InvalidScm(format!("node `{node}` has no mechanism")))?;
            let parents = graph.parents(node)?;
            if mech.coefficients.len() != parents.len()
                || !parents.iter().all(|p| mech.coefficients.contains_key(p))
            {
                return Err(CausalError::InvalidScm(format!(
                    "mechanism for `{node}` must have exactly one coefficient per parent {parents:?}"
                )));
            }
            if !mech.noise_sd.is_finite() || mech.noise_sd < 0.0 {
                return Err(CausalError::InvalidScm(format!(
                    "noise sd for `{node}` must be finite and >= 0, got {}",
                    mech.noise_sd
                )));
            }
            if !mech.intercept.is_finite() || mech.coefficients.values().any(|c| !c.is_finite()) {
                return Err(CausalError::InvalidScm(format!(
                    "mechanism for `{node}` has non-finite numbers"
                )));
            }
        }
        if mechanisms.len() != graph.node_count() {
            return Err(CausalError::InvalidScm(
                "mechanisms reference nodes outside the graph".into(),
            ));
        }
        Ok(Self { graph, mechanisms })
    }

    /// The underlying graph.
    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    /// The mechanism for `node`.
    pub fn mechanism(&self, node: &str) -> Option<&Mechanism> {
        self.mechanisms.get(node)
    }
}

/// Column-named sample matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    columns: Vec<String>,
    values: Vec<f64>,
    n_rows: usize,
}

impl DataMatrix {
    /// Builds a matrix from row-major values; `values.len()` must equal
    /// `columns.len() * n_rows`.
    pub fn new(columns: Vec<String>, values: Vec<f64>, n_rows: usize) -> Result<Self> {
        if columns.is_empty() || values.len() != columns.len() * n_rows {
            return Err(CausalError::DataMismatch(format!(
                "matrix shape mismatch: {} values for {} columns x {} rows",
                values.len(),
                columns.len(),
                n_rows
            )));
        }
        Ok(Self { columns, values, n_rows })
    }

    /// Column names in order.
    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    /// Number of rows.
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Index of the named column.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Copy of the named column.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .column_index(name)
            .ok_or_else(|| CausalError::UnknownNode(name.to_string()))?;
        Ok(self.column_at(j))
    }

    /// Copy of the column at position `j`.
    pub fn column_at(&self, j: usize) -> Vec<f64> {
        let w = self.columns.len();
        (0..self.n_rows).map(|i| self.values[i * w + j]).collect()
    }

    /// Raw row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Deterministic topological order: repeatedly emit the smallest-index node
/// with no remaining incoming edges. `None` when the graph has a cycle.
fn topological_order(graph: &CausalGraph) -> Option<Vec<usize>> {
    let n = graph.node_count();
    let names = graph.nodes();
    let mut indegree = vec![0usize; n];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (from, to) in graph.edges() {
        let f = names.iter().position(|x| x == from).expect("edge endpoints exist");
        let t = names.iter().position(|x| x == to).expect("edge endpoints exist");
        indegree[t] += 1;
        succ[f].push(t);
    }
    let mut ready: std::collections::BTreeSet<usize> =
        (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&i) = ready.iter().next() {
        ready.remove(&i);
        order.push(i);
        for &t in &succ[i] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                ready.insert(t);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Draws `n_samples` joint samples by ancestral sampling.
///
/// Column order matches the graph's node order. Noise is drawn per sample in
/// topological node order from `ChaCha8Rng::seed_from_u64(seed)`, which makes
/// the result bitwise reproducible. Cyclic graphs are refused.
pub fn sample_scm(scm: &Scm, n_samples: usize, seed: u64) -> Result<DataMatrix> {
    if n_samples == 0 {
        return Err(CausalError::InvalidSampleRequest("n_samples must be >= 1".into()));
    }
    let graph = scm.graph();
    let order = topological_order(graph).ok_or(CausalError::CyclicGraph)?;
    let names = graph.nodes();
    let n_cols = names.len();

    // Pre-resolve each node's parent column indices and coefficients so the
    // sampling loop is pure arithmetic.
    let mut resolved: Vec<(usize, f64, f64, Vec<(usize, f64)>)> = Vec::with_capacity(n_cols);
    for &i in &order {
        let node = &names[i];
        let mech = scm.mechanism(node).expect("validated at construction");
        let parents: Vec<(usize, f64)> = mech
            .coefficients
            .iter()
            .map(|(p, &c)| {
                let j = names.iter().position(|x| x == p).expect("validated parent");
                (j, c)
            })
            .collect();
        resolved.push((i, mech.intercept, mech.noise_sd, parents));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0f64; n_samples * n_cols];
    for row in 0..n_samples {
        for (col, intercept, noise_sd, parents) in &resolved {
            let mut v = *intercept;
            for &(j, c) in parents {
                v += c * values[row * n_cols + j];
            }
            let eps: f64 = StandardNormal.sample(&mut rng);
            v += noise_sd * eps;
            values[row * n_cols + *col] = v;
        }
    }
    DataMatrix::new(names.to_vec(), values, n_samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::pearson;

    /// X1 -> X2 -> A with the given edge coefficients and unit noise.
    pub(crate) fn chain_scm(c12: f64, c2a: f64) -> Scm {
        let graph =
            CausalGraph::new(vec!["X1", "X2", "A"], vec![("X1", "X2"), ("X2", "A")]).unwrap();
        let mut mechs = BTreeMap::new();
        mechs.insert("X1".into(), Mechanism::linear::<&str>(vec![], 0.0, 1.0));
        mechs.insert("X2".into(), Mechanism::linear(vec![("X1", c12)], 0.0, 1.0));
        mechs.insert("A".into(), Mechanism::linear(vec![("X2", c2a)], 0.0, 1.0));
        Scm::new(graph, mechs).unwrap()
    }

    #[test]
    fn unit_chain_correlation_matches_variance_propagation() {
        // Var(X1)=1, Var(X2)=2, Var(A)=3, Cov(X1,A)=1, so corr(X1,A)=1/sqrt(3).
        let scm = chain_scm(1.0, 1.0);
        let data = sample_scm(&scm, 100_000, 7).unwrap();
        let x1 = data.column("X1").unwrap();
        let a = data.column("A").unwrap();
        let r = pearson(&x1, &a).unwrap();
        let expected = 1.0 / 3.0f64.sqrt();
        assert!(
            (r - expected).abs() < 0.02,
            "corr(X1, A) = {r}, expected about {expected}"
        );
    }

    #[test]
    fn sampling_is_bitwise_deterministic() {
        let scm = chain_scm(0.8, -1.2);
        let a = sample_scm(&scm, 500, 99).unwrap();
        let b = sample_scm(&scm, 500, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_scm(&scm, 500, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn cyclic_graphs_are_refused() {
        let graph = CausalGraph::new(vec!["X1", "X2"], vec![("X1", "X2"), ("X2", "X1")]).unwrap();
        let mut mechs = BTreeMap::new();
        mechs.insert("X1".into(), Mechanism::linear(vec![("X2", 1.0)], 0.0, 1.0));
        mechs.insert("X2".into(), Mechanism::linear(vec![("X1", 1.0)], 0.0, 1.0));
        let scm = Scm::new(graph, mechs).unwrap();
        assert_eq!(sample_scm(&scm, 10, 0).unwrap_err(), CausalError::CyclicGraph);
    }

    #[test]
    fn mechanisms_must_cover_parents_exactly() {
        let graph = CausalGraph::new(vec!["X1", "A"], vec![("X1", "A")]).unwrap();
        // Missing coefficient for the parent X1.
        let mut mechs = BTreeMap::new();
        mechs.insert("X1".into(), Mechanism::linear::<&str>(vec![], 0.0, 1.0));
        mechs.insert("A".into(), Mechanism::linear::<&str>(vec![], 0.0, 1.0));
        assert!(Scm::new(graph.clone(), mechs).is_err());
        // Extra coefficient for a non-parent.
        let mut mechs = BTreeMap::new();
        mechs.insert("X1".into(), Mechanism::linear(vec![("A", 1.0)], 0.0, 1.0));
        mechs.insert("A".into(), Mechanism::linear(vec![("X1", 1.0)], 0.0, 1.0));
        assert!(Scm::new(graph.clone(), mechs).is_err());
        // Negative noise.
        let mut mechs = BTreeMap::new();
        mechs.insert("X1".into(), Mechanism::linear::<&str>(vec![], 0.0, -1.0));
        mechs.insert("A".into(), Mechanism::linear(vec![("X1", 1.0)], 0.0, 1.0));
        assert!(Scm::new(graph, mechs).is_err());
    }

    #[test]
    fn intercepts_shift_means() {
        let graph = CausalGraph::new(vec!["X1"], Vec::<(&str, &str)>::new()).unwrap();
        let mut mechs = BTreeMap::new();
        mechs.insert("X1".into(), Mechanism::linear::<&str>(vec![], 5.0, 0.5));
        let scm = Scm::new(graph, mechs).unwrap();
        let data = sample_scm(&scm, 20_000, 3).unwrap();
        let x = data.column("X1").unwrap();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        assert!((mean - 5.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn zero_samples_is_an_error() {
        let scm = chain_scm(1.0, 1.0);
        assert!(sample_scm(&scm, 0, 1).is_err());
    }
}
