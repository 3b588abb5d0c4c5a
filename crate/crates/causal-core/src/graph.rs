//! Finite directed graphs over named nodes.
//!
//! Graphs may contain cycles, including direct self-edges; only the SCM
//! sampler insists on acyclicity. Reachability queries are the backbone of
//! the local-Markov check and of the solvability argument for learning a
//! single mechanism: an unknown mechanism for node `V` is uniquely pinned
//! down by observational data exactly when `V` has no direct self-edge.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::CausalError;
use crate::Result;

/// A directed graph over named nodes. Node order is the declaration order;
/// all query results are returned in that order so downstream output is
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalGraph {
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    /// Adjacency as sorted (from, to) index pairs. A `BTreeSet` would work as
    /// well; a sorted Vec keeps iteration order obvious and serialization
    /// stable.
    edges: Vec<(usize, usize)>,
}

/// Serialized form: node names plus string edge pairs.
#[derive(Debug, Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
}

impl CausalGraph {
    /// Builds a graph from node names and directed edges.
    ///
    /// Node names must be unique and non-empty; edges must reference known
    /// nodes. Duplicate edges collapse to one (edge sets, not multisets).
    /// Cycles and self-edges are allowed.
    pub fn new<S: Into<String>>(nodes: Vec<S>, edges: Vec<(S, S)>) -> Result<Self> {
        let nodes: Vec<String> = nodes.into_iter().map(Into::into).collect();
        if nodes.is_empty() {
            return Err(CausalError::InvalidNodes("node set is empty".into()));
        }
        let mut index = BTreeMap::new();
        for (i, name) in nodes.iter().enumerate() {
            if name.is_empty() {
                return Err(CausalError::InvalidNodes("empty node name".into()));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(CausalError::InvalidNodes(format!("duplicate node `{name}`")));
            }
        }
        let mut pairs = Vec::with_capacity(edges.len());
        for (from, to) in edges {
            let (from, to) = (from.into(), to.into());
            let fi = *index
                .get(&from)
                .ok_or_else(|| CausalError::InvalidEdge { from: from.clone(), to: to.clone() })?;
            let ti = *index
                .get(&to)
                .ok_or_else(|| CausalError::InvalidEdge { from: from.clone(), to: to.clone() })?;
            pairs.push((fi, ti));
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self { nodes, index, edges: pairs })
    }

    /// Node names in declaration order.
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Edges as name pairs, sorted by (from, to) node index.
    pub fn edges(&self) -> Vec<(&str, &str)> {
        self.edges
            .iter()
            .map(|&(f, t)| (self.nodes[f].as_str(), self.nodes[t].as_str()))
            .collect()
    }

    /// Whether the directed edge `from -> to` is present.
    pub fn contains_edge(&self, from: &str, to: &str) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&f), Some(&t)) => self.edges.binary_search(&(f, t)).is_ok(),
            _ => false,
        }
    }

    fn index_of(&self, node: &str) -> Result<usize> {
        self.index
            .get(node)
            .copied()
            .ok_or_else(|| CausalError::UnknownNode(node.to_string()))
    }

    fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        // Edges are sorted by (from, to), so each node's out-edges form a
        // contiguous run.
        let start = self.edges.partition_point(|&(f, _)| f < i);
        self.edges[start..]
            .iter()
            .take_while(move |&&(f, _)| f == i)
            .map(|&(_, t)| t)
    }

    /// Direct parents of `node`, in node order. A self-edge makes a node its
    /// own parent.
    pub fn parents(&self, node: &str) -> Result<Vec<String>> {
        let t = self.index_of(node)?;
        Ok(self
            .edges
            .iter()
            .filter(|&&(_, to)| to == t)
            .map(|&(f, _)| self.nodes[f].clone())
            .collect())
    }

    /// All nodes reachable from `node` by a directed path of length >= 1, in
    /// node order. `node` itself appears exactly when it lies on a cycle
    /// (including a self-edge).
    pub fn descendants(&self, node: &str) -> Result<Vec<String>> {
        let s = self.index_of(node)?;
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = self.successors(s).collect();
        while let Some(u) = stack.pop() {
            if !seen[u] {
                seen[u] = true;
                stack.extend(self.successors(u));
            }
        }
        Ok(self
            .nodes
            .iter()
            .enumerate()
            .filter(|&(i, _)| seen[i])
            .map(|(_, n)| n.clone())
            .collect())
    }

    /// Complement of `descendants(node)` with `node` itself always excluded,
    /// in node order. Together with the descendants this covers the node set;
    /// the three parts are disjoint exactly when `node` lies on no cycle.
    pub fn non_descendants(&self, node: &str) -> Result<Vec<String>> {
        let desc = self.descendants(node)?;
        Ok(self
            .nodes
            .iter()
            .filter(|n| n.as_str() != node && !desc.contains(n))
            .cloned()
            .collect())
    }

    /// Whether `node` has a direct self-edge `node -> node`. Longer cycles
    /// through the node do not count.
    pub fn has_self_cycle(&self, node: &str) -> Result<bool> {
        let i = self.index_of(node)?;
        Ok(self.edges.binary_search(&(i, i)).is_ok())
    }

    /// Whether an unknown mechanism for `node` alone is uniquely determined
    /// by the observed joint distribution: true exactly when the node has no
    /// direct self-edge. With a self-edge the node's value enters its own
    /// structural function and distinct mechanisms can induce the same
    /// distribution; without one, every other mechanism is known and the
    /// conditional of `node` given its parents identifies the remaining
    /// mechanism.
    pub fn is_uniquely_solvable_single(&self, node: &str) -> Result<bool> {
        Ok(!self.has_self_cycle(node)?)
    }

    /// Serializes to the on-disk JSON shape `{nodes, edges}`.
    pub fn to_json(&self) -> String {
        let file = GraphFile {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(f, t)| (self.nodes[f].clone(), self.nodes[t].clone()))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serialization cannot fail")
    }

    /// Parses the `{nodes, edges}` JSON shape produced by [`Self::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)
            .map_err(|e| CausalError::InvalidNodes(format!("bad graph JSON: {e}")))?;
        Self::new(file.nodes, file.edges)
    }
}

/// Builds the policy-learning graph family over `n_obs` observation nodes
/// `X1..Xn`, an action node `A`, and a latent confounder `U`.
///
/// Edges: `U -> Xi` for every i; `Xi -> A` exactly where `parent_mask[i-1]`
/// is set; plus the given intra-observation edges `(i, j)` (1-based), each
/// adding `Xi -> Xj`. The action node never gains a self-edge, so the single
/// unknown action mechanism stays uniquely solvable for every member of the
/// family.
pub fn build_policy_graph(
    n_obs: usize,
    parent_mask: &[bool],
    intra_edges: &[(usize, usize)],
) -> Result<CausalGraph> {
    if n_obs == 0 {
        return Err(CausalError::InvalidPolicyGraph("need at least one observation node".into()));
    }
    if parent_mask.len() != n_obs {
        return Err(CausalError::InvalidPolicyGraph(format!(
            "parent mask has {} entries for {} observation nodes",
            parent_mask.len(),
            n_obs
        )));
    }
    let mut nodes: Vec<String> = (1..=n_obs).map(|i| format!("X{i}")).collect();
    nodes.push("A".to_string());
    nodes.push("U".to_string());

    let mut edges: Vec<(String, String)> = Vec::new();
    for i in 1..=n_obs {
        edges.push(("U".to_string(), format!("X{i}")));
    }
    for (i, &on) in parent_mask.iter().enumerate() {
        if on {
            edges.push((format!("X{}", i + 1), "A".to_string()));
        }
    }
    for &(i, j) in intra_edges {
        if i == 0 || i > n_obs || j == 0 || j > n_obs {
            return Err(CausalError::InvalidPolicyGraph(format!(
                "intra-observation edge ({i}, {j}) out of range 1..={n_obs}"
            )));
        }
        edges.push((format!("X{i}"), format!("X{j}")));
    }
    CausalGraph::new(nodes, edges)
}
