//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building graphs, sampling SCMs, or
/// running independence tests.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CausalError {
    /// A node name was used that the graph does not contain.
    #[error("unknown node `{0}`")]
    UnknownNode(String),

    /// Node names must be unique and non-empty.
    #[error("invalid node set: {0}")]
    InvalidNodes(String),

    /// An edge referenced a node outside the node set.
    #[error("edge ({from} -> {to}) references a node outside the graph")]
    InvalidEdge { from: String, to: String },

    /// A policy-graph construction argument was malformed.
    #[error("invalid policy graph argument: {0}")]
    InvalidPolicyGraph(String),

    /// The SCM failed structural validation.
    #[error("invalid SCM: {0}")]
    InvalidScm(String),

    /// Ancestral sampling requires an acyclic graph.
    #[error("graph contains a directed cycle; ancestral sampling requires a DAG")]
    CyclicGraph,

    /// A request asked for zero samples or otherwise empty data.
    #[error("invalid sample request: {0}")]
    InvalidSampleRequest(String),

    /// Data matrix shape or naming did not line up with the graph.
    #[error("data mismatch: {0}")]
    DataMismatch(String),

    /// Too few samples for the requested conditional-independence test.
    #[error(
        "conditioning set of size {cond} needs at least {needed} samples for a Fisher z test, got {n}"
    )]
    InsufficientSamples { cond: usize, needed: usize, n: usize },

    /// A significance level outside (0, 1).
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),

    /// Non-finite values where finite ones are required.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}
