//! Directed causal graphs and the statistical checks built on top of them.
//!
//! The crate has three layers:
//!
//! * [`graph`] — finite directed graphs over named nodes, with the reachability
//!   queries (parents, descendants, non-descendants) and the single-mechanism
//!   solvability test used to justify learning one policy mechanism in
//!   isolation.
//! * [`scm`] — linear-Gaussian structural causal models over an acyclic graph,
//!   with deterministic ancestral sampling into a [`scm::DataMatrix`].
//! * [`independence`] — partial-correlation conditional-independence tests
//!   (Fisher z), the local-Markov check for a node against its
//!   non-descendants, and the pairwise observation-disentanglement scan.
//!
//! Everything is deterministic given explicit seeds: sampling uses ChaCha
//! streams, and iteration orders are fixed by construction (sorted node
//! indices), never by hash-map order.

pub mod error;
pub mod graph;
pub mod independence;
pub mod scm;

mod stats;

pub use error::CausalError;
pub use graph::{build_policy_graph, CausalGraph};
pub use independence::{
    check_disentanglement, check_local_markov, CiReport, DisentanglementReport, Verdict,
};
pub use scm::{sample_scm, DataMatrix, Mechanism, Scm};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CausalError>;
