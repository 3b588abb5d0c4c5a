//! Repeated-trial reliability of the local-Markov checker on linear-Gaussian
//! chains: every true independence accepted and every direct parent edge
//! rejected, in at least 95 of 100 seeded trials.

use std::collections::BTreeMap;

use causal_core::{check_local_markov, sample_scm, CausalGraph, Mechanism, Scm, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn chain_scm(c12: f64, c2a: f64) -> Scm {
    let graph = CausalGraph::new(vec!["X1", "X2", "A"], vec![("X1", "X2"), ("X2", "A")]).unwrap();
    let mut mechs = BTreeMap::new();
    mechs.insert("X1".into(), Mechanism::linear::<&str>(vec![], 0.0, 1.0));
    mechs.insert("X2".into(), Mechanism::linear(vec![("X1", c12)], 0.0, 1.0));
    mechs.insert("A".into(), Mechanism::linear(vec![("X2", c2a)], 0.0, 1.0));
    Scm::new(graph, mechs).unwrap()
}

/// One trial: sample the chain and demand every verdict be correct —
/// parent edges dependent, the grandparent screened off.
fn trial_passes(seed: u64, coeff_rng: &mut ChaCha8Rng) -> bool {
    let sign = |r: &mut ChaCha8Rng| if r.random_bool(0.5) { 1.0 } else { -1.0 };
    let c12 = sign(coeff_rng) * coeff_rng.random_range(0.5..1.5);
    let c2a = sign(coeff_rng) * coeff_rng.random_range(0.5..1.5);
    let scm = chain_scm(c12, c2a);
    let data = sample_scm(&scm, 10_000, seed).unwrap();

    for node in ["X1", "X2", "A"] {
        for report in check_local_markov(&data, scm.graph(), node, 0.01).unwrap() {
            let is_parent_edge = scm
                .graph()
                .parents(node)
                .unwrap()
                .contains(&report.node_b);
            let expected = if is_parent_edge { Verdict::Dependent } else { Verdict::Independent };
            if report.verdict != expected {
                return false;
            }
        }
    }
    true
}

#[test]
fn chain_suite_passes_at_least_95_of_100_trials() {
    let mut coeff_rng = ChaCha8Rng::seed_from_u64(2024);
    let passed = (0..100)
        .filter(|&i| trial_passes(7_000 + i as u64, &mut coeff_rng))
        .count();
    assert!(passed >= 95, "only {passed}/100 trials passed");
}
