//! Property suite for graph queries, checked against an independent
//! transitive-closure oracle on randomly generated graphs.

use causal_core::{build_policy_graph, CausalGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Warshall transitive closure: `reach[i][j]` is true when a directed path of
/// length >= 1 leads from i to j. Deliberately a different algorithm from the
/// library's BFS so the two can check each other.
fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for &(f, t) in edges {
        reach[f][t] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

fn random_graph(rng: &mut ChaCha8Rng) -> (CausalGraph, usize, Vec<(usize, usize)>) {
    let n = rng.random_range(1..=8);
    let names: Vec<String> = (0..n).map(|i| format!("N{i}")).collect();
    let mut edges = Vec::new();
    for f in 0..n {
        for t in 0..n {
            if rng.random_bool(0.25) {
                edges.push((f, t));
            }
        }
    }
    let named: Vec<(String, String)> =
        edges.iter().map(|&(f, t)| (names[f].clone(), names[t].clone())).collect();
    (CausalGraph::new(names, named).unwrap(), n, edges)
}

#[test]
fn reachability_queries_match_transitive_closure_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for _ in 0..1000 {
        let (graph, n, edges) = random_graph(&mut rng);
        let reach = closure(n, &edges);
        for i in 0..n {
            let node = format!("N{i}");
            let desc = graph.descendants(&node).unwrap();
            let expected: Vec<String> =
                (0..n).filter(|&j| reach[i][j]).map(|j| format!("N{j}")).collect();
            assert_eq!(desc, expected, "descendants of {node} in {:?}", graph.edges());

            let nd = graph.non_descendants(&node).unwrap();
            let expected_nd: Vec<String> = (0..n)
                .filter(|&j| j != i && !reach[i][j])
                .map(|j| format!("N{j}"))
                .collect();
            assert_eq!(nd, expected_nd);

            // The three parts always cover the node set; they are disjoint
            // exactly when the node is not on a cycle through itself.
            let mut cover: Vec<&String> = desc.iter().chain(nd.iter()).collect();
            let name = node.clone();
            cover.push(&name);
            let mut cover: Vec<String> = cover.into_iter().cloned().collect();
            cover.sort();
            cover.dedup();
            assert_eq!(cover.len(), n, "cover misses nodes for {node}");
            let on_cycle = reach[i][i];
            let disjoint = !desc.contains(&node);
            assert_eq!(disjoint, !on_cycle);

            // Single-mechanism solvability is exactly the absence of a direct
            // self-edge, regardless of longer cycles.
            let has_self_edge = edges.contains(&(i, i));
            assert_eq!(graph.has_self_cycle(&node).unwrap(), has_self_edge);
            assert_eq!(graph.is_uniquely_solvable_single(&node).unwrap(), !has_self_edge);
        }
    }
}

#[test]
fn parents_match_direct_edge_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    for _ in 0..300 {
        let (graph, n, edges) = random_graph(&mut rng);
        for t in 0..n {
            let node = format!("N{t}");
            let mut expected: Vec<String> = (0..n)
                .filter(|&f| edges.contains(&(f, t)))
                .map(|f| format!("N{f}"))
                .collect();
            expected.dedup();
            assert_eq!(graph.parents(&node).unwrap(), expected);
        }
    }
}

#[test]
fn policy_graph_family_keeps_action_mechanism_solvable() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for _ in 0..1000 {
        let n_obs = rng.random_range(1..=12);
        let mask: Vec<bool> = (0..n_obs).map(|_| rng.random_bool(0.5)).collect();
        let mut intra = Vec::new();
        for _ in 0..rng.random_range(0..=6) {
            intra.push((rng.random_range(1..=n_obs), rng.random_range(1..=n_obs)));
        }
        let graph = build_policy_graph(n_obs, &mask, &intra).unwrap();
        assert!(
            graph.is_uniquely_solvable_single("A").unwrap(),
            "family member must keep A solvable: mask {mask:?}, intra {intra:?}"
        );

        // Mutant with a direct action self-loop must fail the same check.
        let mut edges: Vec<(String, String)> =
            graph.edges().iter().map(|&(f, t)| (f.to_string(), t.to_string())).collect();
        edges.push(("A".to_string(), "A".to_string()));
        let mutant = CausalGraph::new(graph.nodes().to_vec(), edges).unwrap();
        assert!(!mutant.is_uniquely_solvable_single("A").unwrap());
    }
}
