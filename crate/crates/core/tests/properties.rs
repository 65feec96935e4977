//! Property tests for the structural invariants: view algebra, rank
//! arithmetic, degree conservation, restriction idempotence, and the
//! null distribution of the rank correlation.

use std::collections::BTreeMap;

use impactmap_core::centrality::{degree_centrality, DegreeDirection};
use impactmap_core::measures::{MeasureDescriptor, MeasureRanking, Universe};
use impactmap_core::measures::{DataSource, MeasureFamily};
use impactmap_core::net::{NetworkKind, SparseNetwork};
use impactmap_core::stats::{
    average_rank, correlation_matrix, significance_filter, spearman, SpearmanOutcome,
};
use proptest::prelude::*;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NODES: usize = 8;

fn edge_strategy() -> impl Strategy<Value = Vec<(u32, u32, u32)>> {
    prop::collection::vec(
        (0..NODES as u32, 0..NODES as u32, 1..50u32),
        0..24,
    )
}

fn build(edges: &[(u32, u32, u32)]) -> SparseNetwork {
    let nodes: Vec<String> = (0..NODES).map(|i| format!("N{i}")).collect();
    let mut map = BTreeMap::new();
    for &(s, t, w) in edges {
        if s == t {
            continue;
        }
        *map.entry((s, t)).or_insert(0.0) += w as f64;
    }
    SparseNetwork::from_edge_map(NetworkKind::CitationCount, nodes, map).unwrap()
}

proptest! {
    #[test]
    fn undirected_view_sums_opposite_weights(edges in edge_strategy()) {
        let net = build(&edges);
        let directed = net.view(true, true).adjacency();
        let undirected = net.view(false, true).adjacency();
        for i in 0..NODES {
            let row: BTreeMap<usize, f64> = undirected.out_edges(i).collect();
            let mut expected: BTreeMap<usize, f64> = BTreeMap::new();
            for (t, w) in directed.out_edges(i) {
                *expected.entry(t).or_insert(0.0) += w;
            }
            for j in 0..NODES {
                for (t, w) in directed.out_edges(j) {
                    if t == i && j != i {
                        *expected.entry(j).or_insert(0.0) += w;
                    }
                }
            }
            prop_assert_eq!(row, expected);
        }
    }

    #[test]
    fn unweighted_undirected_view_is_symmetric_boolean(edges in edge_strategy()) {
        let net = build(&edges);
        let adj = net.view(false, false).adjacency();
        for i in 0..NODES {
            for (t, w) in adj.out_edges(i) {
                prop_assert_eq!(w, 1.0);
                prop_assert!(adj.out_edges(t).any(|(u, _)| u == i));
            }
        }
    }

    #[test]
    fn restriction_to_own_nodes_is_identity(edges in edge_strategy()) {
        let net = build(&edges);
        let all = net.nodes().iter().cloned().collect();
        prop_assert_eq!(net.restrict_to(&all).unwrap(), net);
    }

    #[test]
    fn degree_conservation(edges in edge_strategy()) {
        let net = build(&edges);
        prop_assume!(net.edge_count() > 0);
        let view = net.view(true, true);
        let outs = degree_centrality(&view, DegreeDirection::Out).unwrap();
        let ins = degree_centrality(&view, DegreeDirection::In).unwrap();
        let total = net.total_weight();
        prop_assert!((outs.scores.iter().sum::<f64>() - total).abs() < 1e-9);
        prop_assert!((ins.scores.iter().sum::<f64>() - total).abs() < 1e-9);
    }

    #[test]
    fn adding_an_edge_never_decreases_unweighted_degree(
        edges in edge_strategy(),
        s in 0..NODES as u32,
        t in 0..NODES as u32,
    ) {
        prop_assume!(s != t);
        let before = build(&edges);
        let mut extended = edges.clone();
        extended.push((s, t, 1));
        let after = build(&extended);
        let view_b = before.view(true, false);
        let view_a = after.view(true, false);
        let deg_b = degree_centrality(&view_b, DegreeDirection::Out).unwrap();
        let deg_a = degree_centrality(&view_a, DegreeDirection::Out).unwrap();
        prop_assert!(deg_a.scores[s as usize] >= deg_b.scores[s as usize]);
    }

    #[test]
    fn rank_sum_is_triangular(scores in prop::collection::vec(-1e6..1e6f64, 1..120)) {
        let ranks = average_rank(&scores);
        let n = scores.len() as f64;
        prop_assert!((ranks.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn ranks_are_scale_invariant(
        scores in prop::collection::vec(-1e3..1e3f64, 2..60),
        scale in 0.001..1000.0f64,
    ) {
        let scaled: Vec<f64> = scores.iter().map(|x| x * scale).collect();
        prop_assert_eq!(average_rank(&scores), average_rank(&scaled));
    }
}

fn noisy_ranking(id: u8, name: &'static str, scores: Vec<f64>) -> MeasureRanking {
    let n = scores.len();
    let ids: Vec<String> = (0..n).map(|i| format!("J{i:04}")).collect();
    let universe = Universe::from_ids(ids).unwrap();
    let descriptor = MeasureDescriptor {
        id,
        name,
        source: DataSource::Citation,
        family: MeasureFamily::Statistic,
        params: None,
    };
    MeasureRanking::new(descriptor, universe, scores, Vec::new()).unwrap()
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[test]
fn spearman_self_correlation_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let scores: Vec<f64> = (0..50).map(|_| unit(&mut rng)).collect();
    let x = noisy_ranking(1, "x", scores.clone());
    let y = noisy_ranking(2, "y", scores);
    match spearman(&x, &y).unwrap() {
        SpearmanOutcome::Defined { rho, .. } => assert_eq!(rho, 1.0),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn independent_rankings_have_near_zero_correlation() {
    // Null distribution: rho ~ Normal(0, 1/sqrt(n-1)) for n = 1000, so
    // |rho| >= 0.1 has probability ~0.0016; 4 exceedances in 200 trials
    // is far beyond chance in the other direction.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 1000;
    let mut violations = 0;
    for trial in 0..200 {
        let a: Vec<f64> = (0..n).map(|_| unit(&mut rng)).collect();
        let b: Vec<f64> = (0..n).map(|_| unit(&mut rng)).collect();
        let x = noisy_ranking(1, "a", a);
        let y = noisy_ranking(2, "b", b);
        match spearman(&x, &y).unwrap() {
            SpearmanOutcome::Defined { rho, .. } => {
                if rho.abs() >= 0.1 {
                    violations += 1;
                }
            }
            other => panic!("trial {trial}: unexpected {other:?}"),
        }
    }
    assert!(violations <= 4, "{violations} of 200 trials exceeded 0.1");
}

#[test]
fn pure_noise_measure_is_usually_removed() {
    // Four measures agree up to monotone deformations; the fifth is
    // independent noise over only 20 journals. With alpha = 0.05 the
    // noise row stays insignificant with probability ~0.95^4.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut removed_noise = 0;
    let trials = 30;
    for _ in 0..trials {
        let base: Vec<f64> = (0..20).map(|_| unit(&mut rng)).collect();
        let rankings = vec![
            noisy_ranking(1, "base", base.clone()),
            noisy_ranking(2, "scaled", base.iter().map(|x| 3.0 * x + 1.0).collect()),
            noisy_ranking(3, "exp", base.iter().map(|x| x.exp()).collect()),
            noisy_ranking(4, "cubed", base.iter().map(|x| x * x * x).collect()),
            noisy_ranking(5, "noise", (0..20).map(|_| unit(&mut rng)).collect()),
        ];
        let matrix = correlation_matrix(&rankings).unwrap();
        let outcome = significance_filter(&matrix, 0.05).unwrap();
        if outcome.removed.iter().any(|d| d.name == "noise") {
            removed_noise += 1;
        }
        // The concordant block always survives.
        assert!(outcome.kept.len() >= 4);
    }
    assert!(
        removed_noise >= trials * 6 / 10,
        "noise removed only {removed_noise}/{trials} times"
    );
}
