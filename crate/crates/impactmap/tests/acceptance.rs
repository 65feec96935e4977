//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them all). The suite
//! combines exact arithmetic checks, oracle comparisons against
//! brute-force reference computations, numeric contracts for the
//! iterative algorithms, and an end-to-end run on a corpus with planted
//! structure.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use impactmap::cache::dir_digests;
use impactmap::config::RunConfig;
use impactmap::io::docs::CorrelationDetails;
use impactmap::pipeline::{Pipeline, Stage};
use impactmap_core::centrality::{
    betweenness_centrality, closeness_centrality, pagerank, same_length, DistanceConvention,
    PageRankParams,
};
use impactmap_core::cluster::{
    adjusted_rand_index, cut, hclust, kmeans, DistanceMatrix, Linkage, Merge,
};
use impactmap_core::corpus::{resolve_requests, sessionize, UnknownIdPolicy};
use impactmap_core::factor::{decompose, varimax};
use impactmap_core::matrix::Matrix;
use impactmap_core::measures::{
    catalogue, derive_statistics, full_battery, BatteryOptions, MeasureRanking,
    MeasureWindows, Universe,
};
use impactmap_core::net::{
    build_citation_network, build_usage_network, density_from_counts, NetworkKind,
    SparseNetwork,
};
use impactmap_core::stats::{spearman, SpearmanOutcome};
use impactmap_core::synth::{generate, SessionLength, SynthConfig};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(number: u32, label: &str, ok: bool, detail: &str) {
    println!(
        "acceptance {number:02} {label}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance {number:02} {label} failed: {detail}");
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn pick(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

// ---------------------------------------------------------------- 1

#[test]
fn criterion_01_density_arithmetic() {
    let started = Instant::now();
    // Exact rational bounds: lo/10^4 <= e / (n(n-1)) <= hi/10^4.
    fn in_band(nodes: u128, edges: u128, lo: u128, hi: u128) -> bool {
        let pairs = nodes * (nodes - 1);
        lo * pairs <= 10_000 * edges && 10_000 * edges <= hi * pairs
    }
    let citation_exact = in_band(7_388, 897_608, 164, 165);
    let usage_exact = in_band(7_575, 3_617_368, 630, 631);
    let citation_float = density_from_counts(7_388, 897_608).unwrap();
    let usage_float = density_from_counts(7_575, 3_617_368).unwrap();
    let elapsed = started.elapsed();
    let ok = citation_exact
        && usage_exact
        && (0.0164..=0.0165).contains(&citation_float)
        && (0.0630..=0.0631).contains(&usage_float)
        && elapsed.as_micros() < 1_000;
    verdict(
        1,
        "density-arithmetic",
        ok,
        &format!(
            "citation {citation_float:.6}, usage {usage_float:.6}, {}us",
            elapsed.as_micros()
        ),
    );
}

// ---------------------------------------------------------------- 2

fn random_connected_graph(
    rng: &mut ChaCha8Rng,
    n: usize,
    dyadic: bool,
) -> Vec<(usize, usize, f64)> {
    let mut edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let weight = |rng: &mut ChaCha8Rng| {
        if dyadic {
            [0.25, 0.5, 1.0, 2.0, 4.0][pick(rng, 5)]
        } else {
            0.5 + 2.0 * unit(rng)
        }
    };
    for v in 1..n {
        let parent = pick(rng, v);
        let w = weight(rng);
        edges.insert((parent.min(v), parent.max(v)), w);
    }
    for _ in 0..pick(rng, n + 1) {
        let a = pick(rng, n);
        let b = pick(rng, n);
        if a != b {
            let w = weight(rng);
            edges.entry((a.min(b), a.max(b))).or_insert(w);
        }
    }
    edges.into_iter().map(|((u, v), w)| (u, v, w)).collect()
}

fn network_from_undirected(n: usize, edges: &[(usize, usize, f64)]) -> SparseNetwork {
    let nodes: Vec<String> = (0..n).map(|i| format!("N{i:02}")).collect();
    let map: BTreeMap<(u32, u32), f64> = edges
        .iter()
        .map(|&(u, v, w)| ((u as u32, v as u32), w))
        .collect();
    SparseNetwork::from_edge_map(NetworkKind::CitationCount, nodes, map).unwrap()
}

/// Exhaustive geodesic census for an unordered pair by DFS over simple
/// paths: shortest length, count, and interior pass-through counts.
fn enumerate_pair(adj: &[Vec<(usize, f64)>], s: usize, t: usize) -> (f64, u64, Vec<u64>) {
    struct Census {
        best: f64,
        count: u64,
        through: Vec<u64>,
    }
    fn dfs(
        adj: &[Vec<(usize, f64)>],
        v: usize,
        t: usize,
        length: f64,
        census: &mut Census,
        interior: &mut Vec<usize>,
        visited: &mut Vec<bool>,
    ) {
        if census.best.is_finite() && length > census.best && !same_length(length, census.best)
        {
            return;
        }
        if v == t {
            if !census.best.is_finite()
                || (length < census.best && !same_length(length, census.best))
            {
                census.best = length;
                census.count = 1;
                census.through.iter_mut().for_each(|x| *x = 0);
                for &p in interior.iter() {
                    census.through[p] += 1;
                }
            } else if same_length(length, census.best) {
                census.count += 1;
                for &p in interior.iter() {
                    census.through[p] += 1;
                }
            }
            return;
        }
        visited[v] = true;
        for &(next, len) in &adj[v] {
            if !visited[next] {
                if next != t {
                    interior.push(next);
                }
                dfs(adj, next, t, length + len, census, interior, visited);
                if next != t {
                    interior.pop();
                }
            }
        }
        visited[v] = false;
    }
    let n = adj.len();
    let mut census = Census {
        best: f64::INFINITY,
        count: 0,
        through: vec![0; n],
    };
    dfs(
        adj,
        s,
        t,
        0.0,
        &mut census,
        &mut Vec::new(),
        &mut vec![false; n],
    );
    (census.best, census.count, census.through)
}

fn brute_force_centralities(
    n: usize,
    edges: &[(usize, usize, f64)],
    convention: DistanceConvention,
) -> (Vec<f64>, Vec<f64>) {
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(u, v, w) in edges {
        let len = match convention {
            DistanceConvention::Hop => 1.0,
            DistanceConvention::InverseWeight => 1.0 / w,
            DistanceConvention::WeightAsLength => w,
        };
        adj[u].push((v, len));
        adj[v].push((u, len));
    }
    let mut dist_sum = vec![0.0; n];
    let mut betweenness = vec![0.0; n];
    for s in 0..n {
        for t in (s + 1)..n {
            let (dist, count, through) = enumerate_pair(&adj, s, t);
            assert!(dist.is_finite(), "generated graph must be connected");
            dist_sum[s] += dist;
            dist_sum[t] += dist;
            for v in 0..n {
                if v != s && v != t && through[v] > 0 {
                    betweenness[v] += through[v] as f64 / count as f64;
                }
            }
        }
    }
    let closeness = dist_sum
        .iter()
        .map(|&total| (n as f64 - 1.0) / total)
        .collect();
    (closeness, betweenness)
}

#[test]
fn criterion_02_centrality_oracle_suite() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE9919);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let n = 4 + (case % 9);
        let edges = random_connected_graph(&mut rng, n, case % 2 == 0);
        let net = network_from_undirected(n, &edges);
        for (convention, weighted) in [
            (DistanceConvention::Hop, false),
            (DistanceConvention::InverseWeight, true),
        ] {
            let (oracle_clo, oracle_bc) = brute_force_centralities(n, &edges, convention);
            let clo = closeness_centrality(&net.view(false, weighted), convention).unwrap();
            let bc = betweenness_centrality(&net.view(false, weighted), convention).unwrap();
            for v in 0..n {
                worst = worst
                    .max((clo.scores[v] - oracle_clo[v]).abs())
                    .max((bc.scores[v] - oracle_bc[v]).abs());
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let ok = worst < 1e-9 && elapsed < 30.0;
    verdict(
        2,
        "centrality-oracle-suite",
        ok,
        &format!("200 graphs, both conventions, max |err| {worst:.3e}, {elapsed:.1}s"),
    );
}

// ---------------------------------------------------------------- 3

#[test]
fn criterion_03_pagerank_contracts() {
    let params = PageRankParams::default();
    let mut sums_ok = true;
    let mut detail = String::new();

    // (a) uniform on vertex-transitive graphs.
    let mut uniform_worst: f64 = 0.0;
    for n in 3..=50usize {
        let nodes: Vec<String> = (0..n).map(|i| format!("N{i:03}")).collect();
        let cycle: BTreeMap<(u32, u32), f64> = (0..n)
            .map(|i| ((i as u32, ((i + 1) % n) as u32), 1.0))
            .collect();
        let mut complete = BTreeMap::new();
        for i in 0..n {
            for j in (i + 1)..n {
                complete.insert((i as u32, j as u32), 1.0);
            }
        }
        for (edges, directed) in [(cycle, true), (complete, false)] {
            let net =
                SparseNetwork::from_edge_map(NetworkKind::CitationCount, nodes.clone(), edges)
                    .unwrap();
            let pr = pagerank(&net.view(directed, true), &params).unwrap();
            sums_ok &= (pr.scores.iter().sum::<f64>() - 1.0).abs() < 1e-8;
            for &s in &pr.scores {
                uniform_worst = uniform_worst.max((s - 1.0 / n as f64).abs());
            }
        }
    }

    // (b) fixed-point residual against a dense operator application.
    let mut rng = ChaCha8Rng::seed_from_u64(0x97AC3);
    let mut residual_worst: f64 = 0.0;
    for _ in 0..100 {
        let n = 10 + pick(&mut rng, 191);
        let mut edges: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for _ in 0..(3 * n) {
            let a = pick(&mut rng, n);
            let b = pick(&mut rng, n);
            if a != b {
                edges.insert((a as u32, b as u32), 0.25 + 4.0 * unit(&mut rng));
            }
        }
        if edges.is_empty() {
            continue;
        }
        let nodes: Vec<String> = (0..n).map(|i| format!("N{i:03}")).collect();
        let edge_list: Vec<(u32, u32, f64)> =
            edges.iter().map(|(&(a, b), &w)| (a, b, w)).collect();
        let net = SparseNetwork::from_edge_map(NetworkKind::CitationCount, nodes, edges).unwrap();
        let pr = pagerank(&net.view(true, true), &params).unwrap();
        let p = &pr.scores;
        sums_ok &= (p.iter().sum::<f64>() - 1.0).abs() < 1e-8;

        let mut out_strength = vec![0.0; n];
        for &(a, _, w) in &edge_list {
            out_strength[a as usize] += w;
        }
        let d = params.damping;
        let dangling: f64 = (0..n)
            .filter(|&v| out_strength[v] == 0.0)
            .map(|v| p[v])
            .sum();
        let mut gp = vec![(1.0 - d) / n as f64 + d * dangling / n as f64; n];
        for &(a, b, w) in &edge_list {
            gp[b as usize] += d * p[a as usize] * w / out_strength[a as usize];
        }
        let residual: f64 = p.iter().zip(&gp).map(|(x, y)| (x - y).abs()).sum();
        residual_worst = residual_worst.max(residual);
    }

    detail.push_str(&format!(
        "uniform err {uniform_worst:.3e}, residual {residual_worst:.3e} (< {:.0e})",
        10.0 * params.tol
    ));
    let ok = uniform_worst < 1e-10 && residual_worst < 10.0 * params.tol && sums_ok;
    verdict(3, "pagerank-contracts", ok, &detail);
}

// ---------------------------------------------------------------- 4

fn ranking_of(id: u8, scores: &[f64]) -> MeasureRanking {
    let ids: Vec<String> = (0..scores.len()).map(|i| format!("J{i:03}")).collect();
    let universe = Universe::from_ids(ids).unwrap();
    let descriptor = catalogue().into_iter().find(|d| d.id == id).unwrap();
    MeasureRanking::new(descriptor, universe, scores.to_vec(), Vec::new()).unwrap()
}

/// Tie-free ranks by argsort, computed independently of the library.
fn plain_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    for (position, &idx) in order.iter().enumerate() {
        ranks[idx] = (position + 1) as f64;
    }
    ranks
}

#[test]
fn criterion_04_spearman_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x59EA);
    let n = 50usize;
    let mut worst_gap: f64 = 0.0;
    let mut worst_monotone: f64 = 0.0;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..n).map(|_| unit(&mut rng)).collect();
        let y: Vec<f64> = (0..n).map(|_| unit(&mut rng)).collect();
        let rho = match spearman(&ranking_of(1, &x), &ranking_of(2, &y)).unwrap() {
            SpearmanOutcome::Defined { rho, .. } => rho,
            other => panic!("unexpected {other:?}"),
        };
        let rx = plain_ranks(&x);
        let ry = plain_ranks(&y);
        let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
        let closed = 1.0 - 6.0 * d2 / (n as f64 * ((n * n - 1) as f64));
        worst_gap = worst_gap.max((rho - closed).abs());

        let transformed: Vec<f64> = x.iter().map(|v| (3.0 * v).exp() + 7.0).collect();
        let rho_t = match spearman(&ranking_of(1, &transformed), &ranking_of(2, &y)).unwrap() {
            SpearmanOutcome::Defined { rho, .. } => rho,
            other => panic!("unexpected {other:?}"),
        };
        worst_monotone = worst_monotone.max((rho - rho_t).abs());
    }
    let ok = worst_gap < 1e-12 && worst_monotone < 1e-12;
    verdict(
        4,
        "spearman-closed-form",
        ok,
        &format!("1000 pairs n=50, closed-form gap {worst_gap:.3e}, monotone gap {worst_monotone:.3e}"),
    );
}

// ---------------------------------------------------------------- 5

#[test]
fn criterion_05_pca_contracts() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9CA5);
    let n = 37usize;
    let mut worst_trace: f64 = 0.0;
    let mut worst_recon: f64 = 0.0;
    let mut worst_ortho: f64 = 0.0;
    let mut worst_prop: f64 = 0.0;
    for _ in 0..500 {
        let b = Matrix::from_rows(
            &(0..n)
                .map(|_| (0..n).map(|_| 2.0 * unit(&mut rng) - 1.0).collect())
                .collect::<Vec<_>>(),
        );
        let a = b.transpose().matmul(&b);
        let trace: f64 = (0..n).map(|i| a.get(i, i)).sum();
        let model = decompose(a.clone(), Vec::new()).unwrap();
        worst_trace =
            worst_trace.max((model.eigenvalues.iter().sum::<f64>() - trace).abs());

        let v = &model.eigenvectors;
        let mut recon = Matrix::zeros(n, n);
        for c in 0..n {
            let ev = model.eigenvalues[c];
            for i in 0..n {
                let vic = v.get(i, c);
                for j in 0..n {
                    recon.set(i, j, recon.get(i, j) + ev * vic * v.get(j, c));
                }
            }
        }
        worst_recon = worst_recon.max(recon.frobenius_distance(&a));
        let vtv = v.transpose().matmul(v);
        worst_ortho = worst_ortho.max(vtv.frobenius_distance(&Matrix::identity(n)));
        worst_prop =
            worst_prop.max((model.variance_proportion.iter().sum::<f64>() - 1.0).abs());
    }
    let ok =
        worst_trace < 1e-8 && worst_recon < 1e-8 && worst_ortho < 1e-9 && worst_prop < 1e-9;
    verdict(
        5,
        "pca-contracts",
        ok,
        &format!(
            "500 PSD 37x37: trace {worst_trace:.2e}, recon {worst_recon:.2e}, VtV {worst_ortho:.2e}, prop {worst_prop:.2e}, {:.1}s",
            started.elapsed().as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------- 6

fn simple_structure() -> Matrix {
    Matrix::from_rows(&[
        vec![0.9, 0.0],
        vec![0.8, 0.0],
        vec![0.85, 0.0],
        vec![0.7, 0.0],
        vec![0.95, 0.0],
        vec![0.0, 0.8],
        vec![0.0, 0.9],
        vec![0.0, 0.75],
    ])
}

fn rotate_cols(l: &Matrix, theta: f64) -> Matrix {
    let (c, s) = (theta.cos(), theta.sin());
    l.matmul(&Matrix::from_rows(&[vec![c, s], vec![-s, c]]))
}

fn max_abs_diff_up_to_perm_sign(a: &Matrix, b: &Matrix) -> f64 {
    let mut best = f64::INFINITY;
    for perm in [[0usize, 1], [1, 0]] {
        for signs in [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]] {
            let mut worst: f64 = 0.0;
            for i in 0..a.rows() {
                for j in 0..2 {
                    worst =
                        worst.max((a.get(i, j) - signs[j] * b.get(i, perm[j])).abs());
                }
            }
            best = best.min(worst);
        }
    }
    best
}

fn varimax_criterion_normalized(l: &Matrix) -> f64 {
    // Kaiser-normalized criterion, recomputed independently here.
    let mut rows = Vec::new();
    for i in 0..l.rows() {
        let h: f64 = (0..l.cols()).map(|j| l.get(i, j) * l.get(i, j)).sum::<f64>().sqrt();
        rows.push(
            (0..l.cols())
                .map(|j| if h > 0.0 { l.get(i, j) / h } else { 0.0 })
                .collect::<Vec<f64>>(),
        );
    }
    let p = l.rows() as f64;
    (0..l.cols())
        .map(|j| {
            let sum2: f64 = rows.iter().map(|r| r[j] * r[j]).sum();
            let sum4: f64 = rows.iter().map(|r| r[j].powi(4)).sum();
            sum4 / p - (sum2 / p) * (sum2 / p)
        })
        .sum()
}

#[test]
fn criterion_06_varimax_contracts() {
    let target = simple_structure();

    // Fixed point: an already-simple structure is left alone.
    let fixed = varimax(&target, 2, 1e-12, 200).unwrap();
    let fixed_point_gap = (varimax_criterion_normalized(&fixed.rotated_loadings)
        - varimax_criterion_normalized(&target))
    .abs();

    // Communality preservation through an arbitrary rotation.
    let skewed = rotate_cols(&target, 0.61);
    let rotated = varimax(&skewed, 2, 1e-12, 200).unwrap();
    let mut communality_gap: f64 = 0.0;
    for i in 0..skewed.rows() {
        let before: f64 = (0..2).map(|j| skewed.get(i, j).powi(2)).sum();
        let after: f64 = (0..2)
            .map(|j| rotated.rotated_loadings.get(i, j).powi(2))
            .sum();
        communality_gap = communality_gap.max((before - after).abs());
    }

    // Recovery of a 45-degree entangled structure.
    let entangled = rotate_cols(&target, std::f64::consts::FRAC_PI_4);
    let recovered = varimax(&entangled, 2, 1e-12, 200).unwrap();
    let recovery_gap = max_abs_diff_up_to_perm_sign(&recovered.rotated_loadings, &target);
    let criterion_increased = varimax_criterion_normalized(&recovered.rotated_loadings)
        > varimax_criterion_normalized(&entangled);

    let ok = fixed_point_gap < 1e-10
        && communality_gap < 1e-8
        && recovery_gap < 1e-6
        && criterion_increased
        && fixed.converged
        && recovered.converged;
    verdict(
        6,
        "varimax-contracts",
        ok,
        &format!(
            "fixed-point {fixed_point_gap:.2e}, communality {communality_gap:.2e}, recovery {recovery_gap:.2e}"
        ),
    );
}

// ---------------------------------------------------------------- 7

fn brute_agglomerate(dist: &DistanceMatrix, linkage: Linkage) -> Vec<Merge> {
    let n = dist.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::new();
    let mut next_ref = n;
    while clusters.len() > 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let mut dd = match linkage {
                    Linkage::Single => f64::INFINITY,
                    Linkage::Complete => f64::NEG_INFINITY,
                };
                for &x in &clusters[a].1 {
                    for &y in &clusters[b].1 {
                        let v = dist.get(x, y);
                        dd = match linkage {
                            Linkage::Single => dd.min(v),
                            Linkage::Complete => dd.max(v),
                        };
                    }
                }
                let lo = *clusters[a].1.iter().min().unwrap();
                let hi = *clusters[b].1.iter().min().unwrap();
                let (lo, hi) = (lo.min(hi), lo.max(hi));
                let better = match &best {
                    None => true,
                    Some((bd, blo, bhi, _, _)) => {
                        dd < *bd || (dd == *bd && (lo, hi) < (*blo, *bhi))
                    }
                };
                if better {
                    best = Some((dd, lo, hi, a, b));
                }
            }
        }
        let (height, _, _, a, b) = best.unwrap();
        let (ref_b, members_b) = clusters.remove(b);
        let (ref_a, members_a) = clusters[a].clone();
        merges.push(Merge {
            left: ref_a,
            right: ref_b,
            height,
        });
        let mut merged = members_a;
        merged.extend(members_b);
        clusters[a] = (next_ref, merged);
        next_ref += 1;
    }
    merges
}

#[test]
fn criterion_07_clustering_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC10C);
    let mut hclust_ok = true;
    for _case in 0..100 {
        let n = 3 + pick(&mut rng, 6);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| unit(&mut rng)).collect())
            .collect();
        let dist = DistanceMatrix::from_rows(&rows).unwrap();
        for linkage in [Linkage::Single, Linkage::Complete] {
            let fast = hclust(&dist, linkage);
            let slow = brute_agglomerate(&dist, linkage);
            hclust_ok &= fast.merges.len() == slow.len();
            for (f, s) in fast.merges.iter().zip(&slow) {
                hclust_ok &= (f.left, f.right) == (s.left, s.right)
                    && (f.height - s.height).abs() < 1e-12;
            }
        }
    }

    let mut wcss_ok = true;
    for run in 0..100u64 {
        let n = 8 + pick(&mut rng, 20);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..4).map(|_| unit(&mut rng)).collect())
            .collect();
        let result = kmeans(&Matrix::from_rows(&rows), 3, run, 1, 100).unwrap();
        for pair in result.wcss_history.windows(2) {
            wcss_ok &= pair[1] <= pair[0] + 1e-12;
        }
    }

    let mut cut_ok = true;
    for _case in 0..20 {
        let n = 5 + pick(&mut rng, 10);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| unit(&mut rng)).collect())
            .collect();
        let dist = DistanceMatrix::from_rows(&rows).unwrap();
        let dend = hclust(&dist, Linkage::Complete);
        let top = dend.merges.last().unwrap().height;
        let mut last_k = usize::MAX;
        let sweep = 12;
        for i in 0..=sweep {
            let h = top * 1.1 * i as f64 / sweep as f64;
            let k = cut(&dend, h).k;
            cut_ok &= k <= last_k;
            last_k = k;
        }
    }

    let ok = hclust_ok && wcss_ok && cut_ok;
    verdict(
        7,
        "clustering-oracles",
        ok,
        &format!("hclust oracle {hclust_ok}, wcss monotone {wcss_ok}, cut monotone {cut_ok}"),
    );
}

// ---------------------------------------------------------------- 8

fn planted_config(out_dir: std::path::PathBuf) -> RunConfig {
    let mut config: RunConfig = serde_json::from_value(serde_json::json!({
        "synth": {
            "n_journals": 1000,
            "n_fields": 2,
            "year_min": 2003,
            "year_max": 2006,
            "session_count": 30000,
            "session_length": {"geometric": {"p": 0.25}},
            "within_field_affinity": 0.9,
            "prestige_skew": 0.5,
            "seed": 90210
        },
        "analysis": {"kmeans_k": 2, "kmeans_seed": 777, "kmeans_restarts": 50}
    }))
    .unwrap();
    config.out_dir = out_dir;
    config
}

fn quartiles(values: &mut Vec<f64>) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    let q = |fraction: f64| values[(fraction * (values.len() - 1) as f64).round() as usize];
    (q(0.25), q(0.75))
}

#[test]
fn criterion_08_end_to_end_planted_structure() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let pipeline = Pipeline::new(planted_config(dir.path().join("out")), None).unwrap();
    pipeline.run(Stage::Report).unwrap();
    let out = pipeline.out_dir();

    // (a) mean within-usage correlation exceeds the usage-citation
    // cross-block mean, over the full matrix.
    let details: CorrelationDetails =
        serde_json::from_str(&std::fs::read_to_string(out.join("correlation/details.json")).unwrap())
            .unwrap();
    let full = impactmap::io::correlation::read_matrix(&out.join("correlation/matrix.csv"), &details)
        .unwrap();
    let usage_ids: BTreeSet<u8> = (24..=39).collect();
    let mut within = Vec::new();
    let mut cross = Vec::new();
    let ids = &details.measure_ids;
    for i in 0..full.len() {
        for j in (i + 1)..full.len() {
            if let Some(rho) = full.value(i, j) {
                match (usage_ids.contains(&ids[i]), usage_ids.contains(&ids[j])) {
                    (true, true) => within.push(rho),
                    (true, false) | (false, true) => cross.push(rho),
                    _ => {}
                }
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let within_mean = mean(&within);
    let cross_mean = mean(&cross);
    let block_ok = within_mean > cross_mean;

    // (b) k-means with k=2 over the kept matrix separates usage from
    // citation measures.
    let mut kmeans_labels = BTreeMap::new();
    let mut reader = csv::Reader::from_path(out.join("clusters/kmeans.csv")).unwrap();
    for record in reader.records() {
        let record = record.unwrap();
        let id: u8 = record.get(0).unwrap().parse().unwrap();
        let label: u32 = record.get(1).unwrap().parse().unwrap();
        kmeans_labels.insert(id, label);
    }
    let kept = &details.kept_ids;
    let predicted: Vec<u32> = kept.iter().map(|id| kmeans_labels[id]).collect();
    let truth: Vec<u32> = kept
        .iter()
        .map(|id| if usage_ids.contains(id) { 1 } else { 2 })
        .collect();
    let ari = adjusted_rand_index(&predicted, &truth);
    let ari_ok = ari >= 0.8;

    // (c) PC1 coordinates separate the two blocks: disjoint
    // interquartile ranges (sign-agnostic by construction).
    let mut usage_pc1 = Vec::new();
    let mut citation_pc1 = Vec::new();
    let mut reader = csv::Reader::from_path(out.join("map/map.csv")).unwrap();
    for record in reader.records() {
        let record = record.unwrap();
        let id: u8 = record.get(0).unwrap().parse().unwrap();
        let pc1: f64 = record.get(3).unwrap().parse().unwrap();
        if usage_ids.contains(&id) {
            usage_pc1.push(pc1);
        } else {
            citation_pc1.push(pc1);
        }
    }
    let (uq1, uq3) = quartiles(&mut usage_pc1);
    let (cq1, cq3) = quartiles(&mut citation_pc1);
    let iqr_ok = uq1 > cq3 || cq1 > uq3;

    let elapsed = started.elapsed().as_secs_f64();
    let ok = block_ok && ari_ok && iqr_ok && elapsed < 300.0;
    verdict(
        8,
        "end-to-end-planted-structure",
        ok,
        &format!(
            "within {within_mean:.3} vs cross {cross_mean:.3}, ARI {ari:.3}, usage IQR [{uq1:.2},{uq3:.2}] vs citation [{cq1:.2},{cq3:.2}], {elapsed:.0}s"
        ),
    );
}

// ---------------------------------------------------------------- 9

#[test]
fn criterion_09_performance_gate() {
    let config = SynthConfig {
        n_journals: 2000,
        n_fields: 2,
        year_min: 2003,
        year_max: 2006,
        session_count: 100_000,
        session_length: SessionLength::Geometric { p: 0.15 },
        within_field_affinity: 0.9,
        prestige_skew: 0.5,
        seed: 4242,
    };
    let bundle = generate(&config).unwrap();
    let census: BTreeSet<i32> = [2006].into();
    let targets: BTreeSet<i32> = [2004, 2005].into();
    let citation =
        build_citation_network(&bundle.tuples, &census, &targets, &bundle.registry, false)
            .unwrap();
    let (resolved, _) =
        resolve_requests(&bundle.requests, &bundle.articles, UnknownIdPolicy::Strict).unwrap();
    let sessions = sessionize(&resolved);
    let usage = build_usage_network(&sessions, citation.nodes(), true, false).unwrap();
    let scale_ok = usage.node_count() == 2000 && usage.edge_count() >= 200_000;

    let windows = MeasureWindows::for_census_year(2006);
    let inputs = derive_statistics(
        &bundle.registry,
        &bundle.tuples,
        &bundle.articles,
        Some(&resolved),
        &windows,
    );
    let options = BatteryOptions::default();

    let eight = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap();
    let started = Instant::now();
    let parallel = eight
        .install(|| full_battery(&citation, Some(&usage), &inputs, &options))
        .unwrap();
    let parallel_elapsed = started.elapsed().as_secs_f64();

    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let serial_started = Instant::now();
    let serial = single
        .install(|| full_battery(&citation, Some(&usage), &inputs, &options))
        .unwrap();
    let serial_elapsed = serial_started.elapsed().as_secs_f64();

    let mut worst: f64 = 0.0;
    assert_eq!(parallel.rankings.len(), serial.rankings.len());
    for (a, b) in parallel.rankings.iter().zip(&serial.rankings) {
        for (x, y) in a.scores().iter().zip(b.scores()) {
            worst = worst.max((x - y).abs());
        }
    }
    let ok = scale_ok && parallel_elapsed < 600.0 && worst <= 1e-9;
    verdict(
        9,
        "performance-gate",
        ok,
        &format!(
            "usage net {} nodes / {} edges, 39 measures in {parallel_elapsed:.0}s (8 threads) vs {serial_elapsed:.0}s (1 thread), max gap {worst:.1e}",
            usage.node_count(),
            usage.edge_count()
        ),
    );
}

// ---------------------------------------------------------------- 10

#[test]
fn criterion_10_determinism_gate() {
    let dir = tempfile::tempdir().unwrap();
    let mut first_config = planted_config(dir.path().join("first"));
    let mut second_config = planted_config(dir.path().join("second"));
    // A smaller corpus keeps this gate fast; same config both times.
    for config in [&mut first_config, &mut second_config] {
        config.synth.as_mut().unwrap().n_journals = 150;
        config.synth.as_mut().unwrap().session_count = 4000;
    }
    Pipeline::new(first_config, None)
        .unwrap()
        .run(Stage::Report)
        .unwrap();
    Pipeline::new(second_config, None)
        .unwrap()
        .run(Stage::Report)
        .unwrap();

    let first = dir_digests(&dir.path().join("first")).unwrap();
    let second = dir_digests(&dir.path().join("second")).unwrap();
    let ok = !first.is_empty() && first == second;
    verdict(
        10,
        "determinism-gate",
        ok,
        &format!("{} files compared byte-for-byte", first.len()),
    );
}
