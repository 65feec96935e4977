//! Clustering of measures by the similarity of the rankings they
//! produce: agglomerative hierarchical clustering over Euclidean
//! distances between correlation-matrix rows, dendrogram cuts, and
//! seeded k-means.
//!
//! Both single and complete linkage are supported; ties in the merge
//! order break deterministically toward the pair with the smallest leaf
//! indices. k-means uses weighted seeding plus Lloyd iterations, best of
//! `restarts` runs by within-cluster sum of squares, and is fully
//! deterministic for a given seed.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::math;
use crate::matrix::Matrix;
use crate::rng;
use crate::stats::CorrelationMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum ClusterError {
    IncompleteMatrix,
    NotSquare,
    TooManyClusters { k: usize, points: usize },
    ZeroClusters,
    NoRestarts,
}

impl fmt::Display for ClusterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IncompleteMatrix => {
                write!(f, "correlation matrix has missing entries; filter before clustering")
            }
            Self::NotSquare => write!(f, "distance matrix must be square"),
            Self::TooManyClusters { k, points } => {
                write!(f, "cannot form {k} clusters from {points} points")
            }
            Self::ZeroClusters => write!(f, "k must be at least 1"),
            Self::NoRestarts => write!(f, "restarts must be at least 1"),
        }
    }
}

impl core::error::Error for ClusterError {}

/// Symmetric pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ClusterError> {
        let n = rows.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            if rows[i].len() != rows[0].len() {
                return Err(ClusterError::NotSquare);
            }
            for j in (i + 1)..n {
                let dist = euclidean(&rows[i], &rows[j]);
                d[i * n + j] = dist;
                d[j * n + i] = dist;
            }
        }
        Ok(Self { n, d })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    math::sqrt(sum)
}

/// Euclidean distances between the rows of a complete correlation matrix.
pub fn row_distance_matrix(matrix: &CorrelationMatrix) -> Result<DistanceMatrix, ClusterError> {
    if !matrix.is_complete() {
        return Err(ClusterError::IncompleteMatrix);
    }
    let n = matrix.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            matrix
                .row(i)
                .iter()
                .map(|v| v.expect("checked complete"))
                .collect()
        })
        .collect();
    DistanceMatrix::from_rows(&rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkage {
    Single,
    Complete,
}

impl Linkage {
    pub fn label(self) -> &'static str {
        match self {
            Self::Single => "single",
            Self::Complete => "complete",
        }
    }

    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Self::Single => {
                if a < b {
                    a
                } else {
                    b
                }
            }
            Self::Complete => {
                if a > b {
                    a
                } else {
                    b
                }
            }
        }
    }
}

/// One merge step. Node references: `0..n` are leaves, `n + k` is the
/// cluster created by merge `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
}

/// Agglomerative clustering with Lance-Williams distance updates.
pub fn hclust(dist: &DistanceMatrix, linkage: Linkage) -> Dendrogram {
    let n = dist.len();
    if n == 0 {
        return Dendrogram {
            n_leaves: 0,
            merges: Vec::new(),
        };
    }
    // Active cluster state: node ref, smallest leaf, current distances.
    let mut node_ref: Vec<usize> = (0..n).collect();
    let mut min_leaf: Vec<usize> = (0..n).collect();
    let mut active: Vec<bool> = vec![true; n];
    let mut d = dist.d.clone();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        // Pick the closest active pair; ties resolve to the lexically
        // smallest (min_leaf_i, min_leaf_j).
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if !active[j] {
                    continue;
                }
                let dij = d[i * n + j];
                let (lo, hi) = if min_leaf[i] < min_leaf[j] {
                    (min_leaf[i], min_leaf[j])
                } else {
                    (min_leaf[j], min_leaf[i])
                };
                let candidate = (dij, lo, hi, i, j);
                let better = match &best {
                    None => true,
                    Some((bd, blo, bhi, _, _)) => {
                        dij < *bd || (dij == *bd && (lo, hi) < (*blo, *bhi))
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
        }
        let (height, _, _, i, j) = best.expect("at least two active clusters");
        merges.push(Merge {
            left: node_ref[i],
            right: node_ref[j],
            height,
        });
        // Fold j into i.
        for k in 0..n {
            if k != i && k != j && active[k] {
                let merged = linkage.combine(d[i * n + k], d[j * n + k]);
                d[i * n + k] = merged;
                d[k * n + i] = merged;
            }
        }
        active[j] = false;
        node_ref[i] = n + step;
        if min_leaf[j] < min_leaf[i] {
            min_leaf[i] = min_leaf[j];
        }
    }
    Dendrogram {
        n_leaves: n,
        merges,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterMethod {
    HclustCut,
    KMeans,
}

/// Labels are contiguous `1..=k`, assigned in order of each cluster's
/// smallest member index.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<u32>,
    pub k: usize,
    pub method: ClusterMethod,
}

/// Clusters are the groups connected by merges strictly below `height`.
pub fn cut(dendrogram: &Dendrogram, height: f64) -> ClusterAssignment {
    let n = dendrogram.n_leaves;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    // Leaves of each internal node, resolved as merges happen.
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for merge in &dendrogram.merges {
        let left = members[merge.left].clone();
        let right = members[merge.right].clone();
        let mut combined = left;
        combined.extend(&right);
        if merge.height < height {
            let root = combined[0];
            for &leaf in &combined[1..] {
                let a = find(&mut parent, root);
                let b = find(&mut parent, leaf);
                parent[b] = a;
            }
        }
        members.push(combined);
    }
    let mut keys = Vec::with_capacity(n);
    for i in 0..n {
        keys.push(find(&mut parent, i));
    }
    relabel(keys, ClusterMethod::HclustCut)
}

/// Renumbers arbitrary group keys into contiguous 1-based labels ordered
/// by each group's first appearance.
fn relabel(keys: Vec<usize>, method: ClusterMethod) -> ClusterAssignment {
    let mut mapping: BTreeMap<usize, u32> = BTreeMap::new();
    let mut next = 1u32;
    let mut labels = Vec::with_capacity(keys.len());
    for key in keys {
        let label = *mapping.entry(key).or_insert_with(|| {
            let l = next;
            next += 1;
            l
        });
        labels.push(label);
    }
    ClusterAssignment {
        labels,
        k: (next - 1) as usize,
        method,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignment: ClusterAssignment,
    pub wcss: f64,
    /// WCSS after every assignment step of the winning run.
    pub wcss_history: Vec<f64>,
    pub chosen_run: u32,
}

/// Lloyd's algorithm from weighted (D^2) seeding, best of `restarts`
/// runs by WCSS with ties to the lowest run index. An empty cluster is
/// re-seeded from the point farthest from its centroid.
pub fn kmeans(
    rows: &Matrix,
    k: usize,
    seed: u64,
    restarts: u32,
    max_iter: u32,
) -> Result<KMeansResult, ClusterError> {
    let n = rows.rows();
    if k == 0 {
        return Err(ClusterError::ZeroClusters);
    }
    if k > n {
        return Err(ClusterError::TooManyClusters { k, points: n });
    }
    if restarts == 0 {
        return Err(ClusterError::NoRestarts);
    }

    let runs = run_indices(restarts);
    let outcomes = map_runs(&runs, |run| {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed.wrapping_add((run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        lloyd(rows, k, max_iter, &mut rng)
    });

    let mut best: Option<(usize, &RunOutcome)> = None;
    for (idx, outcome) in outcomes.iter().enumerate() {
        let better = match best {
            None => true,
            Some((_, b)) => outcome.wcss < b.wcss,
        };
        if better {
            best = Some((idx, outcome));
        }
    }
    let (chosen_run, outcome) = best.expect("at least one restart");
    Ok(KMeansResult {
        assignment: relabel(
            outcome.assignment.iter().map(|&c| c).collect(),
            ClusterMethod::KMeans,
        ),
        wcss: outcome.wcss,
        wcss_history: outcome.history.clone(),
        chosen_run: chosen_run as u32,
    })
}

fn run_indices(restarts: u32) -> Vec<u32> {
    (0..restarts).collect()
}

#[cfg(feature = "parallel")]
fn map_runs<F>(runs: &[u32], f: F) -> Vec<RunOutcome>
where
    F: Fn(u32) -> RunOutcome + Sync,
{
    use rayon::prelude::*;
    runs.par_iter().map(|&r| f(r)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_runs<F>(runs: &[u32], f: F) -> Vec<RunOutcome>
where
    F: Fn(u32) -> RunOutcome + Sync,
{
    runs.iter().map(|&r| f(r)).collect()
}

struct RunOutcome {
    assignment: Vec<usize>,
    wcss: f64,
    history: Vec<f64>,
}

fn lloyd(rows: &Matrix, k: usize, max_iter: u32, rng: &mut ChaCha8Rng) -> RunOutcome {
    let n = rows.rows();
    let dim = rows.cols();
    let mut centroids = seed_centroids(rows, k, rng);
    let mut assignment = vec![0usize; n];
    let mut history = Vec::new();

    for _ in 0..max_iter {
        // Assignment step; ties go to the lowest centroid index.
        let mut changed = false;
        let mut wcss = 0.0;
        for i in 0..n {
            let point = rows.row(i);
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = sq_dist(point, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
            wcss += best_d;
        }
        history.push(wcss);
        if !changed && history.len() > 1 {
            break;
        }

        // Update step.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assignment[i]] += 1;
            for (s, x) in sums[assignment[i]].iter_mut().zip(rows.row(i)) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in sums[c].iter_mut() {
                    *s /= counts[c] as f64;
                }
                centroids[c] = sums[c].clone();
            } else {
                // Re-seed an empty cluster from the farthest point.
                let far = farthest_point(rows, &assignment, &centroids);
                centroids[c] = rows.row(far).to_vec();
            }
        }
    }

    let wcss = *history.last().expect("at least one iteration");
    RunOutcome {
        assignment,
        wcss,
        history,
    }
}

/// Weighted D^2 seeding: first centroid uniform, then each next centroid
/// drawn proportionally to squared distance from the nearest chosen one.
fn seed_centroids(rows: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rows.rows();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(rows.row(rng::index(rng, n)).to_vec());
    let mut weights = vec![0.0f64; n];
    while centroids.len() < k {
        let mut total = 0.0;
        for i in 0..n {
            let point = rows.row(i);
            let mut min_d = f64::INFINITY;
            for centroid in &centroids {
                let d = sq_dist(point, centroid);
                if d < min_d {
                    min_d = d;
                }
            }
            weights[i] = min_d;
            total += min_d;
        }
        if total == 0.0 {
            // All points coincide with existing centroids; fall back to
            // uniform picks to keep k centroids.
            centroids.push(rows.row(rng::index(rng, n)).to_vec());
            continue;
        }
        centroids.push(rows.row(rng::weighted_index(rng, &weights)).to_vec());
    }
    centroids
}

fn farthest_point(rows: &Matrix, assignment: &[usize], centroids: &[Vec<f64>]) -> usize {
    let mut far = 0usize;
    let mut far_d = -1.0;
    for i in 0..rows.rows() {
        let d = sq_dist(rows.row(i), &centroids[assignment[i]]);
        if d > far_d {
            far_d = d;
            far = i;
        }
    }
    far
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Adjusted Rand index between two labelings of the same points: 1 for
/// identical partitions (up to label names), about 0 for independent
/// ones.
pub fn adjusted_rand_index(a: &[u32], b: &[u32]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same points");
    let n = a.len();
    if n < 2 {
        return 1.0;
    }
    let mut table: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    let mut row_totals: BTreeMap<u32, u64> = BTreeMap::new();
    let mut col_totals: BTreeMap<u32, u64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_insert(0) += 1;
        *row_totals.entry(x).or_insert(0) += 1;
        *col_totals.entry(y).or_insert(0) += 1;
    }
    fn choose2(x: u64) -> f64 {
        (x * x.saturating_sub(1)) as f64 / 2.0
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_rows: f64 = row_totals.values().map(|&c| choose2(c)).sum();
    let sum_cols: f64 = col_totals.values().map(|&c| choose2(c)).sum();
    let total_pairs = choose2(n as u64);
    let expected = sum_rows * sum_cols / total_pairs;
    let max_index = (sum_rows + sum_cols) / 2.0;
    if max_index == expected {
        return 1.0;
    }
    (index - expected) / (max_index - expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(points: &[f64]) -> DistanceMatrix {
        // 1-D points; Euclidean distance is |a - b|.
        let rows: Vec<Vec<f64>> = points.iter().map(|&p| vec![p]).collect();
        DistanceMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn identical_rows_have_zero_distance() {
        let d = DistanceMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(d.get(0, 1), 0.0);
    }

    #[test]
    fn identity_rows_distance_is_sqrt2() {
        let d = DistanceMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((d.get(0, 1) - math::sqrt(2.0)).abs() < 1e-15);
    }

    #[test]
    fn triangle_inequality_on_random_rows() {
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let rows: Vec<Vec<f64>> = (0..6)
                .map(|_| (0..4).map(|_| rng::range_f64(&mut rng, -1.0, 1.0)).collect())
                .collect();
            let d = DistanceMatrix::from_rows(&rows).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    for k in 0..6 {
                        assert!(d.get(i, j) <= d.get(i, k) + d.get(k, j) + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn equilateral_triple_merges_at_equal_heights() {
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 0.8660254037844386],
        ];
        let d = DistanceMatrix::from_rows(&rows).unwrap();
        let dend = hclust(&d, Linkage::Single);
        assert_eq!(dend.merges.len(), 2);
        assert!((dend.merges[0].height - 1.0).abs() < 1e-12);
        assert!((dend.merges[1].height - 1.0).abs() < 1e-12);
    }

    #[test]
    fn line_points_trace_both_linkages() {
        // Points at 0, 1, 10: first merge {0,1} at height 1; second at
        // 9 for single linkage, 10 for complete.
        let single = hclust(&dm(&[0.0, 1.0, 10.0]), Linkage::Single);
        assert_eq!(single.merges[0].left, 0);
        assert_eq!(single.merges[0].right, 1);
        assert!((single.merges[0].height - 1.0).abs() < 1e-12);
        assert!((single.merges[1].height - 9.0).abs() < 1e-12);

        let complete = hclust(&dm(&[0.0, 1.0, 10.0]), Linkage::Complete);
        assert!((complete.merges[1].height - 10.0).abs() < 1e-12);
    }

    #[test]
    fn n_leaves_gives_n_minus_1_merges() {
        let d = dm(&[0.0, 2.0, 5.0, 9.0, 14.0, 20.0]);
        let dend = hclust(&d, Linkage::Complete);
        assert_eq!(dend.merges.len(), 5);
    }

    #[test]
    fn merge_heights_monotone_for_both_linkages() {
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for linkage in [Linkage::Single, Linkage::Complete] {
            for _ in 0..20 {
                let rows: Vec<Vec<f64>> = (0..7)
                    .map(|_| (0..3).map(|_| rng::range_f64(&mut rng, 0.0, 1.0)).collect())
                    .collect();
                let d = DistanceMatrix::from_rows(&rows).unwrap();
                let dend = hclust(&d, linkage);
                for pair in dend.merges.windows(2) {
                    assert!(pair[0].height <= pair[1].height + 1e-12);
                }
            }
        }
    }

    #[test]
    fn cut_below_first_merge_gives_singletons() {
        let dend = hclust(&dm(&[0.0, 1.0, 10.0]), Linkage::Complete);
        let cut_low = cut(&dend, 0.5);
        assert_eq!(cut_low.k, 3);
        assert_eq!(cut_low.labels, vec![1, 2, 3]);
    }

    #[test]
    fn cut_above_last_merge_gives_one_cluster() {
        let dend = hclust(&dm(&[0.0, 1.0, 10.0]), Linkage::Complete);
        let cut_high = cut(&dend, 100.0);
        assert_eq!(cut_high.k, 1);
        assert_eq!(cut_high.labels, vec![1, 1, 1]);
    }

    #[test]
    fn cut_line_example_at_five() {
        let dend = hclust(&dm(&[0.0, 1.0, 10.0]), Linkage::Complete);
        let assignment = cut(&dend, 5.0);
        assert_eq!(assignment.k, 2);
        assert_eq!(assignment.labels[0], assignment.labels[1]);
        assert_ne!(assignment.labels[0], assignment.labels[2]);
    }

    #[test]
    fn cut_count_is_monotone_in_height() {
        let d = dm(&[0.0, 1.5, 4.0, 4.2, 9.0, 9.1, 20.0]);
        let dend = hclust(&d, Linkage::Complete);
        let mut last_k = usize::MAX;
        for h in [0.0, 0.5, 1.0, 2.0, 5.0, 12.0, 50.0] {
            let k = cut(&dend, h).k;
            assert!(k <= last_k, "k went up at height {h}");
            last_k = k;
        }
    }

    fn blob_rows() -> Matrix {
        // Two well-separated 2-D blobs of 5 points each.
        let mut rows = Vec::new();
        for i in 0..5 {
            rows.push(vec![0.0 + 0.01 * i as f64, 0.0 - 0.01 * i as f64]);
        }
        for i in 0..5 {
            rows.push(vec![10.0 + 0.01 * i as f64, 10.0 - 0.01 * i as f64]);
        }
        Matrix::from_rows(&rows)
    }

    #[test]
    fn kmeans_recovers_two_blobs() {
        let rows = blob_rows();
        let truth: Vec<u32> = (0..10).map(|i| if i < 5 { 1 } else { 2 }).collect();
        let result = kmeans(&rows, 2, 42, 5, 100).unwrap();
        assert_eq!(adjusted_rand_index(&result.assignment.labels, &truth), 1.0);
    }

    #[test]
    fn kmeans_k_equals_n_zero_wcss() {
        let rows = Matrix::from_rows(&[vec![0.0], vec![5.0], vec![9.0]]);
        let result = kmeans(&rows, 3, 1, 3, 50).unwrap();
        assert_eq!(result.assignment.k, 3);
        assert!(result.wcss.abs() < 1e-18);
    }

    #[test]
    fn kmeans_is_deterministic_for_a_seed() {
        let rows = blob_rows();
        let a = kmeans(&rows, 3, 7, 10, 100).unwrap();
        let b = kmeans(&rows, 3, 7, 10, 100).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kmeans_wcss_never_increases() {
        let rows = blob_rows();
        for seed in 0..20 {
            let result = kmeans(&rows, 3, seed, 1, 100).unwrap();
            for pair in result.wcss_history.windows(2) {
                assert!(
                    pair[1] <= pair[0] + 1e-12,
                    "wcss rose: {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn kmeans_rejects_bad_k() {
        let rows = blob_rows();
        assert!(matches!(
            kmeans(&rows, 0, 1, 1, 10),
            Err(ClusterError::ZeroClusters)
        ));
        assert!(matches!(
            kmeans(&rows, 11, 1, 1, 10),
            Err(ClusterError::TooManyClusters { .. })
        ));
    }

    #[test]
    fn ari_detects_identical_and_permuted_partitions() {
        let a = vec![1, 1, 2, 2, 3, 3];
        let b = vec![9, 9, 4, 4, 7, 7];
        assert_eq!(adjusted_rand_index(&a, &b), 1.0);
    }

    #[test]
    fn ari_penalizes_disagreement() {
        let a = vec![1, 1, 1, 2, 2, 2];
        let b = vec![1, 1, 2, 2, 2, 1];
        let ari = adjusted_rand_index(&a, &b);
        assert!(ari < 0.5, "ari {ari}");
    }

    #[test]
    fn single_linkage_dendrogram_is_ultrametric() {
        // Cophenetic distances from a single-linkage dendrogram obey the
        // max-triangle inequality.
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let rows: Vec<Vec<f64>> = (0..6)
                .map(|_| (0..3).map(|_| rng::range_f64(&mut rng, 0.0, 1.0)).collect())
                .collect();
            let d = DistanceMatrix::from_rows(&rows).unwrap();
            let dend = hclust(&d, Linkage::Single);
            let coph = cophenetic(&dend);
            let n = rows.len();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let lhs = coph[i][j];
                        let rhs = coph[i][k].max(coph[k][j]);
                        assert!(lhs <= rhs + 1e-12);
                    }
                }
            }
        }
    }

    fn cophenetic(dend: &Dendrogram) -> Vec<Vec<f64>> {
        let n = dend.n_leaves;
        let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let mut coph = vec![vec![0.0; n]; n];
        for merge in &dend.merges {
            let left = members[merge.left].clone();
            let right = members[merge.right].clone();
            for &a in &left {
                for &b in &right {
                    coph[a][b] = merge.height;
                    coph[b][a] = merge.height;
                }
            }
            let mut all = left;
            all.extend(right);
            members.push(all);
        }
        coph
    }
}
