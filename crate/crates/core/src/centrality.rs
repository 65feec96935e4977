//! Centrality algorithms over network views: degree, closeness,
//! betweenness (exact, accumulation-based), and PageRank.
//!
//! Closeness and betweenness accept a [`DistanceConvention`] that maps
//! edge weights to geodesic lengths. The default downstream convention is
//! `InverseWeight` (strong ties are short); `WeightAsLength` is supported
//! so the opposite reading can be tested.
//!
//! Per-source computations are partitioned into fixed 64-source chunks
//! and reduced in chunk order, so results are bit-identical no matter how
//! many threads run them.

use alloc::collections::BinaryHeap;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::net::{Adjacency, NetworkView};

/// Relative tolerance for deciding that two geodesic lengths are equal.
/// Path sums over the same edge multiset can differ by a few ulps
/// depending on addition order; any comparison of path lengths must use
/// this rule so that tie detection is consistent everywhere.
pub const GEODESIC_TIE_TOL: f64 = 1e-12;

/// True when two path lengths are equal under the shared tolerance.
pub fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= GEODESIC_TIE_TOL * max3(1.0, abs(a), abs(b))
}

fn abs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

fn max3(a: f64, b: f64, c: f64) -> f64 {
    let m = if a > b { a } else { b };
    if m > c {
        m
    } else {
        c
    }
}

/// How an edge weight translates into geodesic length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceConvention {
    /// Every edge has length 1.
    Hop,
    /// Length `1/w`: heavier edges are shorter.
    InverseWeight,
    /// Length `w`: the weight is read as a distance.
    WeightAsLength,
}

impl DistanceConvention {
    fn edge_length(self, w: f64) -> f64 {
        match self {
            Self::Hop => 1.0,
            Self::InverseWeight => 1.0 / w,
            Self::WeightAsLength => w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeDirection {
    In,
    Out,
    Undirected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Degree(DegreeDirection),
    Closeness,
    Betweenness,
    PageRank,
}

/// One score per node of the source network, in node order.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityVector {
    pub algorithm: Algorithm,
    pub directed: bool,
    pub weighted: bool,
    pub scores: Vec<f64>,
    /// Set for iterative algorithms (PageRank); `None` elsewhere.
    pub converged: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CentralityError {
    /// Closeness, betweenness, and undirected degree are defined on
    /// undirected views only.
    UndirectedOnly { algorithm: &'static str },
    EmptyNetwork,
    UnknownSource { id: String },
    BadParameter { what: &'static str },
}

impl fmt::Display for CentralityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UndirectedOnly { algorithm } => {
                write!(f, "{algorithm} requires an undirected network view")
            }
            Self::EmptyNetwork => write!(f, "network has no nodes"),
            Self::UnknownSource { id } => write!(f, "source journal {id:?} is not a node"),
            Self::BadParameter { what } => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for CentralityError {}

/// Weighted views sum edge weights; unweighted views count nonzero edges.
/// `Undirected` direction requires an undirected view.
pub fn degree_centrality(
    view: &NetworkView<'_>,
    direction: DegreeDirection,
) -> Result<CentralityVector, CentralityError> {
    if direction == DegreeDirection::Undirected && view.directed() {
        return Err(CentralityError::UndirectedOnly {
            algorithm: "undirected degree",
        });
    }
    let adj = view.adjacency();
    let n = adj.node_count();
    let mut scores = vec![0.0; n];
    match direction {
        DegreeDirection::Out | DegreeDirection::Undirected => {
            for v in 0..n {
                scores[v] = adj.out_strength(v);
            }
        }
        DegreeDirection::In => {
            for v in 0..n {
                for (t, w) in adj.out_edges(v) {
                    scores[t] += w;
                }
            }
        }
    }
    Ok(CentralityVector {
        algorithm: Algorithm::Degree(direction),
        directed: view.directed(),
        weighted: view.weighted(),
        scores,
        converged: None,
    })
}

/// Geodesic lengths from `source` under `distance`; unreachable nodes are
/// `f64::INFINITY`. Unweighted hops run breadth-first; weighted lengths
/// run a label-setting priority-queue search.
fn sssp(adj: &Adjacency, source: usize, distance: DistanceConvention) -> Vec<f64> {
    match distance {
        DistanceConvention::Hop => bfs_dist(adj, source),
        _ => dijkstra_dist(adj, source, distance),
    }
}

fn bfs_dist(adj: &Adjacency, source: usize) -> Vec<f64> {
    let n = adj.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut queue = alloc::collections::VecDeque::new();
    dist[source] = 0.0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v];
        for (t, _) in adj.out_edges(v) {
            if dist[t].is_infinite() {
                dist[t] = dv + 1.0;
                queue.push_back(t);
            }
        }
    }
    dist
}

#[derive(PartialEq)]
struct HeapEntry {
    dist: f64,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, ties by node index for determinism.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra_dist(adj: &Adjacency, source: usize, distance: DistanceConvention) -> Vec<f64> {
    let n = adj.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry {
        dist: 0.0,
        node: source as u32,
    });
    while let Some(HeapEntry { node, .. }) = heap.pop() {
        let v = node as usize;
        if settled[v] {
            continue;
        }
        settled[v] = true;
        let dv = dist[v];
        for (t, w) in adj.out_edges(v) {
            let nd = dv + distance.edge_length(w);
            if nd < dist[t] {
                dist[t] = nd;
                heap.push(HeapEntry {
                    dist: nd,
                    node: t as u32,
                });
            }
        }
    }
    dist
}

/// Public single-source geodesic lengths keyed by journal id; unreachable
/// journals are absent from the map.
pub fn shortest_path_lengths(
    view: &NetworkView<'_>,
    source: &str,
    distance: DistanceConvention,
) -> Result<BTreeMap<String, f64>, CentralityError> {
    let idx = view
        .base()
        .node_index(source)
        .ok_or_else(|| CentralityError::UnknownSource {
            id: String::from(source),
        })?;
    let adj = view.adjacency();
    let dist = sssp(&adj, idx, distance);
    Ok(view
        .base()
        .nodes()
        .iter()
        .zip(&dist)
        .filter(|(_, d)| d.is_finite())
        .map(|(id, d)| (id.clone(), *d))
        .collect())
}

/// Closeness within each node's connected component:
/// `(reachable - 1) / sum of geodesic lengths`, 0 for isolated nodes.
pub fn closeness_centrality(
    view: &NetworkView<'_>,
    distance: DistanceConvention,
) -> Result<CentralityVector, CentralityError> {
    if view.directed() {
        return Err(CentralityError::UndirectedOnly {
            algorithm: "closeness centrality",
        });
    }
    let adj = view.adjacency();
    let n = adj.node_count();
    let scores = reduce_source_chunks(n, |range| {
        let mut partial = vec![0.0; n];
        for s in range {
            let dist = sssp(&adj, s, distance);
            let mut reach = 0u64;
            let mut total = 0.0;
            for (v, d) in dist.iter().enumerate() {
                if v != s && d.is_finite() {
                    reach += 1;
                    total += d;
                }
            }
            if reach > 0 && total > 0.0 {
                partial[s] = reach as f64 / total;
            }
        }
        partial
    });
    Ok(CentralityVector {
        algorithm: Algorithm::Closeness,
        directed: false,
        weighted: view.weighted(),
        scores,
        converged: None,
    })
}

/// Exact betweenness by per-source dependency accumulation, endpoints
/// excluded, geodesic ties split fractionally. Scores count each
/// unordered pair once.
pub fn betweenness_centrality(
    view: &NetworkView<'_>,
    distance: DistanceConvention,
) -> Result<CentralityVector, CentralityError> {
    if view.directed() {
        return Err(CentralityError::UndirectedOnly {
            algorithm: "betweenness centrality",
        });
    }
    let adj = view.adjacency();
    let n = adj.node_count();
    let mut scores = reduce_source_chunks(n, |range| {
        let mut partial = vec![0.0; n];
        let mut scratch = BrandesScratch::new(n);
        for s in range {
            accumulate_from_source(&adj, s, distance, &mut scratch, &mut partial);
        }
        partial
    });
    // Each unordered pair was seen from both endpoints.
    for score in &mut scores {
        *score /= 2.0;
    }
    Ok(CentralityVector {
        algorithm: Algorithm::Betweenness,
        directed: false,
        weighted: view.weighted(),
        scores,
        converged: None,
    })
}

/// Reusable per-source state; allocating it once per chunk keeps the hot
/// loop free of heap churn.
struct BrandesScratch {
    sigma: Vec<f64>,
    dist_hops: Vec<i64>,
    dist: Vec<f64>,
    settled: Vec<bool>,
    delta: Vec<f64>,
    preds: Vec<Vec<u32>>,
    order: Vec<u32>,
    heap: BinaryHeap<HeapEntry>,
    queue: alloc::collections::VecDeque<usize>,
}

impl BrandesScratch {
    fn new(n: usize) -> Self {
        Self {
            sigma: vec![0.0; n],
            dist_hops: vec![-1; n],
            dist: vec![f64::INFINITY; n],
            settled: vec![false; n],
            delta: vec![0.0; n],
            preds: vec![Vec::new(); n],
            order: Vec::with_capacity(n),
            heap: BinaryHeap::new(),
            queue: alloc::collections::VecDeque::new(),
        }
    }

    fn reset(&mut self) {
        self.sigma.iter_mut().for_each(|x| *x = 0.0);
        self.dist_hops.iter_mut().for_each(|x| *x = -1);
        self.dist.iter_mut().for_each(|x| *x = f64::INFINITY);
        self.settled.iter_mut().for_each(|x| *x = false);
        self.delta.iter_mut().for_each(|x| *x = 0.0);
        self.preds.iter_mut().for_each(Vec::clear);
        self.order.clear();
        self.heap.clear();
        self.queue.clear();
    }
}

/// One shortest-path pass from `s` plus reverse accumulation of pair
/// dependencies into `acc`.
fn accumulate_from_source(
    adj: &Adjacency,
    s: usize,
    distance: DistanceConvention,
    scratch: &mut BrandesScratch,
    acc: &mut [f64],
) {
    scratch.reset();
    let BrandesScratch {
        sigma,
        dist_hops,
        dist,
        settled,
        delta,
        preds,
        order,
        heap,
        queue,
    } = scratch;
    sigma[s] = 1.0;

    match distance {
        DistanceConvention::Hop => {
            dist_hops[s] = 0;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                order.push(v as u32);
                for (t, _) in adj.out_edges(v) {
                    if dist_hops[t] < 0 {
                        dist_hops[t] = dist_hops[v] + 1;
                        queue.push_back(t);
                    }
                    if dist_hops[t] == dist_hops[v] + 1 {
                        sigma[t] += sigma[v];
                        preds[t].push(v as u32);
                    }
                }
            }
        }
        _ => {
            dist[s] = 0.0;
            heap.push(HeapEntry {
                dist: 0.0,
                node: s as u32,
            });
            while let Some(HeapEntry { node, .. }) = heap.pop() {
                let v = node as usize;
                if settled[v] {
                    continue;
                }
                settled[v] = true;
                order.push(node);
                let dv = dist[v];
                for (t, w) in adj.out_edges(v) {
                    if settled[t] {
                        continue;
                    }
                    let nd = dv + distance.edge_length(w);
                    if dist[t].is_finite() && same_length(nd, dist[t]) {
                        sigma[t] += sigma[v];
                        preds[t].push(v as u32);
                    } else if nd < dist[t] {
                        dist[t] = nd;
                        sigma[t] = sigma[v];
                        preds[t].clear();
                        preds[t].push(v as u32);
                        heap.push(HeapEntry {
                            dist: nd,
                            node: t as u32,
                        });
                    }
                }
            }
        }
    }

    for &w in order.iter().rev() {
        let w = w as usize;
        let coeff = (1.0 + delta[w]) / sigma[w];
        for &v in &preds[w] {
            delta[v as usize] += sigma[v as usize] * coeff;
        }
        if w != s {
            acc[w] += delta[w];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankParams {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for PageRankParams {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

/// Power iteration with uniform teleport; dangling nodes redistribute
/// their mass uniformly. Iterates until the L1 step change drops below
/// `tol`; non-convergence within `max_iter` is flagged, not fatal.
pub fn pagerank(
    view: &NetworkView<'_>,
    params: &PageRankParams,
) -> Result<CentralityVector, CentralityError> {
    if !(params.damping > 0.0 && params.damping < 1.0) {
        return Err(CentralityError::BadParameter {
            what: "damping must lie in (0, 1)",
        });
    }
    if !(params.tol > 0.0) {
        return Err(CentralityError::BadParameter {
            what: "tol must be positive",
        });
    }
    let adj = view.adjacency();
    let n = adj.node_count();
    if n == 0 {
        return Err(CentralityError::EmptyNetwork);
    }
    let out_strength: Vec<f64> = (0..n).map(|v| adj.out_strength(v)).collect();
    let inv_n = 1.0 / n as f64;
    let d = params.damping;

    let mut p = vec![inv_n; n];
    let mut next = vec![0.0; n];
    let mut converged = false;
    for _ in 0..params.max_iter {
        let dangling_mass: f64 = (0..n)
            .filter(|&v| out_strength[v] == 0.0)
            .map(|v| p[v])
            .sum();
        let base = (1.0 - d) * inv_n + d * dangling_mass * inv_n;
        next.iter_mut().for_each(|x| *x = base);
        for v in 0..n {
            if out_strength[v] == 0.0 {
                continue;
            }
            let share = d * p[v] / out_strength[v];
            for (t, w) in adj.out_edges(v) {
                next[t] += share * w;
            }
        }
        let l1: f64 = p.iter().zip(&next).map(|(a, b)| abs(a - b)).sum();
        core::mem::swap(&mut p, &mut next);
        if l1 < params.tol {
            converged = true;
            break;
        }
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Ok(CentralityVector {
        algorithm: Algorithm::PageRank,
        directed: view.directed(),
        weighted: view.weighted(),
        scores: p,
        converged: Some(converged),
    })
}

/// Fixed power-of-two source chunking so a parallel run reduces in the
/// same order as a sequential one.
const SOURCE_CHUNK: usize = 64;

fn chunk_ranges(n: usize) -> Vec<(usize, usize)> {
    let mut ranges = Vec::new();
    let mut start = 0;
    while start < n {
        let end = usize::min(start + SOURCE_CHUNK, n);
        ranges.push((start, end));
        start = end;
    }
    ranges
}

#[cfg(feature = "parallel")]
fn reduce_source_chunks<F>(n: usize, per_chunk: F) -> Vec<f64>
where
    F: Fn(core::ops::Range<usize>) -> Vec<f64> + Sync,
{
    use rayon::prelude::*;
    let partials: Vec<Vec<f64>> = chunk_ranges(n)
        .into_par_iter()
        .map(|(lo, hi)| per_chunk(lo..hi))
        .collect();
    fold_partials(n, partials)
}

#[cfg(not(feature = "parallel"))]
fn reduce_source_chunks<F>(n: usize, per_chunk: F) -> Vec<f64>
where
    F: Fn(core::ops::Range<usize>) -> Vec<f64> + Sync,
{
    let partials: Vec<Vec<f64>> = chunk_ranges(n)
        .into_iter()
        .map(|(lo, hi)| per_chunk(lo..hi))
        .collect();
    fold_partials(n, partials)
}

fn fold_partials(n: usize, partials: Vec<Vec<f64>>) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for partial in partials {
        for (o, p) in out.iter_mut().zip(&partial) {
            *o += p;
        }
    }
    out
}
