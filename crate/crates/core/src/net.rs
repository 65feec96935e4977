//! Sparse weighted directed networks over a journal universe.
//!
//! Two kinds are built from corpus data: a citation network whose edge
//! weights are citation counts, and a usage network whose edge weights are
//! empirical transition probabilities between journals in session
//! clickstreams. Both keep zero-degree journals as isolated nodes so that
//! every measure ranks the same universe.
//!
//! Self-loops are removed by default: density is defined over
//! non-reflexive connections, and same-journal transitions say nothing
//! about journal-to-journal flow. A flag retains them for sensitivity
//! analysis; for the usage kind, rows are renormalized after removal.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{CitationTuple, Clickstream, JournalRegistry};

const ROW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkKind {
    /// Edge weights are positive citation counts.
    CitationCount,
    /// Edge weights are transition probabilities; each non-isolated row
    /// sums to 1 within 1e-9.
    UsageTransition,
}

impl NetworkKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::CitationCount => "citation-count",
            Self::UsageTransition => "usage-transition-probability",
        }
    }
}

/// Immutable sparse directed graph. Nodes are sorted journal ids; edges
/// are stored sorted by `(source, target)` index.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseNetwork {
    kind: NetworkKind,
    nodes: Vec<String>,
    edges: Vec<(u32, u32, f64)>,
}

impl SparseNetwork {
    /// Assembles a network from an edge map over `nodes` (which must be
    /// sorted and unique). Weights must be positive and finite.
    pub fn from_edge_map(
        kind: NetworkKind,
        nodes: Vec<String>,
        edges: BTreeMap<(u32, u32), f64>,
    ) -> Result<Self, NetError> {
        debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]), "nodes must be sorted");
        let n = nodes.len() as u32;
        for (&(s, t), &w) in &edges {
            if s >= n || t >= n {
                return Err(NetError::EdgeOutOfRange);
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(NetError::BadWeight { weight: w });
            }
        }
        let net = Self {
            kind,
            nodes,
            edges: edges.into_iter().map(|((s, t), w)| (s, t, w)).collect(),
        };
        if kind == NetworkKind::UsageTransition {
            net.check_stochastic()?;
        }
        Ok(net)
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(u32, u32, f64)] {
        &self.edges
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|probe| probe.as_str().cmp(id)).ok()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|&(_, _, w)| w).sum()
    }

    /// Ratio of nonzero directed edges over all possible non-reflexive
    /// connections.
    pub fn density(&self) -> Result<f64, NetError> {
        density_from_counts(self.nodes.len() as u64, self.edges.len() as u64)
    }

    /// A directed/weighted interpretation of this network for the graph
    /// algorithms.
    pub fn view(&self, directed: bool, weighted: bool) -> NetworkView<'_> {
        NetworkView {
            base: self,
            directed,
            weighted,
        }
    }

    /// Induced subgraph on the intersection of `journals` with the node
    /// set. Usage rows are renormalized after restriction.
    pub fn restrict_to(&self, journals: &BTreeSet<String>) -> Result<SparseNetwork, NetError> {
        let kept: Vec<String> = self
            .nodes
            .iter()
            .filter(|id| journals.contains(*id))
            .cloned()
            .collect();
        if kept.is_empty() {
            return Err(NetError::EmptyRestriction);
        }
        let mut remap = BTreeMap::new();
        for (new_idx, id) in kept.iter().enumerate() {
            let old_idx = self.node_index(id).expect("kept node came from node list");
            remap.insert(old_idx as u32, new_idx as u32);
        }
        let mut edges = BTreeMap::new();
        for &(s, t, w) in &self.edges {
            if let (Some(&ns), Some(&nt)) = (remap.get(&s), remap.get(&t)) {
                edges.insert((ns, nt), w);
            }
        }
        if self.kind == NetworkKind::UsageTransition {
            renormalize_rows(&mut edges);
        }
        SparseNetwork::from_edge_map(self.kind, kept, edges)
    }

    fn check_stochastic(&self) -> Result<(), NetError> {
        let mut row_sums: BTreeMap<u32, f64> = BTreeMap::new();
        for &(s, _, w) in &self.edges {
            *row_sums.entry(s).or_insert(0.0) += w;
            if w > 1.0 + ROW_SUM_TOL {
                return Err(NetError::BadWeight { weight: w });
            }
        }
        for (&row, &sum) in &row_sums {
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(NetError::RowNotStochastic {
                    row: row as usize,
                    sum,
                });
            }
        }
        Ok(())
    }
}

/// Density from raw counts: `edges / (n * (n - 1))`.
pub fn density_from_counts(nodes: u64, edges: u64) -> Result<f64, NetError> {
    if nodes < 2 {
        return Err(NetError::TooFewNodes { nodes });
    }
    Ok(edges as f64 / (nodes as f64 * (nodes - 1) as f64))
}

/// A directed/weighted interpretation of a base network.
///
/// The undirected view symmetrizes by weight sum, `w'(i,j) = w(i,j) +
/// w(j,i)`, preserving total interaction volume; the unweighted view then
/// maps every nonzero weight to 1.
#[derive(Debug, Clone, Copy)]
pub struct NetworkView<'a> {
    base: &'a SparseNetwork,
    directed: bool,
    weighted: bool,
}

impl<'a> NetworkView<'a> {
    pub fn base(&self) -> &'a SparseNetwork {
        self.base
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn weighted(&self) -> bool {
        self.weighted
    }

    pub fn node_count(&self) -> usize {
        self.base.node_count()
    }

    /// Materializes the view as out-adjacency in CSR form.
    pub fn adjacency(&self) -> Adjacency {
        let mut map: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for &(s, t, w) in &self.base.edges {
            if self.directed {
                *map.entry((s, t)).or_insert(0.0) += w;
            } else if s == t {
                // A self-loop has no opposite direction to fold in.
                *map.entry((s, t)).or_insert(0.0) += w;
            } else {
                *map.entry((s, t)).or_insert(0.0) += w;
                *map.entry((t, s)).or_insert(0.0) += w;
            }
        }
        let n = self.base.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(map.len());
        let mut weights = Vec::with_capacity(map.len());
        offsets.push(0);
        let mut current_row = 0u32;
        for ((s, t), w) in map {
            while current_row < s {
                offsets.push(targets.len());
                current_row += 1;
            }
            targets.push(t);
            weights.push(if self.weighted { w } else { 1.0 });
        }
        while (offsets.len() as u32) <= n as u32 {
            offsets.push(targets.len());
        }
        Adjacency {
            n,
            offsets,
            targets,
            weights,
        }
    }
}

/// Compressed sparse rows of out-edges for one view.
#[derive(Debug, Clone)]
pub struct Adjacency {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl Adjacency {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.offsets[v];
        let hi = self.offsets[v + 1];
        self.targets[lo..hi]
            .iter()
            .zip(&self.weights[lo..hi])
            .map(|(&t, &w)| (t as usize, w))
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn out_strength(&self, v: usize) -> f64 {
        let lo = self.offsets[v];
        let hi = self.offsets[v + 1];
        self.weights[lo..hi].iter().sum()
    }
}

/// Builds the citation network from tuples whose year sets fall inside
/// the requested source/target windows. Edge weight is the summed count
/// over matching tuples; all registry journals appear as nodes.
pub fn build_citation_network(
    tuples: &[CitationTuple],
    source_years: &BTreeSet<i32>,
    target_years: &BTreeSet<i32>,
    registry: &JournalRegistry,
    keep_self_loops: bool,
) -> Result<SparseNetwork, NetError> {
    if source_years.is_empty() || target_years.is_empty() {
        return Err(NetError::EmptyYearFilter);
    }
    let nodes = registry.ids();
    let index: BTreeMap<&str, u32> = nodes
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i as u32))
        .collect();
    let mut edges: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for tuple in tuples {
        if !tuple.source_years.is_subset(source_years)
            || !tuple.target_years.is_subset(target_years)
        {
            continue;
        }
        let s = *index
            .get(tuple.source_journal.as_str())
            .ok_or_else(|| NetError::UnknownJournal {
                id: tuple.source_journal.clone(),
            })?;
        let t = *index
            .get(tuple.target_journal.as_str())
            .ok_or_else(|| NetError::UnknownJournal {
                id: tuple.target_journal.clone(),
            })?;
        if s == t && !keep_self_loops {
            continue;
        }
        *edges.entry((s, t)).or_insert(0.0) += tuple.count as f64;
    }
    if edges.is_empty() {
        return Err(NetError::NoMatchingTuples);
    }
    SparseNetwork::from_edge_map(NetworkKind::CitationCount, nodes, edges)
}

/// Builds the usage transition network from session clickstreams.
///
/// Ordered adjacent pairs are counted across all clickstreams (optionally
/// collapsing consecutive repeats of the same journal first); self
/// transitions are dropped before normalization unless retained, and each
/// row is then normalized to a probability distribution. `nodes` fixes
/// the journal universe; clickstream entries must resolve into it.
pub fn build_usage_network(
    sessions: &[Clickstream],
    nodes: &[String],
    dedup_consecutive: bool,
    keep_self_loops: bool,
) -> Result<SparseNetwork, NetError> {
    let node_list: Vec<String> = nodes.to_vec();
    debug_assert!(node_list.windows(2).all(|w| w[0] < w[1]));
    let index: BTreeMap<&str, u32> = node_list
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i as u32))
        .collect();

    let mut counts: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for stream in sessions {
        let mut prev: Option<u32> = None;
        for journal in stream {
            let cur = *index
                .get(journal.as_str())
                .ok_or_else(|| NetError::UnknownJournal {
                    id: journal.clone(),
                })?;
            if let Some(p) = prev {
                if dedup_consecutive && p == cur {
                    continue;
                }
                if p != cur || keep_self_loops {
                    *counts.entry((p, cur)).or_insert(0) += 1;
                }
            }
            prev = Some(cur);
        }
    }
    if counts.is_empty() {
        return Err(NetError::NoTransitions);
    }

    let mut row_totals: BTreeMap<u32, u64> = BTreeMap::new();
    for (&(s, _), &c) in &counts {
        *row_totals.entry(s).or_insert(0) += c;
    }
    let edges: BTreeMap<(u32, u32), f64> = counts
        .into_iter()
        .map(|((s, t), c)| ((s, t), c as f64 / row_totals[&s] as f64))
        .collect();
    SparseNetwork::from_edge_map(NetworkKind::UsageTransition, node_list, edges)
}

fn renormalize_rows(edges: &mut BTreeMap<(u32, u32), f64>) {
    let mut row_sums: BTreeMap<u32, f64> = BTreeMap::new();
    for (&(s, _), &w) in edges.iter() {
        *row_sums.entry(s).or_insert(0.0) += w;
    }
    for ((s, _), w) in edges.iter_mut() {
        *w /= row_sums[s];
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetError {
    EmptyYearFilter,
    NoMatchingTuples,
    NoTransitions,
    EmptyRestriction,
    EdgeOutOfRange,
    TooFewNodes { nodes: u64 },
    UnknownJournal { id: String },
    BadWeight { weight: f64 },
    RowNotStochastic { row: usize, sum: f64 },
}

impl fmt::Display for NetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyYearFilter => write!(f, "year filters must be non-empty"),
            Self::NoMatchingTuples => {
                write!(f, "no citation tuple matches the year filters; refusing to build an empty network")
            }
            Self::NoTransitions => {
                write!(f, "no session contains two or more requests; usage network would be empty")
            }
            Self::EmptyRestriction => write!(f, "restriction shares no journals with the network"),
            Self::EdgeOutOfRange => write!(f, "edge endpoint outside the node list"),
            Self::TooFewNodes { nodes } => {
                write!(f, "density requires at least 2 nodes, got {nodes}")
            }
            Self::UnknownJournal { id } => write!(f, "journal id {id:?} is not a network node"),
            Self::BadWeight { weight } => write!(f, "edge weight {weight} is not usable"),
            Self::RowNotStochastic { row, sum } => {
                write!(f, "usage row {row} sums to {sum}, expected 1")
            }
        }
    }
}

impl core::error::Error for NetError {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::JournalEntry;
    use alloc::string::ToString;
    use alloc::vec;

    fn registry(ids: &[&str]) -> JournalRegistry {
        let mut reg = JournalRegistry::new();
        for id in ids {
            reg.insert(
                id.to_string(),
                JournalEntry {
                    name: id.to_string(),
                    articles_published: BTreeMap::new(),
                },
            )
            .unwrap();
        }
        reg
    }

    fn tuple(src: &str, tgt: &str, count: u64) -> CitationTuple {
        CitationTuple {
            source_journal: src.to_string(),
            target_journal: tgt.to_string(),
            source_years: BTreeSet::from([2006]),
            target_years: BTreeSet::from([2004, 2005]),
            count,
        }
    }

    fn years(list: &[i32]) -> BTreeSet<i32> {
        list.iter().copied().collect()
    }

    #[test]
    fn parallel_tuples_sum_into_one_edge() {
        let reg = registry(&["J1", "J2"]);
        let net = build_citation_network(
            &[tuple("J1", "J2", 20), tuple("J1", "J2", 30)],
            &years(&[2006]),
            &years(&[2004, 2005]),
            &reg,
            false,
        )
        .unwrap();
        assert_eq!(net.edges(), &[(0, 1, 50.0)]);
    }

    #[test]
    fn out_of_window_tuples_are_excluded() {
        let reg = registry(&["J1", "J2"]);
        let mut old = tuple("J2", "J1", 7);
        old.source_years = years(&[2001]);
        let net = build_citation_network(
            &[tuple("J1", "J2", 20), old],
            &years(&[2006]),
            &years(&[2004, 2005]),
            &reg,
            false,
        )
        .unwrap();
        assert_eq!(net.edge_count(), 1);
    }

    #[test]
    fn empty_match_is_an_error_not_an_empty_graph() {
        let reg = registry(&["J1", "J2"]);
        let err = build_citation_network(
            &[tuple("J1", "J2", 20)],
            &years(&[1999]),
            &years(&[1998]),
            &reg,
            false,
        )
        .unwrap_err();
        assert_eq!(err, NetError::NoMatchingTuples);
    }

    #[test]
    fn citation_conservation_over_included_tuples() {
        let reg = registry(&["J1", "J2", "J3"]);
        let tuples = vec![
            tuple("J1", "J2", 20),
            tuple("J2", "J3", 30),
            tuple("J3", "J1", 8),
        ];
        let net = build_citation_network(&tuples, &years(&[2006]), &years(&[2004, 2005]), &reg, false)
            .unwrap();
        assert_eq!(net.total_weight(), 58.0);
    }

    #[test]
    fn isolated_journals_stay_in_node_set() {
        let reg = registry(&["J1", "J2", "JLONELY"]);
        let net = build_citation_network(
            &[tuple("J1", "J2", 1)],
            &years(&[2006]),
            &years(&[2004, 2005]),
            &reg,
            false,
        )
        .unwrap();
        assert_eq!(net.node_count(), 3);
        assert!(net.node_index("JLONELY").is_some());
    }

    fn node_list(ids: &[&str]) -> Vec<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    fn stream(ids: &[&str]) -> Clickstream {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn usage_weights_from_hand_counted_pairs() {
        // [J1, J2, J1, J3]: N(J1,J2)=1, N(J2,J1)=1, N(J1,J3)=1.
        let net = build_usage_network(
            &[stream(&["J1", "J2", "J1", "J3"])],
            &node_list(&["J1", "J2", "J3"]),
            true,
            false,
        )
        .unwrap();
        let expect = vec![(0u32, 1u32, 0.5), (0, 2, 0.5), (1, 0, 1.0)];
        assert_eq!(net.edges(), expect.as_slice());
    }

    #[test]
    fn consecutive_duplicates_collapse_when_requested() {
        let net = build_usage_network(
            &[stream(&["J1", "J1", "J2"])],
            &node_list(&["J1", "J2"]),
            true,
            false,
        )
        .unwrap();
        assert_eq!(net.edges(), &[(0, 1, 1.0)]);
    }

    #[test]
    fn self_transitions_removed_then_renormalized() {
        // Without dedup, J1->J1 is a self transition; removal leaves
        // J1->J2 carrying the whole row.
        let net = build_usage_network(
            &[stream(&["J1", "J1", "J2"])],
            &node_list(&["J1", "J2"]),
            false,
            false,
        )
        .unwrap();
        assert_eq!(net.edges(), &[(0, 1, 1.0)]);
    }

    #[test]
    fn all_short_sessions_is_an_error() {
        let err = build_usage_network(
            &[stream(&["J1"]), stream(&["J2"])],
            &node_list(&["J1", "J2"]),
            true,
            false,
        )
        .unwrap_err();
        assert_eq!(err, NetError::NoTransitions);
    }

    #[test]
    fn usage_rows_are_stochastic_after_restriction() {
        let sessions = vec![
            stream(&["J1", "J2", "J3", "J1", "J4"]),
            stream(&["J2", "J4", "J1", "J3"]),
            stream(&["J4", "J3", "J2"]),
        ];
        let nodes = node_list(&["J1", "J2", "J3", "J4"]);
        let net = build_usage_network(&sessions, &nodes, true, false).unwrap();
        let restricted = net
            .restrict_to(&BTreeSet::from(["J1".to_string(), "J2".to_string(), "J3".to_string()]))
            .unwrap();
        let mut sums = BTreeMap::new();
        for &(s, _, w) in restricted.edges() {
            *sums.entry(s).or_insert(0.0) += w;
        }
        for (_, sum) in sums {
            assert!((sum - 1.0f64).abs() < 1e-9);
        }
    }

    #[test]
    fn restriction_to_full_node_set_is_identity() {
        let reg = registry(&["J1", "J2", "J3"]);
        let net = build_citation_network(
            &[tuple("J1", "J2", 5), tuple("J2", "J3", 2)],
            &years(&[2006]),
            &years(&[2004, 2005]),
            &reg,
            false,
        )
        .unwrap();
        let all: BTreeSet<String> = net.nodes().iter().cloned().collect();
        assert_eq!(net.restrict_to(&all).unwrap(), net);
    }

    #[test]
    fn restriction_takes_induced_subgraph() {
        let reg = registry(&["J1", "J2", "J3", "J4", "J5"]);
        let net = build_citation_network(
            &[tuple("J1", "J2", 5), tuple("J2", "J3", 2), tuple("J4", "J5", 9)],
            &years(&[2006]),
            &years(&[2004, 2005]),
            &reg,
            false,
        )
        .unwrap();
        let keep: BTreeSet<String> =
            ["J1", "J2", "J3"].iter().map(|s| s.to_string()).collect();
        let sub = net.restrict_to(&keep).unwrap();
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.edges(), &[(0, 1, 5.0), (1, 2, 2.0)]);
    }

    #[test]
    fn empty_restriction_is_an_error() {
        let reg = registry(&["J1", "J2"]);
        let net = build_citation_network(
            &[tuple("J1", "J2", 5)],
            &years(&[2006]),
            &years(&[2004, 2005]),
            &reg,
            false,
        )
        .unwrap();
        let err = net.restrict_to(&BTreeSet::from(["ZZ".to_string()])).unwrap_err();
        assert_eq!(err, NetError::EmptyRestriction);
    }

    #[test]
    fn density_of_complete_and_empty_graphs() {
        assert_eq!(density_from_counts(3, 6).unwrap(), 1.0);
        assert_eq!(density_from_counts(3, 0).unwrap(), 0.0);
        assert!(density_from_counts(1, 0).is_err());
    }

    #[test]
    fn density_matches_reported_scale() {
        let d = density_from_counts(7_388, 897_608).unwrap();
        assert!((d - 0.01645).abs() < 5e-5, "density {d}");
    }

    #[test]
    fn undirected_view_symmetrizes_by_sum() {
        let reg = registry(&["J1", "J2"]);
        let net = build_citation_network(
            &[tuple("J1", "J2", 5), tuple("J2", "J1", 3)],
            &years(&[2006]),
            &years(&[2004, 2005]),
            &reg,
            false,
        )
        .unwrap();
        let adj = net.view(false, true).adjacency();
        let out0: Vec<(usize, f64)> = adj.out_edges(0).collect();
        let out1: Vec<(usize, f64)> = adj.out_edges(1).collect();
        assert_eq!(out0, vec![(1, 8.0)]);
        assert_eq!(out1, vec![(0, 8.0)]);
    }

    #[test]
    fn unweighted_undirected_view_is_symmetric_boolean() {
        let reg = registry(&["J1", "J2", "J3"]);
        let net = build_citation_network(
            &[tuple("J1", "J2", 5), tuple("J3", "J1", 2)],
            &years(&[2006]),
            &years(&[2004, 2005]),
            &reg,
            false,
        )
        .unwrap();
        let adj = net.view(false, false).adjacency();
        for v in 0..3 {
            for (t, w) in adj.out_edges(v) {
                assert_eq!(w, 1.0);
                assert!(adj.out_edges(t).any(|(u, _)| u == v));
            }
        }
    }
}
