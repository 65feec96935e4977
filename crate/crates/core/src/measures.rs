//! The catalogue of 39 journal impact measures and the battery that
//! evaluates them.
//!
//! Measures 1-23 derive from citation data, 24-39 from usage data. Most
//! are centrality variants over the two networks, parameterized by the
//! directed/weighted factors; the rest are per-article statistics
//! (impact factor, immediacy, half-life, h-index, totals, probabilities)
//! and hybrids (per-article PageRank, Y-factor).
//!
//! Every ranking in one run shares a single journal [`Universe`], so the
//! correlation analysis downstream always compares full vectors. Journals
//! for which a measure is undefined (for example, no articles in the
//! window) score 0 and carry an `undefined` flag instead of being
//! dropped.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::centrality::{
    self, CentralityError, DegreeDirection, DistanceConvention, PageRankParams,
};
use crate::corpus::{ArticleMap, CitationTuple, JournalRegistry, ResolvedRequest};
use crate::net::{NetworkKind, SparseNetwork};
use crate::stats::average_rank;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DataSource {
    Citation,
    Usage,
}

impl DataSource {
    pub fn label(self) -> &'static str {
        match self {
            Self::Citation => "citation",
            Self::Usage => "usage",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureFamily {
    Statistic,
    Degree(DegreeDirection),
    Closeness,
    Betweenness,
    PageRank,
    Hybrid,
}

impl MeasureFamily {
    pub fn label(self) -> &'static str {
        match self {
            Self::Statistic => "statistic",
            Self::Degree(_) => "degree",
            Self::Closeness => "closeness",
            Self::Betweenness => "betweenness",
            Self::PageRank => "pagerank",
            Self::Hybrid => "hybrid",
        }
    }

    pub fn is_network(self) -> bool {
        matches!(
            self,
            Self::Degree(_) | Self::Closeness | Self::Betweenness | Self::PageRank
        )
    }
}

/// Directed/weighted factors of a network measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ViewParams {
    pub directed: bool,
    pub weighted: bool,
}

impl ViewParams {
    pub fn label(self) -> &'static str {
        match (self.directed, self.weighted) {
            (true, true) => "directed, weighted",
            (true, false) => "directed, unweighted",
            (false, true) => "undirected, weighted",
            (false, false) => "undirected, unweighted",
        }
    }
}

/// Identity of one measure: its stable id, display name, data source,
/// family, and (for network measures) view parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureDescriptor {
    pub id: u8,
    pub name: &'static str,
    pub source: DataSource,
    pub family: MeasureFamily,
    pub params: Option<ViewParams>,
}

impl MeasureDescriptor {
    /// Filesystem-friendly identifier, e.g. `m03_closeness-centrality_undirected-weighted`.
    pub fn slug(&self) -> String {
        let mut s = alloc::format!("m{:02}_", self.id);
        for ch in self.name.chars() {
            s.push(match ch {
                ' ' => '-',
                c => c.to_ascii_lowercase(),
            });
        }
        if let Some(p) = self.params {
            s.push('_');
            s.push_str(if p.directed { "directed-" } else { "undirected-" });
            s.push_str(if p.weighted { "weighted" } else { "unweighted" });
        }
        s
    }
}

fn stat(id: u8, name: &'static str, source: DataSource) -> MeasureDescriptor {
    MeasureDescriptor {
        id,
        name,
        source,
        family: MeasureFamily::Statistic,
        params: None,
    }
}

fn hybrid(id: u8, name: &'static str, source: DataSource) -> MeasureDescriptor {
    MeasureDescriptor {
        id,
        name,
        source,
        family: MeasureFamily::Hybrid,
        params: None,
    }
}

fn network(
    id: u8,
    name: &'static str,
    source: DataSource,
    family: MeasureFamily,
    directed: bool,
    weighted: bool,
) -> MeasureDescriptor {
    MeasureDescriptor {
        id,
        name,
        source,
        family,
        params: Some(ViewParams { directed, weighted }),
    }
}

/// The full catalogue in id order (1-39). Ids are stable across runs.
pub fn catalogue() -> Vec<MeasureDescriptor> {
    use DataSource::{Citation, Usage};
    use DegreeDirection::{In, Out, Undirected};
    use MeasureFamily::{Betweenness, Closeness, Degree, PageRank};
    alloc::vec![
        hybrid(1, "Per-article PageRank", Citation),
        stat(2, "Immediacy index", Citation),
        network(3, "Closeness centrality", Citation, Closeness, false, true),
        stat(4, "Cites per document", Citation),
        stat(5, "Journal impact factor", Citation),
        network(6, "Closeness centrality", Citation, Closeness, false, false),
        network(7, "Out-degree centrality", Citation, Degree(Out), true, true),
        network(8, "Out-degree centrality", Citation, Degree(Out), true, false),
        network(9, "Degree centrality", Citation, Degree(Undirected), false, true),
        network(10, "Degree centrality", Citation, Degree(Undirected), false, false),
        stat(11, "H-index", Citation),
        stat(12, "Total cites", Citation),
        hybrid(13, "Journal cite probability", Citation),
        network(14, "In-degree centrality", Citation, Degree(In), true, false),
        network(15, "In-degree centrality", Citation, Degree(In), true, true),
        network(16, "PageRank", Citation, PageRank, true, false),
        network(17, "PageRank", Citation, PageRank, false, false),
        network(18, "PageRank", Citation, PageRank, false, true),
        network(19, "PageRank", Citation, PageRank, true, true),
        hybrid(20, "Y-factor", Citation),
        network(21, "Betweenness centrality", Citation, Betweenness, false, true),
        network(22, "Betweenness centrality", Citation, Betweenness, false, false),
        stat(23, "Citation half-life", Citation),
        network(24, "Closeness centrality", Usage, Closeness, false, true),
        network(25, "Closeness centrality", Usage, Closeness, false, false),
        network(26, "Degree centrality", Usage, Degree(Undirected), false, false),
        network(27, "PageRank", Usage, PageRank, false, false),
        network(28, "PageRank", Usage, PageRank, true, false),
        network(29, "In-degree centrality", Usage, Degree(In), true, false),
        network(30, "Out-degree centrality", Usage, Degree(Out), true, false),
        network(31, "PageRank", Usage, PageRank, true, true),
        network(32, "PageRank", Usage, PageRank, false, true),
        network(33, "Betweenness centrality", Usage, Betweenness, false, false),
        network(34, "Betweenness centrality", Usage, Betweenness, false, true),
        network(35, "Degree centrality", Usage, Degree(Undirected), false, true),
        network(36, "Out-degree centrality", Usage, Degree(Out), true, true),
        network(37, "In-degree centrality", Usage, Degree(In), true, true),
        hybrid(38, "Journal use probability", Usage),
        hybrid(39, "Usage impact factor", Usage),
    ]
}

/// The sorted set of journal ids every ranking in a run is scored over.
#[derive(Debug, PartialEq, Eq)]
pub struct Universe {
    ids: Vec<String>,
}

impl Universe {
    /// Builds from any id collection; ids are sorted and must be unique.
    pub fn from_ids(mut ids: Vec<String>) -> Result<Arc<Self>, MeasureError> {
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(MeasureError::DuplicateUniverseId);
        }
        Ok(Arc::new(Self { ids }))
    }

    pub fn from_registry(registry: &JournalRegistry) -> Arc<Self> {
        Arc::new(Self {
            ids: registry.ids(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.binary_search_by(|probe| probe.as_str().cmp(id)).ok()
    }
}

/// One measure's scores and average ranks over a universe, with the
/// journals for which the measure was undefined flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRanking {
    descriptor: MeasureDescriptor,
    universe: Arc<Universe>,
    scores: Vec<f64>,
    ranks: Vec<f64>,
    undefined: Vec<u32>,
}

impl MeasureRanking {
    pub fn new(
        descriptor: MeasureDescriptor,
        universe: Arc<Universe>,
        scores: Vec<f64>,
        undefined: Vec<u32>,
    ) -> Result<Self, MeasureError> {
        if scores.len() != universe.len() {
            return Err(MeasureError::WrongScoreLength {
                measure: descriptor.name,
                got: scores.len(),
                expected: universe.len(),
            });
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(MeasureError::NonFiniteScore {
                measure: descriptor.name,
            });
        }
        let ranks = average_rank(&scores);
        Ok(Self {
            descriptor,
            universe,
            scores,
            ranks,
            undefined,
        })
    }

    pub fn descriptor(&self) -> &MeasureDescriptor {
        &self.descriptor
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn universe_ptr_eq(&self, other: &MeasureRanking) -> bool {
        Arc::ptr_eq(&self.universe, &other.universe)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Average ranks in ascending-score convention (1 = lowest score).
    pub fn ranks(&self) -> &[f64] {
        &self.ranks
    }

    pub fn undefined_indices(&self) -> &[u32] {
        &self.undefined
    }

    pub fn score_of(&self, id: &str) -> Option<f64> {
        self.universe.index_of(id).map(|i| self.scores[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.universe
            .ids
            .iter()
            .map(String::as_str)
            .zip(self.scores.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureError {
    DuplicateUniverseId,
    WrongScoreLength {
        measure: &'static str,
        got: usize,
        expected: usize,
    },
    NonFiniteScore {
        measure: &'static str,
    },
    UniverseMismatch {
        measure: &'static str,
    },
    MissingInput {
        measure: &'static str,
    },
    ZeroTotal {
        measure: &'static str,
    },
    IllegalParams {
        measure: &'static str,
        why: &'static str,
    },
    Centrality(CentralityError),
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DuplicateUniverseId => write!(f, "universe ids must be unique"),
            Self::WrongScoreLength {
                measure,
                got,
                expected,
            } => write!(f, "{measure}: {got} scores for a universe of {expected}"),
            Self::NonFiniteScore { measure } => write!(f, "{measure}: non-finite score"),
            Self::UniverseMismatch { measure } => {
                write!(f, "{measure}: rankings cover different journal sets")
            }
            Self::MissingInput { measure } => write!(f, "{measure}: required input is missing"),
            Self::ZeroTotal { measure } => {
                write!(f, "{measure}: total is zero, distribution undefined")
            }
            Self::IllegalParams { measure, why } => write!(f, "{measure}: {why}"),
            Self::Centrality(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for MeasureError {}

impl From<CentralityError> for MeasureError {
    fn from(e: CentralityError) -> Self {
        Self::Centrality(e)
    }
}

fn lookup(map: &BTreeMap<String, u64>, id: &str) -> u64 {
    map.get(id).copied().unwrap_or(0)
}

/// Numerator/denominator ratio per journal; journals with a zero
/// denominator score 0 and are flagged undefined.
fn per_article_ratio(
    descriptor: MeasureDescriptor,
    universe: &Arc<Universe>,
    numerator: &BTreeMap<String, u64>,
    denominator: &BTreeMap<String, u64>,
) -> Result<MeasureRanking, MeasureError> {
    let mut scores = Vec::with_capacity(universe.len());
    let mut undefined = Vec::new();
    for (i, id) in universe.ids().iter().enumerate() {
        let articles = lookup(denominator, id);
        if articles == 0 {
            scores.push(0.0);
            undefined.push(i as u32);
        } else {
            scores.push(lookup(numerator, id) as f64 / articles as f64);
        }
    }
    MeasureRanking::new(descriptor, universe.clone(), scores, undefined)
}

fn descriptor_by_id(id: u8) -> MeasureDescriptor {
    catalogue()
        .into_iter()
        .find(|d| d.id == id)
        .expect("id is in the catalogue")
}

/// Citations received over the two prior years divided by articles
/// published in them (measure 5).
pub fn journal_impact_factor(
    universe: &Arc<Universe>,
    citations_to_window: &BTreeMap<String, u64>,
    articles_in_window: &BTreeMap<String, u64>,
) -> Result<MeasureRanking, MeasureError> {
    per_article_ratio(
        descriptor_by_id(5),
        universe,
        citations_to_window,
        articles_in_window,
    )
}

/// Same-year citations per same-year article (measure 2).
pub fn immediacy_index(
    universe: &Arc<Universe>,
    same_year_citations: &BTreeMap<String, u64>,
    same_year_articles: &BTreeMap<String, u64>,
) -> Result<MeasureRanking, MeasureError> {
    per_article_ratio(
        descriptor_by_id(2),
        universe,
        same_year_citations,
        same_year_articles,
    )
}

/// Impact-factor arithmetic under its own window, kept as a distinct
/// measure (4) so the correlation analysis treats it separately.
pub fn cites_per_doc(
    universe: &Arc<Universe>,
    citations_to_window: &BTreeMap<String, u64>,
    articles_in_window: &BTreeMap<String, u64>,
) -> Result<MeasureRanking, MeasureError> {
    per_article_ratio(
        descriptor_by_id(4),
        universe,
        citations_to_window,
        articles_in_window,
    )
}

/// Usage events on window-published articles per article (measure 39).
pub fn usage_impact_factor(
    universe: &Arc<Universe>,
    usage_to_window: &BTreeMap<String, u64>,
    articles_in_window: &BTreeMap<String, u64>,
) -> Result<MeasureRanking, MeasureError> {
    per_article_ratio(
        descriptor_by_id(39),
        universe,
        usage_to_window,
        articles_in_window,
    )
}

/// Median age of the articles a journal cites (measure 23). `ages` maps
/// journal -> (age -> citation count); an empty histogram is flagged.
pub fn citation_half_life(
    universe: &Arc<Universe>,
    cited_article_ages: &BTreeMap<String, BTreeMap<u32, u64>>,
) -> Result<MeasureRanking, MeasureError> {
    let mut scores = Vec::with_capacity(universe.len());
    let mut undefined = Vec::new();
    for (i, id) in universe.ids().iter().enumerate() {
        match cited_article_ages.get(id).filter(|h| !h.is_empty()) {
            Some(histogram) => scores.push(weighted_median(histogram)),
            None => {
                scores.push(0.0);
                undefined.push(i as u32);
            }
        }
    }
    MeasureRanking::new(descriptor_by_id(23), universe.clone(), scores, undefined)
}

/// Median of the multiset expanded from an age histogram, averaging the
/// middle two for even totals.
fn weighted_median(histogram: &BTreeMap<u32, u64>) -> f64 {
    let total: u64 = histogram.values().sum();
    debug_assert!(total > 0);
    if total % 2 == 1 {
        element_at(histogram, total / 2) as f64
    } else {
        let lo = element_at(histogram, total / 2 - 1);
        let hi = element_at(histogram, total / 2);
        (lo + hi) as f64 / 2.0
    }
}

fn element_at(histogram: &BTreeMap<u32, u64>, index: u64) -> u32 {
    let mut seen = 0u64;
    for (&age, &count) in histogram {
        seen += count;
        if index < seen {
            return age;
        }
    }
    unreachable!("index within total count")
}

/// Largest `h` such that at least `h` of a journal's articles received at
/// least `h` citations (measure 11).
pub fn h_index(
    universe: &Arc<Universe>,
    per_article_citations: &BTreeMap<String, Vec<u64>>,
) -> Result<MeasureRanking, MeasureError> {
    let scores = universe
        .ids()
        .iter()
        .map(|id| {
            per_article_citations
                .get(id)
                .map_or(0.0, |counts| h_index_of(counts) as f64)
        })
        .collect();
    MeasureRanking::new(descriptor_by_id(11), universe.clone(), scores, Vec::new())
}

fn h_index_of(counts: &[u64]) -> u64 {
    let mut sorted: Vec<u64> = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut h = 0u64;
    for (i, &c) in sorted.iter().enumerate() {
        if c >= i as u64 + 1 {
            h = i as u64 + 1;
        } else {
            break;
        }
    }
    h
}

/// Raw citations received over the configured window (measure 12).
pub fn total_cites(
    universe: &Arc<Universe>,
    citations_to_window: &BTreeMap<String, u64>,
) -> Result<MeasureRanking, MeasureError> {
    let scores = universe
        .ids()
        .iter()
        .map(|id| lookup(citations_to_window, id) as f64)
        .collect();
    MeasureRanking::new(descriptor_by_id(12), universe.clone(), scores, Vec::new())
}

/// A journal's share of all citations (measure 13). Scores sum to 1.
pub fn cite_probability(
    universe: &Arc<Universe>,
    total_cites_per_journal: &BTreeMap<String, u64>,
) -> Result<MeasureRanking, MeasureError> {
    probability_measure(descriptor_by_id(13), universe, total_cites_per_journal)
}

/// A journal's share of all usage events (measure 38). Scores sum to 1.
pub fn use_probability(
    universe: &Arc<Universe>,
    usage_events_per_journal: &BTreeMap<String, u64>,
) -> Result<MeasureRanking, MeasureError> {
    probability_measure(descriptor_by_id(38), universe, usage_events_per_journal)
}

fn probability_measure(
    descriptor: MeasureDescriptor,
    universe: &Arc<Universe>,
    counts: &BTreeMap<String, u64>,
) -> Result<MeasureRanking, MeasureError> {
    let total: u64 = universe.ids().iter().map(|id| lookup(counts, id)).sum();
    if total == 0 {
        return Err(MeasureError::ZeroTotal {
            measure: descriptor.name,
        });
    }
    let scores = universe
        .ids()
        .iter()
        .map(|id| lookup(counts, id) as f64 / total as f64)
        .collect();
    MeasureRanking::new(descriptor, universe.clone(), scores, Vec::new())
}

/// Citation PageRank (directed, weighted) divided by articles published
/// in the configured window (measure 1). Zero-article journals score 0
/// and are flagged.
pub fn sjr_like(
    net: &SparseNetwork,
    universe: &Arc<Universe>,
    articles_in_window: &BTreeMap<String, u64>,
    pagerank_params: &PageRankParams,
) -> Result<MeasureRanking, MeasureError> {
    check_universe(net, universe, "Per-article PageRank")?;
    let pr = centrality::pagerank(&net.view(true, true), pagerank_params)?;
    per_article_pagerank(universe, &pr.scores, articles_in_window)
}

fn per_article_pagerank(
    universe: &Arc<Universe>,
    pagerank_scores: &[f64],
    articles_in_window: &BTreeMap<String, u64>,
) -> Result<MeasureRanking, MeasureError> {
    let mut scores = Vec::with_capacity(universe.len());
    let mut undefined = Vec::new();
    for (i, id) in universe.ids().iter().enumerate() {
        let articles = lookup(articles_in_window, id);
        if articles == 0 {
            scores.push(0.0);
            undefined.push(i as u32);
        } else {
            scores.push(pagerank_scores[i] / articles as f64);
        }
    }
    MeasureRanking::new(descriptor_by_id(1), universe.clone(), scores, undefined)
}

/// Product of impact factor and citation PageRank per journal
/// (measure 20). Both rankings must cover the same universe.
pub fn y_factor(
    jif: &MeasureRanking,
    pagerank: &MeasureRanking,
) -> Result<MeasureRanking, MeasureError> {
    if !jif.universe_ptr_eq(pagerank) && jif.universe().ids() != pagerank.universe().ids() {
        return Err(MeasureError::UniverseMismatch { measure: "Y-factor" });
    }
    let scores = jif
        .scores()
        .iter()
        .zip(pagerank.scores())
        .map(|(a, b)| a * b)
        .collect();
    MeasureRanking::new(
        descriptor_by_id(20),
        jif.universe().clone(),
        scores,
        jif.undefined_indices().to_vec(),
    )
}

/// Knobs shared by every network measure in a battery run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryOptions {
    pub pagerank: PageRankParams,
    /// Geodesic convention for weighted closeness/betweenness variants;
    /// unweighted variants always use hop distances.
    pub weighted_distance: DistanceConvention,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        Self {
            pagerank: PageRankParams::default(),
            weighted_distance: DistanceConvention::InverseWeight,
        }
    }
}

fn check_universe(
    net: &SparseNetwork,
    universe: &Arc<Universe>,
    measure: &'static str,
) -> Result<(), MeasureError> {
    if net.nodes() != universe.ids() {
        return Err(MeasureError::UniverseMismatch { measure });
    }
    Ok(())
}

/// Evaluates one catalogued network measure on `net`. The descriptor's
/// family/params must be a legal combination: closeness, betweenness, and
/// plain degree are undirected-only; in-/out-degree are directed-only.
pub fn network_measure(
    net: &SparseNetwork,
    universe: &Arc<Universe>,
    descriptor: &MeasureDescriptor,
    options: &BatteryOptions,
) -> Result<MeasureRanking, MeasureError> {
    check_universe(net, universe, descriptor.name)?;
    let params = descriptor.params.ok_or(MeasureError::IllegalParams {
        measure: descriptor.name,
        why: "network measure without view parameters",
    })?;
    let distance = if params.weighted {
        options.weighted_distance
    } else {
        DistanceConvention::Hop
    };
    let view = net.view(params.directed, params.weighted);
    let vector = match descriptor.family {
        MeasureFamily::Degree(direction) => {
            let legal = match direction {
                DegreeDirection::In | DegreeDirection::Out => params.directed,
                DegreeDirection::Undirected => !params.directed,
            };
            if !legal {
                return Err(MeasureError::IllegalParams {
                    measure: descriptor.name,
                    why: "degree direction clashes with the view's directedness",
                });
            }
            centrality::degree_centrality(&view, direction)?
        }
        MeasureFamily::Closeness => {
            if params.directed {
                return Err(MeasureError::IllegalParams {
                    measure: descriptor.name,
                    why: "closeness is undirected-only",
                });
            }
            centrality::closeness_centrality(&view, distance)?
        }
        MeasureFamily::Betweenness => {
            if params.directed {
                return Err(MeasureError::IllegalParams {
                    measure: descriptor.name,
                    why: "betweenness is undirected-only",
                });
            }
            centrality::betweenness_centrality(&view, distance)?
        }
        MeasureFamily::PageRank => centrality::pagerank(&view, &options.pagerank)?,
        _ => {
            return Err(MeasureError::IllegalParams {
                measure: descriptor.name,
                why: "not a network measure",
            })
        }
    };
    MeasureRanking::new(descriptor.clone(), universe.clone(), vector.scores, Vec::new())
}

/// Year windows for the statistic measures, all anchored on one census
/// year: citations observed in the census year are attributed to target
/// articles of the preceding window years.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureWindows {
    pub census_year: i32,
    /// Impact factor: previous 2 years.
    pub impact_factor_years: u8,
    /// Cites per document: previous 2 years.
    pub cites_per_doc_years: u8,
    /// Total cites: previous 3 years.
    pub total_cites_years: u8,
    /// Per-article PageRank denominator: previous 3 years.
    pub per_article_pagerank_years: u8,
    /// Usage impact factor: previous 2 years.
    pub usage_impact_years: u8,
}

impl MeasureWindows {
    pub fn for_census_year(census_year: i32) -> Self {
        Self {
            census_year,
            impact_factor_years: 2,
            cites_per_doc_years: 2,
            total_cites_years: 3,
            per_article_pagerank_years: 3,
            usage_impact_years: 2,
        }
    }

    /// The target-year set `{census-1, ..., census-k}`.
    pub fn previous_years(&self, k: u8) -> BTreeSet<i32> {
        (1..=k as i32).map(|d| self.census_year - d).collect()
    }
}

/// Inputs for the citation-side statistic measures, keyed by journal id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CitationStatistics {
    pub impact_factor_citations: BTreeMap<String, u64>,
    pub impact_factor_articles: BTreeMap<String, u64>,
    pub immediacy_citations: BTreeMap<String, u64>,
    pub immediacy_articles: BTreeMap<String, u64>,
    pub cites_per_doc_citations: BTreeMap<String, u64>,
    pub cites_per_doc_articles: BTreeMap<String, u64>,
    pub total_cites: BTreeMap<String, u64>,
    /// Unwindowed totals for the cite-probability distribution.
    pub all_cites: BTreeMap<String, u64>,
    pub cited_article_ages: BTreeMap<String, BTreeMap<u32, u64>>,
    pub per_article_citations: BTreeMap<String, Vec<u64>>,
    pub per_article_pagerank_articles: BTreeMap<String, u64>,
}

/// Inputs for the usage-side statistic measures.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UsageStatistics {
    pub usage_events: BTreeMap<String, u64>,
    pub usage_to_window: BTreeMap<String, u64>,
    pub usage_window_articles: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StatisticsInputs {
    pub citation: CitationStatistics,
    pub usage: Option<UsageStatistics>,
}

/// Derives every statistic input from the corpus collections.
///
/// Citation ages expand each tuple over its year pairs: every
/// `(source_year, target_year)` combination with a non-negative age
/// contributes the full tuple count at age `source_year - target_year`.
pub fn derive_statistics(
    registry: &JournalRegistry,
    tuples: &[CitationTuple],
    articles: &ArticleMap,
    usage: Option<&[ResolvedRequest]>,
    windows: &MeasureWindows,
) -> StatisticsInputs {
    let census = BTreeSet::from([windows.census_year]);
    let if_years = windows.previous_years(windows.impact_factor_years);
    let cpd_years = windows.previous_years(windows.cites_per_doc_years);
    let tc_years = windows.previous_years(windows.total_cites_years);
    let sjr_years = windows.previous_years(windows.per_article_pagerank_years);
    let uif_years = windows.previous_years(windows.usage_impact_years);

    let mut citation = CitationStatistics::default();
    for tuple in tuples {
        let target = tuple.target_journal.clone();
        let from_census = tuple.source_years.is_subset(&census);
        if from_census && tuple.target_years.is_subset(&if_years) {
            *citation
                .impact_factor_citations
                .entry(target.clone())
                .or_insert(0) += tuple.count;
        }
        if from_census && tuple.target_years.is_subset(&census) {
            *citation
                .immediacy_citations
                .entry(target.clone())
                .or_insert(0) += tuple.count;
        }
        if from_census && tuple.target_years.is_subset(&cpd_years) {
            *citation
                .cites_per_doc_citations
                .entry(target.clone())
                .or_insert(0) += tuple.count;
        }
        if from_census && tuple.target_years.is_subset(&tc_years) {
            *citation.total_cites.entry(target.clone()).or_insert(0) += tuple.count;
        }
        *citation.all_cites.entry(target).or_insert(0) += tuple.count;

        let ages = citation
            .cited_article_ages
            .entry(tuple.source_journal.clone())
            .or_default();
        for &ys in &tuple.source_years {
            for &ye in &tuple.target_years {
                if ys >= ye {
                    *ages.entry((ys - ye) as u32).or_insert(0) += tuple.count;
                }
            }
        }
    }

    for (id, _) in registry.iter() {
        citation
            .impact_factor_articles
            .insert(id.clone(), registry.articles_in_years(id, &if_years));
        citation
            .immediacy_articles
            .insert(id.clone(), registry.articles_in_years(id, &census));
        citation
            .cites_per_doc_articles
            .insert(id.clone(), registry.articles_in_years(id, &cpd_years));
        citation
            .per_article_pagerank_articles
            .insert(id.clone(), registry.articles_in_years(id, &sjr_years));
    }

    // Unrecorded per-article citation counts are read as zero.
    for (_, record) in articles.iter() {
        citation
            .per_article_citations
            .entry(record.journal.clone())
            .or_default()
            .push(record.citation_count.unwrap_or(0));
    }

    let usage_stats = usage.map(|requests| {
        let mut stats = UsageStatistics::default();
        for request in requests {
            *stats
                .usage_events
                .entry(request.journal.clone())
                .or_insert(0) += 1;
            if uif_years.contains(&request.article_year) {
                *stats
                    .usage_to_window
                    .entry(request.journal.clone())
                    .or_insert(0) += 1;
            }
        }
        for (id, _) in registry.iter() {
            stats
                .usage_window_articles
                .insert(id.clone(), registry.articles_in_years(id, &uif_years));
        }
        stats
    });

    StatisticsInputs {
        citation,
        usage: usage_stats,
    }
}

/// A battery-level advisory that does not abort the run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatteryWarning {
    pub measure_id: u8,
    pub message: alloc::string::String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryOutcome {
    pub rankings: Vec<MeasureRanking>,
    pub warnings: Vec<BatteryWarning>,
}

/// Evaluates the catalogue over a common universe: all 39 measures when a
/// usage network is supplied, the 23 citation measures otherwise.
///
/// The two networks must cover exactly the universe's journals. PageRank
/// vectors are computed once per (network, view) and shared by the
/// hybrid measures, so measure 20 reuses measure 19's vector.
/// Non-convergence of an iterative measure is reported as a warning, not
/// an error.
pub fn full_battery(
    citation_net: &SparseNetwork,
    usage_net: Option<&SparseNetwork>,
    inputs: &StatisticsInputs,
    options: &BatteryOptions,
) -> Result<BatteryOutcome, MeasureError> {
    let universe = Universe::from_ids(citation_net.nodes().to_vec())?;
    check_universe(citation_net, &universe, "battery")?;
    debug_assert_eq!(citation_net.kind(), NetworkKind::CitationCount);
    if let Some(unet) = usage_net {
        check_universe(unet, &universe, "battery")?;
    }

    let mut pr_cache: BTreeMap<(DataSource, bool, bool), (Vec<f64>, bool)> = BTreeMap::new();
    let mut cached_pagerank = |source: DataSource,
                               net: &SparseNetwork,
                               params: ViewParams|
     -> Result<(Vec<f64>, bool), MeasureError> {
        if let Some(cached) = pr_cache.get(&(source, params.directed, params.weighted)) {
            return Ok(cached.clone());
        }
        let pr = centrality::pagerank(
            &net.view(params.directed, params.weighted),
            &options.pagerank,
        )?;
        let entry = (pr.scores, pr.converged.unwrap_or(true));
        pr_cache.insert(
            (source, params.directed, params.weighted),
            entry.clone(),
        );
        Ok(entry)
    };

    let cit = &inputs.citation;
    let mut rankings = Vec::new();
    let mut warnings = Vec::new();
    for descriptor in catalogue() {
        let net = match descriptor.source {
            DataSource::Citation => citation_net,
            DataSource::Usage => match usage_net {
                Some(net) => net,
                None => continue,
            },
        };
        let usage_stats = || {
            inputs.usage.as_ref().ok_or(MeasureError::MissingInput {
                measure: descriptor.name,
            })
        };
        let note_convergence = |id: u8, converged: bool, warnings: &mut Vec<BatteryWarning>| {
            if !converged {
                warnings.push(BatteryWarning {
                    measure_id: id,
                    message: alloc::string::String::from(
                        "pagerank did not converge within max_iter",
                    ),
                });
            }
        };
        let ranking = match descriptor.id {
            1 => {
                let (pr, converged) = cached_pagerank(
                    DataSource::Citation,
                    citation_net,
                    ViewParams {
                        directed: true,
                        weighted: true,
                    },
                )?;
                note_convergence(descriptor.id, converged, &mut warnings);
                per_article_pagerank(&universe, &pr, &cit.per_article_pagerank_articles)?
            }
            2 => immediacy_index(&universe, &cit.immediacy_citations, &cit.immediacy_articles)?,
            4 => cites_per_doc(
                &universe,
                &cit.cites_per_doc_citations,
                &cit.cites_per_doc_articles,
            )?,
            5 => journal_impact_factor(
                &universe,
                &cit.impact_factor_citations,
                &cit.impact_factor_articles,
            )?,
            11 => h_index(&universe, &cit.per_article_citations)?,
            12 => total_cites(&universe, &cit.total_cites)?,
            13 => cite_probability(&universe, &cit.all_cites)?,
            20 => {
                let jif = rankings
                    .iter()
                    .find(|r: &&MeasureRanking| r.descriptor().id == 5)
                    .expect("measure 5 precedes 20 in the catalogue");
                let (pr_scores, converged) = cached_pagerank(
                    DataSource::Citation,
                    citation_net,
                    ViewParams {
                        directed: true,
                        weighted: true,
                    },
                )?;
                note_convergence(descriptor.id, converged, &mut warnings);
                let pr = MeasureRanking::new(
                    descriptor_by_id(19),
                    universe.clone(),
                    pr_scores,
                    Vec::new(),
                )?;
                y_factor(jif, &pr)?
            }
            23 => citation_half_life(&universe, &cit.cited_article_ages)?,
            38 => use_probability(&universe, &usage_stats()?.usage_events)?,
            39 => {
                let stats = usage_stats()?;
                usage_impact_factor(
                    &universe,
                    &stats.usage_to_window,
                    &stats.usage_window_articles,
                )?
            }
            _ if descriptor.family == MeasureFamily::PageRank => {
                let params = descriptor.params.expect("pagerank measures carry params");
                let (scores, converged) = cached_pagerank(descriptor.source, net, params)?;
                note_convergence(descriptor.id, converged, &mut warnings);
                MeasureRanking::new(descriptor.clone(), universe.clone(), scores, Vec::new())?
            }
            _ => network_measure(net, &universe, &descriptor, options)?,
        };
        rankings.push(ranking);
    }
    Ok(BatteryOutcome { rankings, warnings })
}
