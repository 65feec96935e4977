//! Validated in-memory collections for the raw inputs: the journal
//! registry, journal-to-journal citation tuples, the article map, and
//! usage requests with their reconstruction into per-session clickstreams.
//!
//! Parsing from files lives in the companion crate; everything here
//! operates on already-decoded values. Loaded collections are immutable
//! and safe to share across threads.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Per-journal registry entry: display name and article counts by year.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalEntry {
    pub name: String,
    pub articles_published: BTreeMap<i32, u64>,
}

/// Canonical set of journals for a run. Journal ids are opaque, unique,
/// non-empty strings; iteration order is sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JournalRegistry {
    entries: BTreeMap<String, JournalEntry>,
}

impl JournalRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a journal; duplicate or empty ids are rejected.
    pub fn insert(&mut self, id: String, entry: JournalEntry) -> Result<(), CorpusError> {
        if id.is_empty() {
            return Err(CorpusError::EmptyJournalId);
        }
        if self.entries.contains_key(&id) {
            return Err(CorpusError::DuplicateJournal { id });
        }
        self.entries.insert(id, entry);
        Ok(())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Option<&JournalEntry> {
        self.entries.get(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &JournalEntry)> {
        self.entries.iter()
    }

    /// Sorted journal ids.
    pub fn ids(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    /// Total articles a journal published over `years`; 0 for unknown ids.
    pub fn articles_in_years(&self, id: &str, years: &BTreeSet<i32>) -> u64 {
        self.entries.get(id).map_or(0, |e| {
            years
                .iter()
                .map(|y| e.articles_published.get(y).copied().unwrap_or(0))
                .sum()
        })
    }
}

/// One aggregated citation observation: `count` citations from articles
/// published in `source_journal` during `source_years` to articles
/// published in `target_journal` during `target_years`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationTuple {
    pub source_journal: String,
    pub target_journal: String,
    pub source_years: BTreeSet<i32>,
    pub target_years: BTreeSet<i32>,
    pub count: u64,
}

impl CitationTuple {
    /// Checks the structural invariants (positive count, non-empty years).
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.count == 0 {
            return Err(CorpusError::NonPositiveCount {
                source: self.source_journal.clone(),
                target: self.target_journal.clone(),
            });
        }
        if self.source_years.is_empty() || self.target_years.is_empty() {
            return Err(CorpusError::EmptyYearSet {
                source: self.source_journal.clone(),
                target: self.target_journal.clone(),
            });
        }
        Ok(())
    }
}

/// How to treat records that reference an id missing from the registry
/// or article map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownIdPolicy {
    /// Reject the whole load.
    Strict,
    /// Drop the record and count a warning.
    DropWithWarning,
}

/// Validates tuples against a registry. Returns the retained tuples and
/// the number dropped (always 0 under [`UnknownIdPolicy::Strict`]).
pub fn validate_tuples(
    tuples: Vec<CitationTuple>,
    registry: &JournalRegistry,
    policy: UnknownIdPolicy,
) -> Result<(Vec<CitationTuple>, u64), CorpusError> {
    let mut kept = Vec::with_capacity(tuples.len());
    let mut dropped = 0u64;
    for tuple in tuples {
        tuple.validate()?;
        let unknown = if !registry.contains(&tuple.source_journal) {
            Some(tuple.source_journal.clone())
        } else if !registry.contains(&tuple.target_journal) {
            Some(tuple.target_journal.clone())
        } else {
            None
        };
        match (unknown, policy) {
            (None, _) => kept.push(tuple),
            (Some(id), UnknownIdPolicy::Strict) => {
                return Err(CorpusError::UnknownJournal { id })
            }
            (Some(_), UnknownIdPolicy::DropWithWarning) => dropped += 1,
        }
    }
    Ok((kept, dropped))
}

/// Article-level metadata: owning journal, publication year, and an
/// optional citation count for h-index style statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleRecord {
    pub journal: String,
    pub publication_year: i32,
    pub citation_count: Option<u64>,
}

/// Maps article ids to their records; every article belongs to exactly
/// one journal.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArticleMap {
    entries: BTreeMap<String, ArticleRecord>,
}

impl ArticleMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, article_id: String, record: ArticleRecord) -> Result<(), CorpusError> {
        if article_id.is_empty() {
            return Err(CorpusError::EmptyArticleId);
        }
        if self.entries.contains_key(&article_id) {
            return Err(CorpusError::DuplicateArticle { id: article_id });
        }
        self.entries.insert(article_id, record);
        Ok(())
    }

    pub fn get(&self, article_id: &str) -> Option<&ArticleRecord> {
        self.entries.get(article_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ArticleRecord)> {
        self.entries.iter()
    }

    /// Every journal id referenced by the map must exist in the registry.
    pub fn validate_against(&self, registry: &JournalRegistry) -> Result<(), CorpusError> {
        for record in self.entries.values() {
            if !registry.contains(&record.journal) {
                return Err(CorpusError::UnknownJournal {
                    id: record.journal.clone(),
                });
            }
        }
        Ok(())
    }
}

/// One raw usage event. `order` is the position in the source file and
/// breaks timestamp ties within a session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageRequest {
    pub timestamp_ms: i64,
    pub order: u64,
    pub session_id: String,
    pub article_id: String,
    pub request_type: String,
}

/// A usage event with its article resolved to a journal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedRequest {
    pub timestamp_ms: i64,
    pub order: u64,
    pub session_id: String,
    pub journal: String,
    pub article_year: i32,
}

/// Resolves each request's article to a journal via the article map.
/// Unknown article ids are dropped with a warning count or rejected,
/// depending on `policy`.
pub fn resolve_requests(
    requests: &[UsageRequest],
    articles: &ArticleMap,
    policy: UnknownIdPolicy,
) -> Result<(Vec<ResolvedRequest>, u64), CorpusError> {
    let mut resolved = Vec::with_capacity(requests.len());
    let mut dropped = 0u64;
    for req in requests {
        match articles.get(&req.article_id) {
            Some(record) => resolved.push(ResolvedRequest {
                timestamp_ms: req.timestamp_ms,
                order: req.order,
                session_id: req.session_id.clone(),
                journal: record.journal.clone(),
                article_year: record.publication_year,
            }),
            None => match policy {
                UnknownIdPolicy::Strict => {
                    return Err(CorpusError::UnknownArticle {
                        id: req.article_id.clone(),
                    })
                }
                UnknownIdPolicy::DropWithWarning => dropped += 1,
            },
        }
    }
    Ok((resolved, dropped))
}

/// A time-ordered sequence of journal visits within one session.
pub type Clickstream = Vec<String>;

/// Groups resolved requests by session and orders each session by
/// timestamp, breaking ties by file order. Consecutive duplicates are
/// preserved; collapsing them is a network-build decision.
pub fn sessionize(resolved: &[ResolvedRequest]) -> Vec<Clickstream> {
    let mut sessions: BTreeMap<&str, Vec<(i64, u64, &str)>> = BTreeMap::new();
    for req in resolved {
        sessions
            .entry(&req.session_id)
            .or_default()
            .push((req.timestamp_ms, req.order, &req.journal));
    }
    sessions
        .into_values()
        .map(|mut events| {
            events.sort_by_key(|&(ts, order, _)| (ts, order));
            events
                .into_iter()
                .map(|(_, _, journal)| String::from(journal))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    EmptyJournalId,
    EmptyArticleId,
    DuplicateJournal { id: String },
    DuplicateArticle { id: String },
    UnknownJournal { id: String },
    UnknownArticle { id: String },
    NonPositiveCount { source: String, target: String },
    EmptyYearSet { source: String, target: String },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyJournalId => write!(f, "journal id must be non-empty"),
            Self::EmptyArticleId => write!(f, "article id must be non-empty"),
            Self::DuplicateJournal { id } => write!(f, "duplicate journal id {id:?}"),
            Self::DuplicateArticle { id } => write!(f, "duplicate article id {id:?}"),
            Self::UnknownJournal { id } => {
                write!(f, "journal id {id:?} is not present in the registry")
            }
            Self::UnknownArticle { id } => {
                write!(f, "article id {id:?} is not present in the article map")
            }
            Self::NonPositiveCount { source, target } => {
                write!(f, "citation tuple {source:?} -> {target:?} has count 0")
            }
            Self::EmptyYearSet { source, target } => {
                write!(f, "citation tuple {source:?} -> {target:?} has an empty year set")
            }
        }
    }
}

impl core::error::Error for CorpusError {}
