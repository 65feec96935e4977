//! Deterministic synthetic corpus generation with planted structure.
//!
//! Journals are partitioned into disciplinary fields; citation targets
//! and usage transitions stay within the current field with probability
//! `within_field_affinity`. Per-journal attractiveness follows a power
//! law, `a = (1 - u)^(-prestige_skew)`, drawn separately for the citation
//! and usage sides through a Gaussian copula (correlation 0.7) so the two
//! kinds of measures agree on roughly who is important without being
//! copies of each other. Everything downstream of the seed is
//! reproducible byte for byte.
//!
//! Volume rules not exposed in the config are fixed constants: 60
//! citation events per journal, articles per journal-year uniform in
//! 8..=30, request timestamps on a 1-second grid from a fixed epoch.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    ArticleMap, ArticleRecord, CitationTuple, JournalEntry, JournalRegistry, UsageRequest,
};
use crate::math;
use crate::rng;

/// Citation events generated per journal.
const CITATIONS_PER_JOURNAL: u64 = 60;
/// Copula correlation between citation and usage attractiveness.
const SOURCE_COUPLING: f64 = 0.6;
/// Sessions longer than this are truncated; keeps single sessions from
/// dominating the transition counts.
const MAX_SESSION_LENGTH: usize = 40;
/// Clickstreams concentrate: each journal routes most in-field traffic
/// to a small shortlist of successor journals. Without this, transition
/// probabilities flatten toward 1/field-size and the weighted usage
/// geodesics carry no journal signal.
const SUCCESSOR_SHORTLIST: usize = 10;
const SHORTLIST_BIAS: f64 = 0.6;
/// 2006-01-01T00:00:00Z.
const EPOCH_MS: i64 = 1_136_073_600_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SessionLength {
    /// `1 + Geometric(p)` draws, mean `1/p`.
    Geometric { p: f64 },
    Fixed { len: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_journals: usize,
    /// Planted disciplinary blocks.
    pub n_fields: usize,
    pub year_min: i32,
    /// Census year: the year citations originate in and usage is logged.
    pub year_max: i32,
    pub session_count: usize,
    pub session_length: SessionLength,
    pub within_field_affinity: f64,
    /// Power-law exponent for journal attractiveness; 0 means uniform.
    pub prestige_skew: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_journals < 2 {
            return Err(SynthError::Invalid("need at least 2 journals"));
        }
        if self.n_fields == 0 || self.n_fields > self.n_journals {
            return Err(SynthError::Invalid(
                "n_fields must lie in 1..=n_journals",
            ));
        }
        if self.year_min > self.year_max {
            return Err(SynthError::Invalid("year_min exceeds year_max"));
        }
        if !(self.within_field_affinity > 0.0 && self.within_field_affinity < 1.0) {
            return Err(SynthError::Invalid(
                "within_field_affinity must lie in (0, 1)",
            ));
        }
        if !(self.prestige_skew >= 0.0) {
            return Err(SynthError::Invalid("prestige_skew must be >= 0"));
        }
        if self.session_count == 0 {
            return Err(SynthError::Invalid(
                "session_count must be positive; usage measures need sessions",
            ));
        }
        match self.session_length {
            SessionLength::Geometric { p } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(SynthError::Invalid("geometric p must lie in (0, 1)"));
                }
            }
            SessionLength::Fixed { len } => {
                if len == 0 {
                    return Err(SynthError::Invalid("fixed session length must be >= 1"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynthError {
    Invalid(&'static str),
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Invalid(why) => write!(f, "infeasible generator config: {why}"),
        }
    }
}

impl core::error::Error for SynthError {}

/// What the generator planted, for ground-truth checks downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub field_of: BTreeMap<String, u32>,
    pub citation_attractiveness: BTreeMap<String, f64>,
    pub usage_attractiveness: BTreeMap<String, f64>,
    pub census_year: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthBundle {
    pub registry: JournalRegistry,
    pub tuples: Vec<CitationTuple>,
    pub articles: ArticleMap,
    pub requests: Vec<UsageRequest>,
    pub ground_truth: GroundTruth,
}

/// Fast weighted choice over a fixed item set via a cumulative table.
struct WeightedPick {
    items: Vec<u32>,
    cumulative: Vec<f64>,
    total: f64,
}

impl WeightedPick {
    fn new(items: Vec<u32>, weights: &[f64]) -> Self {
        debug_assert_eq!(items.len(), weights.len());
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in weights {
            acc += w;
            cumulative.push(acc);
        }
        Self {
            items,
            cumulative,
            total: acc,
        }
    }

    fn pick(&self, r: &mut ChaCha8Rng) -> u32 {
        let target = rng::unit_f64(r) * self.total;
        let idx = self
            .cumulative
            .partition_point(|&c| c <= target)
            .min(self.items.len() - 1);
        self.items[idx]
    }
}

/// Standard normal draw (Box-Muller, cosine branch).
fn normal(r: &mut ChaCha8Rng) -> f64 {
    let u1 = (1.0 - rng::unit_f64(r)).max(1e-300);
    let u2 = rng::unit_f64(r);
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + math::erf(z / core::f64::consts::SQRT_2))
}

fn pareto(u: f64, skew: f64) -> f64 {
    math::powf((1.0 - u).max(1e-12), -skew)
}

/// Generates a full corpus bundle. Bundles load cleanly through every
/// corpus validation in strict mode and are identical for equal configs.
pub fn generate(config: &SynthConfig) -> Result<SynthBundle, SynthError> {
    config.validate()?;
    let mut r = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_journals;
    let census = config.year_max;
    let years: Vec<i32> = (config.year_min..=config.year_max).collect();
    let max_age = (config.year_max - config.year_min) as usize;

    let id_width = digits(n.saturating_sub(1));
    let journal_ids: Vec<String> = (0..n)
        .map(|j| alloc::format!("J{j:0width$}", width = id_width))
        .collect();
    let field_of: Vec<u32> = (0..n)
        .map(|j| (j * config.n_fields / n) as u32)
        .collect();

    // Correlated attractiveness through a Gaussian copula.
    let mut cite_attr = Vec::with_capacity(n);
    let mut use_attr = Vec::with_capacity(n);
    for _ in 0..n {
        let z1 = normal(&mut r);
        let z2 = normal(&mut r);
        let zb = SOURCE_COUPLING * z1
            + math::sqrt(1.0 - SOURCE_COUPLING * SOURCE_COUPLING) * z2;
        cite_attr.push(pareto(normal_cdf(z1), config.prestige_skew));
        use_attr.push(pareto(normal_cdf(zb), config.prestige_skew));
    }

    // Registry with per-year article counts.
    let mut registry = JournalRegistry::new();
    let mut articles_per_year: Vec<Vec<u64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut per_year = BTreeMap::new();
        let mut counts = Vec::with_capacity(years.len());
        for &year in &years {
            let count = 8 + (rng::index(&mut r, 23) as u64);
            per_year.insert(year, count);
            counts.push(count);
        }
        articles_per_year.push(counts);
        registry
            .insert(
                journal_ids[j].clone(),
                JournalEntry {
                    name: alloc::format!("Journal of Synthetic Studies {j}"),
                    articles_published: per_year,
                },
            )
            .expect("generated ids are unique");
    }

    // Article map with per-article citation counts (exponential with a
    // journal-attractiveness mean, so h-index tracks the planted skew).
    let max_cite_attr = cite_attr.iter().cloned().fold(f64::MIN, f64::max);
    let mut articles = ArticleMap::new();
    for j in 0..n {
        let mean = 0.5 + 8.0 * cite_attr[j] / max_cite_attr;
        for (yi, &year) in years.iter().enumerate() {
            for k in 0..articles_per_year[j][yi] {
                let draw = (1.0 - rng::unit_f64(&mut r)).max(1e-300);
                let count = math::floor(-mean * math::ln(draw)) as u64;
                articles
                    .insert(
                        article_id(&journal_ids[j], year, k),
                        ArticleRecord {
                            journal: journal_ids[j].clone(),
                            publication_year: year,
                            citation_count: Some(count),
                        },
                    )
                    .expect("generated article ids are unique");
            }
        }
    }

    // Field-local weighted pickers for targets.
    let cite_picks = field_pickers(config.n_fields, &field_of, &cite_attr);
    let use_picks = field_pickers(config.n_fields, &field_of, &use_attr);
    let all_fields: Vec<u32> = (0..config.n_fields as u32).collect();

    // Per-journal citation-age profile: mean age rises with prestige, so
    // half-life carries journal signal rather than pure noise.
    let rank_pct = percentile_ranks(&cite_attr);
    let age_weights: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mu = (0.4 + 2.4 * rank_pct[j] + 0.5 * normal(&mut r))
                .clamp(0.0, max_age as f64);
            (0..=max_age)
                .map(|age| {
                    let d = age as f64 - mu;
                    math::exp(-d * d / (2.0 * 0.9 * 0.9)) + 1e-4
                })
                .collect()
        })
        .collect();

    // Citation events, aggregated into tuples keyed (source, target, age).
    let source_pick = {
        let weights: Vec<f64> = cite_attr.iter().map(|a| math::sqrt(*a)).collect();
        WeightedPick::new((0..n as u32).collect(), &weights)
    };
    let mut counts: BTreeMap<(u32, u32, i32), u64> = BTreeMap::new();
    for _ in 0..(CITATIONS_PER_JOURNAL * n as u64) {
        let source = source_pick.pick(&mut r);
        let field = pick_field(
            &mut r,
            field_of[source as usize],
            &all_fields,
            config.within_field_affinity,
        );
        let target = cite_picks[field as usize].pick(&mut r);
        let age = rng::weighted_index(&mut r, &age_weights[source as usize]);
        let target_year = census - age as i32;
        *counts.entry((source, target, target_year)).or_insert(0) += 1;
    }
    let tuples: Vec<CitationTuple> = counts
        .into_iter()
        .map(|((s, t, ye), count)| CitationTuple {
            source_journal: journal_ids[s as usize].clone(),
            target_journal: journal_ids[t as usize].clone(),
            source_years: [census].into_iter().collect(),
            target_years: [ye].into_iter().collect(),
            count,
        })
        .collect();

    // Per-journal successor shortlists, sampled within the journal's own
    // field proportionally to usage attractiveness.
    let shortlist_picks: Vec<WeightedPick> = (0..n)
        .map(|j| {
            let field = field_of[j] as usize;
            let field_size = use_picks[field].items.len();
            let want = SUCCESSOR_SHORTLIST.min(field_size.saturating_sub(1));
            let mut chosen: Vec<u32> = Vec::new();
            let mut attempts = 0;
            while chosen.len() < want && attempts < 50 * (want + 1) {
                let candidate = use_picks[field].pick(&mut r);
                if candidate != j as u32 && !chosen.contains(&candidate) {
                    chosen.push(candidate);
                }
                attempts += 1;
            }
            chosen.sort_unstable();
            let weights: Vec<f64> =
                chosen.iter().map(|&k| use_attr[k as usize]).collect();
            WeightedPick::new(chosen, &weights)
        })
        .collect();

    // Usage sessions: a field-sticky walk over journals, preferring the
    // current journal's shortlist, each visit landing on a
    // recency-weighted article of that journal.
    let year_recency: Vec<f64> = (0..years.len())
        .map(|yi| math::powf(0.5, (years.len() - 1 - yi) as f64))
        .collect();
    let mut requests = Vec::new();
    let mut tick: i64 = 0;
    for s in 0..config.session_count {
        let len = match config.session_length {
            SessionLength::Fixed { len } => len,
            SessionLength::Geometric { p } => {
                let u = (1.0 - rng::unit_f64(&mut r)).max(1e-300);
                1 + (math::ln(u) / math::ln(1.0 - p)) as usize
            }
        }
        .min(MAX_SESSION_LENGTH);
        let session_id = alloc::format!("S{s:07}");
        let mut current = use_picks[rng::index(&mut r, config.n_fields)]
            .pick(&mut r);
        for _ in 0..len {
            let yi = rng::weighted_index(&mut r, &year_recency);
            let article_count = articles_per_year[current as usize][yi];
            let k = rng::index(&mut r, article_count as usize) as u64;
            requests.push(UsageRequest {
                timestamp_ms: EPOCH_MS + tick * 1000,
                order: tick as u64,
                session_id: session_id.clone(),
                article_id: article_id(&journal_ids[current as usize], years[yi], k),
                request_type: if rng::unit_f64(&mut r) < 0.7 {
                    String::from("fulltext")
                } else {
                    String::from("abstract")
                },
            });
            tick += 1;
            let home = field_of[current as usize];
            let field = pick_field(&mut r, home, &all_fields, config.within_field_affinity);
            let shortlist = &shortlist_picks[current as usize];
            current = if field == home
                && !shortlist.items.is_empty()
                && rng::unit_f64(&mut r) < SHORTLIST_BIAS
            {
                shortlist.pick(&mut r)
            } else {
                use_picks[field as usize].pick(&mut r)
            };
        }
    }

    let ground_truth = GroundTruth {
        field_of: journal_ids
            .iter()
            .cloned()
            .zip(field_of.iter().copied())
            .collect(),
        citation_attractiveness: journal_ids
            .iter()
            .cloned()
            .zip(cite_attr.iter().copied())
            .collect(),
        usage_attractiveness: journal_ids
            .iter()
            .cloned()
            .zip(use_attr.iter().copied())
            .collect(),
        census_year: census,
    };

    Ok(SynthBundle {
        registry,
        tuples,
        articles,
        requests,
        ground_truth,
    })
}

fn digits(mut x: usize) -> usize {
    let mut d = 1;
    while x >= 10 {
        x /= 10;
        d += 1;
    }
    d.max(4)
}

fn article_id(journal: &str, year: i32, k: u64) -> String {
    alloc::format!("A-{journal}-{year}-{k:03}")
}

fn field_pickers(n_fields: usize, field_of: &[u32], weights: &[f64]) -> Vec<WeightedPick> {
    (0..n_fields as u32)
        .map(|f| {
            let items: Vec<u32> = (0..field_of.len() as u32)
                .filter(|&j| field_of[j as usize] == f)
                .collect();
            let w: Vec<f64> = items.iter().map(|&j| weights[j as usize]).collect();
            WeightedPick::new(items, &w)
        })
        .collect()
}

fn pick_field(r: &mut ChaCha8Rng, home: u32, all: &[u32], affinity: f64) -> u32 {
    if all.len() == 1 || rng::unit_f64(r) < affinity {
        return home;
    }
    // Uniform over the other fields.
    let other = rng::index(r, all.len() - 1) as u32;
    if other >= home {
        other + 1
    } else {
        other
    }
}

/// Percentile rank of each value in [0, 1).
fn percentile_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut pct = alloc::vec![0.0; n];
    for (position, &idx) in order.iter().enumerate() {
        pct[idx] = position as f64 / n as f64;
    }
    pct
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{resolve_requests, sessionize, validate_tuples, UnknownIdPolicy};

    fn config(n_journals: usize, n_fields: usize, seed: u64) -> SynthConfig {
        SynthConfig {
            n_journals,
            n_fields,
            year_min: 2003,
            year_max: 2006,
            session_count: 400,
            session_length: SessionLength::Geometric { p: 0.25 },
            within_field_affinity: 0.9,
            prestige_skew: 0.5,
            seed,
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&config(100, 2, 7)).unwrap();
        let b = generate(&config(100, 2, 7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate(&config(50, 2, 1)).unwrap();
        let b = generate(&config(50, 2, 2)).unwrap();
        assert_ne!(a.tuples, b.tuples);
    }

    #[test]
    fn bundle_passes_strict_corpus_validation() {
        let bundle = generate(&config(80, 3, 11)).unwrap();
        let (kept, dropped) = validate_tuples(
            bundle.tuples.clone(),
            &bundle.registry,
            UnknownIdPolicy::Strict,
        )
        .unwrap();
        assert_eq!(dropped, 0);
        assert!(!kept.is_empty());
        bundle.articles.validate_against(&bundle.registry).unwrap();
        let (resolved, dropped) =
            resolve_requests(&bundle.requests, &bundle.articles, UnknownIdPolicy::Strict)
                .unwrap();
        assert_eq!(dropped, 0);
        let sessions = sessionize(&resolved);
        let total: usize = sessions.iter().map(Vec::len).sum();
        assert_eq!(total, bundle.requests.len());
    }

    #[test]
    fn citation_volume_matches_the_rate_exactly() {
        let bundle = generate(&config(60, 2, 3)).unwrap();
        let total: u64 = bundle.tuples.iter().map(|t| t.count).sum();
        assert_eq!(total, 60 * CITATIONS_PER_JOURNAL);
    }

    #[test]
    fn high_affinity_keeps_citation_weight_in_field() {
        let bundle = generate(&config(100, 2, 7)).unwrap();
        let mut within = 0u64;
        let mut total = 0u64;
        for t in &bundle.tuples {
            let fs = bundle.ground_truth.field_of[&t.source_journal];
            let ft = bundle.ground_truth.field_of[&t.target_journal];
            total += t.count;
            if fs == ft {
                within += t.count;
            }
        }
        let share = within as f64 / total as f64;
        assert!(share >= 0.8, "within-field share {share}");
    }

    #[test]
    fn single_field_ignores_affinity() {
        let mut low = config(40, 1, 9);
        low.within_field_affinity = 0.1;
        let mut high = config(40, 1, 9);
        high.within_field_affinity = 0.95;
        // With one field there is no cross-field structure to plant, so
        // the affinity knob has no effect on the output.
        assert_eq!(generate(&low).unwrap(), generate(&high).unwrap());
    }

    #[test]
    fn usage_transitions_match_expectation_within_3_sigma() {
        let cfg = config(60, 2, 21);
        let bundle = generate(&cfg).unwrap();
        let (resolved, _) =
            resolve_requests(&bundle.requests, &bundle.articles, UnknownIdPolicy::Strict)
                .unwrap();
        let sessions = sessionize(&resolved);
        let transitions: usize = sessions.iter().map(|s| s.len() - 1).sum();
        // Truncated geometric(p=0.25) at 40: mean len ~= 4, var ~= 12.
        let p: f64 = 0.25;
        let mean_len = 1.0 / p;
        let var_len = (1.0 - p) / (p * p);
        let count = cfg.session_count as f64;
        let expected = count * (mean_len - 1.0);
        let sigma = crate::math::sqrt(count * var_len);
        let got = transitions as f64;
        assert!(
            (got - expected).abs() < 3.0 * sigma,
            "transitions {got}, expected {expected} +- {sigma}"
        );
    }

    #[test]
    fn attractiveness_sides_correlate_but_differ() {
        let bundle = generate(&config(500, 2, 5)).unwrap();
        let a: Vec<f64> = bundle
            .ground_truth
            .citation_attractiveness
            .values()
            .copied()
            .collect();
        let b: Vec<f64> = bundle
            .ground_truth
            .usage_attractiveness
            .values()
            .copied()
            .collect();
        let ra = crate::stats::average_rank(&a);
        let rb = crate::stats::average_rank(&b);
        let n = ra.len() as f64;
        let mean = (n + 1.0) / 2.0;
        let mut num = 0.0;
        let mut da = 0.0;
        let mut db = 0.0;
        for (x, y) in ra.iter().zip(&rb) {
            num += (x - mean) * (y - mean);
            da += (x - mean) * (x - mean);
            db += (y - mean) * (y - mean);
        }
        let rho = num / crate::math::sqrt(da * db);
        assert!(rho > 0.4 && rho < 0.95, "rank correlation {rho}");
    }

    #[test]
    fn infeasible_configs_are_rejected() {
        let mut c = config(10, 2, 1);
        c.session_count = 0;
        assert!(generate(&c).is_err());
        let mut c = config(10, 11, 1);
        c.n_fields = 11;
        assert!(generate(&c).is_err());
        let mut c = config(10, 2, 1);
        c.within_field_affinity = 1.0;
        assert!(generate(&c).is_err());
    }
}
