//! Flat-file formats for the corpus collections. All files are UTF-8
//! with a header row; lines starting with `#` are ignored.
//!
//! * registry:    TSV `journal_id  name  articles` where articles is
//!   `year:count[;year:count...]` (may be empty)
//! * citations:   CSV `source_id,target_id,source_years,target_years,count`
//!   with `+`-joined year sets
//! * article map: CSV `article_id,journal_id,publication_year[,citation_count]`
//! * usage log:   CSV `timestamp,session_id,article_id,request_type`
//!   with RFC 3339 UTC timestamps

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use impactmap_core::corpus::{
    ArticleMap, ArticleRecord, CitationTuple, JournalEntry, JournalRegistry, UsageRequest,
};

use crate::error::PipelineError;

fn bad(path: &Path, line: u64, msg: impl std::fmt::Display) -> PipelineError {
    PipelineError::Validation(format!("{} line {line}: {msg}", path.display()))
}

/// Journal ids travel through unquoted TSV cells and `;`-joined lists,
/// so they must stay free of whitespace, control characters, and the
/// format delimiters.
pub fn check_journal_id(id: &str) -> Result<(), String> {
    if id.is_empty() {
        return Err("journal id is empty".into());
    }
    for ch in id.chars() {
        if ch.is_whitespace() || ch.is_control() || matches!(ch, ';' | ',' | ':' | '+' | '"') {
            return Err(format!("journal id {id:?} contains forbidden character {ch:?}"));
        }
    }
    Ok(())
}

fn tsv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>, PipelineError> {
    csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .comment(Some(b'#'))
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| PipelineError::Validation(format!("{}: {e}", path.display())))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>, PipelineError> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| PipelineError::Validation(format!("{}: {e}", path.display())))
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn field<'a>(
    path: &Path,
    record: &'a csv::StringRecord,
    index: usize,
    name: &str,
) -> Result<&'a str, PipelineError> {
    record
        .get(index)
        .ok_or_else(|| bad(path, record_line(record), format!("missing {name} column")))
}

pub fn read_registry(path: &Path) -> Result<JournalRegistry, PipelineError> {
    let mut reader = tsv_reader(path)?;
    let mut registry = JournalRegistry::new();
    for result in reader.records() {
        let record = result?;
        let line = record_line(&record);
        let id = field(path, &record, 0, "journal_id")?;
        check_journal_id(id).map_err(|msg| bad(path, line, msg))?;
        let name = field(path, &record, 1, "name")?.to_string();
        let articles = parse_articles(field(path, &record, 2, "articles")?)
            .map_err(|msg| bad(path, line, msg))?;
        registry
            .insert(
                id.to_string(),
                JournalEntry {
                    name,
                    articles_published: articles,
                },
            )
            .map_err(|e| bad(path, line, e))?;
    }
    Ok(registry)
}

fn parse_articles(text: &str) -> Result<BTreeMap<i32, u64>, String> {
    let mut map = BTreeMap::new();
    if text.is_empty() {
        return Ok(map);
    }
    for part in text.split(';') {
        let (year, count) = part
            .split_once(':')
            .ok_or_else(|| format!("bad articles entry {part:?}, expected year:count"))?;
        let year: i32 = year
            .parse()
            .map_err(|_| format!("unparsable year {year:?}"))?;
        let count: u64 = count
            .parse()
            .map_err(|_| format!("unparsable article count {count:?}"))?;
        if map.insert(year, count).is_some() {
            return Err(format!("year {year} listed twice"));
        }
    }
    Ok(map)
}

pub fn write_registry(path: &Path, registry: &JournalRegistry) -> Result<(), PipelineError> {
    let mut writer = csv::WriterBuilder::new().delimiter(b'\t').from_path(path)?;
    writer.write_record(["journal_id", "name", "articles"])?;
    for (id, entry) in registry.iter() {
        let articles = entry
            .articles_published
            .iter()
            .map(|(year, count)| format!("{year}:{count}"))
            .collect::<Vec<_>>()
            .join(";");
        writer.write_record([id.as_str(), entry.name.as_str(), articles.as_str()])?;
    }
    writer.flush()?;
    Ok(())
}

fn parse_year_set(text: &str) -> Result<BTreeSet<i32>, String> {
    let mut years = BTreeSet::new();
    for part in text.split('+') {
        let year: i32 = part
            .parse()
            .map_err(|_| format!("unparsable year {part:?}"))?;
        years.insert(year);
    }
    Ok(years)
}

fn year_set_string(years: &BTreeSet<i32>) -> String {
    years
        .iter()
        .map(i32::to_string)
        .collect::<Vec<_>>()
        .join("+")
}

/// Reads citation tuples without registry validation; run
/// `corpus::validate_tuples` on the result.
pub fn read_citations(path: &Path) -> Result<Vec<CitationTuple>, PipelineError> {
    let mut reader = csv_reader(path)?;
    let mut tuples = Vec::new();
    for result in reader.records() {
        let record = result?;
        let line = record_line(&record);
        let source = field(path, &record, 0, "source_id")?;
        let target = field(path, &record, 1, "target_id")?;
        check_journal_id(source).map_err(|msg| bad(path, line, msg))?;
        check_journal_id(target).map_err(|msg| bad(path, line, msg))?;
        let source_years = parse_year_set(field(path, &record, 2, "source_years")?)
            .map_err(|msg| bad(path, line, msg))?;
        let target_years = parse_year_set(field(path, &record, 3, "target_years")?)
            .map_err(|msg| bad(path, line, msg))?;
        let count_text = field(path, &record, 4, "count")?;
        let count: u64 = count_text
            .parse()
            .map_err(|_| bad(path, line, format!("unparsable count {count_text:?}")))?;
        let tuple = CitationTuple {
            source_journal: source.to_string(),
            target_journal: target.to_string(),
            source_years,
            target_years,
            count,
        };
        tuple.validate().map_err(|e| bad(path, line, e))?;
        tuples.push(tuple);
    }
    Ok(tuples)
}

pub fn write_citations(path: &Path, tuples: &[CitationTuple]) -> Result<(), PipelineError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "source_id",
        "target_id",
        "source_years",
        "target_years",
        "count",
    ])?;
    for tuple in tuples {
        writer.write_record([
            tuple.source_journal.as_str(),
            tuple.target_journal.as_str(),
            &year_set_string(&tuple.source_years),
            &year_set_string(&tuple.target_years),
            &tuple.count.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_article_map(path: &Path) -> Result<ArticleMap, PipelineError> {
    let mut reader = csv_reader(path)?;
    let mut map = ArticleMap::new();
    for result in reader.records() {
        let record = result?;
        let line = record_line(&record);
        let article = field(path, &record, 0, "article_id")?;
        let journal = field(path, &record, 1, "journal_id")?;
        check_journal_id(journal).map_err(|msg| bad(path, line, msg))?;
        let year_text = field(path, &record, 2, "publication_year")?;
        let year: i32 = year_text
            .parse()
            .map_err(|_| bad(path, line, format!("unparsable year {year_text:?}")))?;
        let citation_count = match record.get(3) {
            None | Some("") => None,
            Some(text) => Some(text.parse::<u64>().map_err(|_| {
                bad(path, line, format!("unparsable citation count {text:?}"))
            })?),
        };
        map.insert(
            article.to_string(),
            ArticleRecord {
                journal: journal.to_string(),
                publication_year: year,
                citation_count,
            },
        )
        .map_err(|e| bad(path, line, e))?;
    }
    Ok(map)
}

pub fn write_article_map(path: &Path, map: &ArticleMap) -> Result<(), PipelineError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["article_id", "journal_id", "publication_year", "citation_count"])?;
    for (id, record) in map.iter() {
        writer.write_record([
            id.as_str(),
            record.journal.as_str(),
            &record.publication_year.to_string(),
            &record
                .citation_count
                .map(|c| c.to_string())
                .unwrap_or_default(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_usage_log(path: &Path) -> Result<Vec<UsageRequest>, PipelineError> {
    let mut reader = csv_reader(path)?;
    let mut requests = Vec::new();
    for (order, result) in reader.records().enumerate() {
        let record = result?;
        let line = record_line(&record);
        let timestamp = field(path, &record, 0, "timestamp")?;
        let parsed = DateTime::parse_from_rfc3339(timestamp)
            .map_err(|e| bad(path, line, format!("bad timestamp {timestamp:?}: {e}")))?;
        requests.push(UsageRequest {
            timestamp_ms: parsed.timestamp_millis(),
            order: order as u64,
            session_id: field(path, &record, 1, "session_id")?.to_string(),
            article_id: field(path, &record, 2, "article_id")?.to_string(),
            request_type: field(path, &record, 3, "request_type")?.to_string(),
        });
    }
    Ok(requests)
}

pub fn write_usage_log(path: &Path, requests: &[UsageRequest]) -> Result<(), PipelineError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["timestamp", "session_id", "article_id", "request_type"])?;
    for request in requests {
        let stamp = DateTime::<Utc>::from_timestamp_millis(request.timestamp_ms)
            .ok_or_else(|| {
                PipelineError::Runtime(format!(
                    "timestamp {} out of range",
                    request.timestamp_ms
                ))
            })?
            .to_rfc3339_opts(SecondsFormat::AutoSi, true);
        writer.write_record([
            stamp.as_str(),
            request.session_id.as_str(),
            request.article_id.as_str(),
            request.request_type.as_str(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
