//! Ranking CSVs: one file per measure, `journal_id,score,rank`, rows
//! sorted by descending score with a stable id tiebreak. Scores and
//! ranks carry 12 significant digits.

use std::path::Path;

use impactmap_core::measures::MeasureRanking;

use crate::error::PipelineError;
use crate::fmt;

pub fn write_ranking(path: &Path, ranking: &MeasureRanking) -> Result<(), PipelineError> {
    let mut rows: Vec<(&str, f64, f64)> = ranking
        .iter()
        .zip(ranking.ranks())
        .map(|((id, score), &rank)| (id, score, rank))
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["journal_id", "score", "rank"])?;
    for (id, score, rank) in rows {
        writer.write_record([id, &fmt::sig(score), &fmt::sig(rank)])?;
    }
    writer.flush()?;
    Ok(())
}

/// Journal/score pairs as stored; ranks are recomputed downstream.
pub fn read_ranking_scores(path: &Path) -> Result<Vec<(String, f64)>, PipelineError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_path(path)
        .map_err(|e| PipelineError::Runtime(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result?;
        let id = record
            .get(0)
            .ok_or_else(|| PipelineError::Runtime(format!("{}: missing id", path.display())))?;
        let score: f64 = record
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                PipelineError::Runtime(format!("{}: unparsable score", path.display()))
            })?;
        rows.push((id.to_string(), score));
    }
    Ok(rows)
}
