//! Correlation matrix CSV (measure-id header row and column, empty cells
//! for undefined entries) and the per-measure mean-correlation table.

use std::path::Path;

use impactmap_core::measures::{catalogue, MeasureDescriptor};
use impactmap_core::stats::CorrelationMatrix;

use crate::error::PipelineError;
use crate::fmt;
use crate::io::docs::CorrelationDetails;

pub fn write_matrix(path: &Path, matrix: &CorrelationMatrix) -> Result<(), PipelineError> {
    let n = matrix.len();
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["measure_id".to_string()];
    header.extend(matrix.descriptors().iter().map(|d| d.id.to_string()));
    writer.write_record(&header)?;
    for i in 0..n {
        let mut row = vec![matrix.descriptors()[i].id.to_string()];
        for j in 0..n {
            row.push(match matrix.value(i, j) {
                Some(v) => fmt::sig(v),
                None => String::new(),
            });
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

fn descriptor_by_id(id: u8) -> Result<MeasureDescriptor, PipelineError> {
    catalogue()
        .into_iter()
        .find(|d| d.id == id)
        .ok_or_else(|| PipelineError::Runtime(format!("unknown measure id {id}")))
}

/// Rebuilds the full matrix from `matrix.csv` plus the pair counts kept
/// in the details document.
pub fn read_matrix(
    path: &Path,
    details: &CorrelationDetails,
) -> Result<CorrelationMatrix, PipelineError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| PipelineError::Runtime(format!("{}: {e}", path.display())))?;
    let n = details.measure_ids.len();
    let mut values: Vec<Option<f64>> = vec![None; n * n];
    for (i, result) in reader.records().enumerate() {
        let record = result?;
        if i >= n {
            return Err(PipelineError::Runtime(format!(
                "{}: more rows than measures",
                path.display()
            )));
        }
        for j in 0..n {
            let cell = record.get(j + 1).unwrap_or("");
            if !cell.is_empty() {
                let value: f64 = cell.parse().map_err(|_| {
                    PipelineError::Runtime(format!(
                        "{}: unparsable correlation {cell:?}",
                        path.display()
                    ))
                })?;
                values[i * n + j] = Some(value);
            }
        }
    }
    let descriptors = details
        .measure_ids
        .iter()
        .map(|&id| descriptor_by_id(id))
        .collect::<Result<Vec<_>, _>>()?;
    let pair_n: Vec<u64> = details.pair_n.iter().flatten().copied().collect();
    CorrelationMatrix::from_parts(descriptors, values, pair_n)
        .map_err(|e| PipelineError::Runtime(format!("{}: {e}", path.display())))
}

/// One row per measure: id, name, source, kept flag, and its mean
/// correlation to all other measures (empty when undefined).
pub fn write_mean_correlation(
    path: &Path,
    matrix: &CorrelationMatrix,
    means: &[Option<f64>],
    kept_ids: &[u8],
) -> Result<(), PipelineError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["measure_id", "name", "source", "kept", "rho_bar"])?;
    for (descriptor, mean) in matrix.descriptors().iter().zip(means) {
        writer.write_record([
            descriptor.id.to_string().as_str(),
            descriptor.name,
            descriptor.source.label(),
            if kept_ids.contains(&descriptor.id) {
                "true"
            } else {
                "false"
            },
            &mean.map(fmt::sig).unwrap_or_default(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Rows of `mean_correlation.csv` with field strings preserved, so the
/// report renders exactly what was stored.
pub struct MeanCorrelationRow {
    pub id: u8,
    pub name: String,
    pub source: String,
    pub kept: bool,
    pub rho_bar: Option<String>,
}

pub fn read_mean_correlation(path: &Path) -> Result<Vec<MeanCorrelationRow>, PipelineError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| PipelineError::Runtime(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result?;
        let id: u8 = record
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PipelineError::Runtime("bad mean_correlation row".into()))?;
        rows.push(MeanCorrelationRow {
            id,
            name: record.get(1).unwrap_or("").to_string(),
            source: record.get(2).unwrap_or("").to_string(),
            kept: record.get(3) == Some("true"),
            rho_bar: match record.get(4) {
                None | Some("") => None,
                Some(text) => Some(text.to_string()),
            },
        });
    }
    Ok(rows)
}
