//! Serde documents persisted between pipeline stages and into the final
//! manifest. Stages communicate exclusively through these files plus the
//! CSV/TSV data files, so any stage can be recomputed or cache-skipped
//! independently.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{DistanceSection, PageRankSection, RunConfig};
use crate::error::PipelineError;

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::Runtime(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| PipelineError::Runtime(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// `corpus/ingest.json`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestDoc {
    pub source: String,
    pub census_year: i32,
    pub has_usage: bool,
    pub dropped_citation_tuples: u64,
    pub dropped_usage_requests: u64,
    pub input_digests: BTreeMap<String, String>,
}

/// `networks/build.json`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworksDoc {
    pub source_years: Vec<i32>,
    pub target_years: Vec<i32>,
    pub dedup_consecutive: bool,
    pub keep_self_loops: bool,
    pub citation: NetworkSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<NetworkSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub nodes: usize,
    pub edges: usize,
    pub density: f64,
}

/// `measures/measures.json`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasuresDoc {
    pub census_year: i32,
    /// Digests of the corpus and network files the battery consumed.
    pub input_digests: BTreeMap<String, String>,
    pub pagerank: PageRankSection,
    pub weighted_distance: DistanceSection,
    pub impact_factor_years: u8,
    pub cites_per_doc_years: u8,
    pub total_cites_years: u8,
    pub per_article_pagerank_years: u8,
    pub usage_impact_years: u8,
    pub measures: Vec<MeasureEntry>,
    pub warnings: Vec<WarningEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureEntry {
    pub id: u8,
    pub name: String,
    pub source: String,
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsEntry>,
    pub file: String,
    pub undefined_journals: Vec<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ParamsEntry {
    pub directed: bool,
    pub weighted: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WarningEntry {
    pub measure_id: u8,
    pub message: String,
}

/// `correlation/details.json`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationDetails {
    pub alpha: f64,
    /// Order of rows/columns in `matrix.csv`.
    pub measure_ids: Vec<u8>,
    pub pair_n: Vec<Vec<u64>>,
    /// Pairs whose correlation is undefined (constant ranking).
    pub undefined_pairs: Vec<(u8, u8)>,
    pub removed: Vec<RemovedEntry>,
    pub kept_ids: Vec<u8>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemovedEntry {
    pub id: u8,
    pub name: String,
}

/// `factor/model.json`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorDoc {
    pub measure_ids: Vec<u8>,
    pub eigenvalues: Vec<f64>,
    pub variance_proportion: Vec<f64>,
    pub cumulative_proportion: Vec<f64>,
    /// Row-major, columns are eigenvectors.
    pub eigenvectors: Vec<Vec<f64>>,
    pub loadings: Vec<Vec<f64>>,
    pub rotation: RotationDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotationDoc {
    pub k: usize,
    pub rotated_loadings: Vec<Vec<f64>>,
    pub rotation_matrix: Vec<Vec<f64>>,
    pub converged: bool,
    pub sweeps: u32,
}

/// `clusters/dendrogram.json`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DendrogramDoc {
    pub linkage: String,
    /// Leaf measure ids, in matrix order.
    pub leaves: Vec<u8>,
    pub merges: Vec<MergeDoc>,
    pub cut_height: f64,
    pub cut_clusters: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergeDoc {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

/// `clusters/kmeans.json`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KMeansDoc {
    pub k: usize,
    pub seed: u64,
    pub restarts: u32,
    pub max_iter: u32,
    pub wcss: f64,
    pub chosen_run: u32,
}

/// `manifest.json`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: ToolInfo,
    pub parameters: RunConfig,
    pub census_year: i32,
    /// Fixed methodological conventions that are not configurable.
    pub conventions: Vec<String>,
    pub warnings: Vec<String>,
    pub removed_measures: Vec<RemovedEntry>,
    pub files: Vec<FileDigest>,
    /// Digest over the sorted (path, sha256) list; the manifest itself
    /// is excluded.
    pub bundle_digest: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}
