//! Run configuration: one JSON document describing inputs (files or a
//! synthetic corpus), analysis windows, network build flags, and the
//! statistical parameters of every stage. CLI flags override config
//! fields.

use std::path::{Path, PathBuf};

use impactmap_core::centrality::{DistanceConvention, PageRankParams};
use impactmap_core::cluster::Linkage;
use impactmap_core::measures::MeasureWindows;
use impactmap_core::synth::{SessionLength, SynthConfig};
use serde::{Deserialize, Serialize};

use crate::error::PipelineError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Raw input files; mutually exclusive with `synth`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputPaths>,
    /// Synthetic corpus parameters; mutually exclusive with `input`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSection>,
    #[serde(default)]
    pub windows: WindowsSection,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub pagerank: PageRankSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// When true, non-convergence of an iterative stage aborts the run
    /// (exit code 3) instead of landing in the manifest warnings.
    #[serde(default)]
    pub strict_convergence: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("impactmap-out")
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InputPaths {
    pub registry: PathBuf,
    pub citations: PathBuf,
    pub article_map: PathBuf,
    /// Omit for a citation-only run (23 measures).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage_log: Option<PathBuf>,
    /// Drop citation tuples naming unknown journals (with a warning
    /// count) instead of rejecting the load.
    #[serde(default)]
    pub lenient_citations: bool,
    /// Treat usage requests naming unknown articles as a hard error
    /// instead of dropping them.
    #[serde(default)]
    pub strict_usage: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub n_journals: usize,
    pub n_fields: usize,
    pub year_min: i32,
    pub year_max: i32,
    pub session_count: usize,
    pub session_length: SessionLengthSection,
    pub within_field_affinity: f64,
    pub prestige_skew: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum SessionLengthSection {
    Geometric { p: f64 },
    Fixed { len: usize },
}

impl SynthSection {
    pub fn to_core(&self) -> SynthConfig {
        SynthConfig {
            n_journals: self.n_journals,
            n_fields: self.n_fields,
            year_min: self.year_min,
            year_max: self.year_max,
            session_count: self.session_count,
            session_length: match self.session_length {
                SessionLengthSection::Geometric { p } => SessionLength::Geometric { p },
                SessionLengthSection::Fixed { len } => SessionLength::Fixed { len },
            },
            within_field_affinity: self.within_field_affinity,
            prestige_skew: self.prestige_skew,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WindowsSection {
    /// Defaults to the synth corpus census year when generated input is
    /// used; required for file input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub census_year: Option<i32>,
    #[serde(default = "two")]
    pub impact_factor_years: u8,
    #[serde(default = "two")]
    pub cites_per_doc_years: u8,
    #[serde(default = "three")]
    pub total_cites_years: u8,
    #[serde(default = "three")]
    pub per_article_pagerank_years: u8,
    #[serde(default = "two")]
    pub usage_impact_years: u8,
}

fn two() -> u8 {
    2
}

fn three() -> u8 {
    3
}

impl Default for WindowsSection {
    fn default() -> Self {
        Self {
            census_year: None,
            impact_factor_years: 2,
            cites_per_doc_years: 2,
            total_cites_years: 3,
            per_article_pagerank_years: 3,
            usage_impact_years: 2,
        }
    }
}

impl WindowsSection {
    pub fn to_core(&self, census_year: i32) -> MeasureWindows {
        MeasureWindows {
            census_year,
            impact_factor_years: self.impact_factor_years,
            cites_per_doc_years: self.cites_per_doc_years,
            total_cites_years: self.total_cites_years,
            per_article_pagerank_years: self.per_article_pagerank_years,
            usage_impact_years: self.usage_impact_years,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    /// Collapse consecutive repeats of one journal inside a clickstream.
    #[serde(default = "yes")]
    pub dedup_consecutive: bool,
    #[serde(default)]
    pub keep_self_loops: bool,
    /// Geodesic convention for weighted closeness/betweenness.
    #[serde(default)]
    pub weighted_distance: DistanceSection,
    /// Citation source-year filter; defaults to `[census_year]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_years: Option<Vec<i32>>,
    /// Citation target-year filter; defaults to the impact-factor window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_years: Option<Vec<i32>>,
}

fn yes() -> bool {
    true
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self {
            dedup_consecutive: true,
            keep_self_loops: false,
            weighted_distance: DistanceSection::default(),
            source_years: None,
            target_years: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceSection {
    #[default]
    InverseWeight,
    WeightAsLength,
}

impl DistanceSection {
    pub fn to_core(self) -> DistanceConvention {
        match self {
            Self::InverseWeight => DistanceConvention::InverseWeight,
            Self::WeightAsLength => DistanceConvention::WeightAsLength,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PageRankSection {
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: u32,
}

fn default_damping() -> f64 {
    0.85
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> u32 {
    1000
}

impl Default for PageRankSection {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

impl PageRankSection {
    pub fn to_core(&self) -> PageRankParams {
        PageRankParams {
            damping: self.damping,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Two-sided significance level of the measure-removal filter.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Components retained for the varimax rotation and the map.
    #[serde(default = "two_usize")]
    pub components: usize,
    #[serde(default)]
    pub linkage: LinkageSection,
    #[serde(default = "default_cut_height")]
    pub cut_height: f64,
    #[serde(default = "default_kmeans_k")]
    pub kmeans_k: usize,
    #[serde(default = "default_kmeans_seed")]
    pub kmeans_seed: u64,
    #[serde(default = "default_kmeans_restarts")]
    pub kmeans_restarts: u32,
    #[serde(default = "default_kmeans_max_iter")]
    pub kmeans_max_iter: u32,
}

fn default_alpha() -> f64 {
    0.05
}

fn two_usize() -> usize {
    2
}

fn default_cut_height() -> f64 {
    1.1
}

fn default_kmeans_k() -> usize {
    5
}

fn default_kmeans_seed() -> u64 {
    20_090_617
}

fn default_kmeans_restarts() -> u32 {
    50
}

fn default_kmeans_max_iter() -> u32 {
    200
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            components: 2,
            linkage: LinkageSection::default(),
            cut_height: default_cut_height(),
            kmeans_k: default_kmeans_k(),
            kmeans_seed: default_kmeans_seed(),
            kmeans_restarts: default_kmeans_restarts(),
            kmeans_max_iter: default_kmeans_max_iter(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum LinkageSection {
    Single,
    #[default]
    Complete,
}

impl LinkageSection {
    pub fn to_core(self) -> Linkage {
        match self {
            Self::Single => Linkage::Single,
            Self::Complete => Linkage::Complete,
        }
    }

    pub fn label(self) -> &'static str {
        self.to_core().label()
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            PipelineError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Validation(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        match (&self.input, &self.synth) {
            (Some(_), Some(_)) => {
                return Err(PipelineError::Validation(
                    "config: give either input paths or a synth section, not both".into(),
                ))
            }
            (None, None) => {
                return Err(PipelineError::Validation(
                    "config: one of input paths or a synth section is required".into(),
                ))
            }
            _ => {}
        }
        if let Some(input) = &self.input {
            for (label, path) in [
                ("registry", Some(&input.registry)),
                ("citations", Some(&input.citations)),
                ("article_map", Some(&input.article_map)),
                ("usage_log", input.usage_log.as_ref()),
            ] {
                if let Some(path) = path {
                    if !path.exists() {
                        return Err(PipelineError::Validation(format!(
                            "config: {label} file {} does not exist",
                            path.display()
                        )));
                    }
                }
            }
            if self.windows.census_year.is_none() {
                return Err(PipelineError::Validation(
                    "config: windows.census_year is required for file input".into(),
                ));
            }
        }
        if let Some(synth) = &self.synth {
            synth.to_core().validate()?;
        }
        if !(self.analysis.alpha > 0.0 && self.analysis.alpha < 1.0) {
            return Err(PipelineError::Validation(
                "config: analysis.alpha must lie in (0, 1)".into(),
            ));
        }
        if self.analysis.components < 2 {
            return Err(PipelineError::Validation(
                "config: analysis.components must be at least 2".into(),
            ));
        }
        if !(self.pagerank.damping > 0.0 && self.pagerank.damping < 1.0) {
            return Err(PipelineError::Validation(
                "config: pagerank.damping must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// The census year every window hangs off: explicit, or the synth
    /// corpus' latest year.
    pub fn census_year(&self) -> i32 {
        self.windows
            .census_year
            .or_else(|| self.synth.as_ref().map(|s| s.year_max))
            .expect("validated: census year present for file input")
    }

    pub fn has_usage(&self) -> bool {
        match (&self.input, &self.synth) {
            (Some(input), _) => input.usage_log.is_some(),
            (_, Some(_)) => true,
            _ => false,
        }
    }
}
