//! Stage-based pipeline: ingest -> networks -> measures -> correlate ->
//! factor -> map / clusters -> report.
//!
//! Stages communicate only through files in the output directory, so
//! each is independently runnable, cacheable by input digest, and the
//! whole bundle is reproducible byte for byte for a given config. A
//! stage writes into a temporary directory that is renamed into place on
//! success; failures leave no partial outputs behind.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use impactmap_core::corpus::{
    resolve_requests, sessionize, validate_tuples, ResolvedRequest, UnknownIdPolicy,
};
use impactmap_core::factor::{pca, project_map, FactorModel, VarimaxRotation};
use impactmap_core::matrix::Matrix;
use impactmap_core::measures::{
    catalogue, derive_statistics, full_battery, BatteryOptions, MeasureDescriptor,
    MeasureRanking, Universe,
};
use impactmap_core::net::{
    build_citation_network, build_usage_network, SparseNetwork,
};
use impactmap_core::stats::{
    correlation_matrix, mean_correlation, significance_filter, CorrelationMatrix,
};
use impactmap_core::{cluster, synth};

use crate::cache::{dir_digests, sha256_file, sha256_hex, StageCache};
use crate::config::RunConfig;
use crate::error::PipelineError;
use crate::io::docs::{
    read_json, write_json, CorrelationDetails, DendrogramDoc, FactorDoc, FileDigest, IngestDoc,
    KMeansDoc, Manifest, MeasureEntry, MeasuresDoc, MergeDoc, NetworkSummary, NetworksDoc,
    ParamsEntry, RemovedEntry, RotationDoc, ToolInfo, WarningEntry,
};
use crate::io::{correlation, corpus_files, network, newick, rankings, svg};

const VARIMAX_TOL: f64 = 1e-12;
const VARIMAX_MAX_SWEEPS: u32 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Networks,
    Measures,
    Correlate,
    Factor,
    Map,
    Clusters,
    Report,
}

impl Stage {
    pub const ORDER: [Stage; 8] = [
        Stage::Ingest,
        Stage::Networks,
        Stage::Measures,
        Stage::Correlate,
        Stage::Factor,
        Stage::Map,
        Stage::Clusters,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ingest => "ingest",
            Self::Networks => "networks",
            Self::Measures => "measures",
            Self::Correlate => "correlate",
            Self::Factor => "factor",
            Self::Map => "map",
            Self::Clusters => "clusters",
            Self::Report => "report",
        }
    }

    fn dir(self) -> &'static str {
        match self {
            Self::Ingest => "corpus",
            Self::Networks => "networks",
            Self::Measures => "measures",
            Self::Correlate => "correlation",
            Self::Factor => "factor",
            Self::Map => "map",
            Self::Clusters => "clusters",
            Self::Report => "report",
        }
    }

    fn deps(self) -> &'static [Stage] {
        match self {
            Self::Ingest => &[],
            Self::Networks => &[Stage::Ingest],
            Self::Measures => &[Stage::Networks],
            Self::Correlate => &[Stage::Measures],
            Self::Factor => &[Stage::Correlate],
            Self::Map => &[Stage::Factor],
            Self::Clusters => &[Stage::Correlate],
            Self::Report => &[Stage::Map, Stage::Clusters],
        }
    }
}

pub struct Pipeline {
    config: RunConfig,
    out: PathBuf,
    cache: Option<StageCache>,
}

impl Pipeline {
    pub fn new(config: RunConfig, cache_dir: Option<PathBuf>) -> Result<Self, PipelineError> {
        config.validate()?;
        let out = config.out_dir.clone();
        std::fs::create_dir_all(&out)?;
        let cache = cache_dir.map(StageCache::new).transpose()?;
        Ok(Self { config, out, cache })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    /// Runs `target` and everything it depends on, in fixed order.
    pub fn run(&self, target: Stage) -> Result<(), PipelineError> {
        let mut needed = BTreeSet::new();
        closure(target, &mut needed);
        for stage in Stage::ORDER {
            if needed.contains(&stage) {
                self.run_stage(stage)
                    .map_err(|e| e.in_stage(stage.name()))?;
            }
        }
        Ok(())
    }

    fn run_stage(&self, stage: Stage) -> Result<(), PipelineError> {
        let key = self.stage_key(stage)?;
        let final_dir = self.out.join(stage.dir());
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            if stage != Stage::Report && cache.fetch(stage.name(), key, &final_dir)? {
                eprintln!("stage {}: reused cached outputs", stage.name());
                return Ok(());
            }
        }

        let tmp = self.out.join(format!(".tmp-{}", stage.name()));
        if tmp.exists() {
            std::fs::remove_dir_all(&tmp)?;
        }
        std::fs::create_dir_all(&tmp)?;
        let started = std::time::Instant::now();
        let result = match stage {
            Stage::Ingest => self.stage_ingest(&tmp),
            Stage::Networks => self.stage_networks(&tmp),
            Stage::Measures => self.stage_measures(&tmp),
            Stage::Correlate => self.stage_correlate(&tmp),
            Stage::Factor => self.stage_factor(&tmp),
            Stage::Map => self.stage_map(&tmp),
            Stage::Clusters => self.stage_clusters(&tmp),
            Stage::Report => self.stage_report(&tmp),
        };
        match result {
            Ok(()) => {
                if stage == Stage::Report {
                    // Summary and manifest live at the bundle root.
                    for name in ["summary.txt", "manifest.json"] {
                        let from = tmp.join(name);
                        if from.exists() {
                            std::fs::rename(&from, self.out.join(name))?;
                        }
                    }
                    std::fs::remove_dir_all(&tmp)?;
                } else {
                    if final_dir.exists() {
                        std::fs::remove_dir_all(&final_dir)?;
                    }
                    std::fs::rename(&tmp, &final_dir)?;
                    if let (Some(cache), Some(key)) = (&self.cache, &key) {
                        cache.store(stage.name(), key, &final_dir)?;
                    }
                }
                eprintln!(
                    "stage {}: ok ({:.2}s)",
                    stage.name(),
                    started.elapsed().as_secs_f64()
                );
                Ok(())
            }
            Err(e) => {
                let _ = std::fs::remove_dir_all(&tmp);
                Err(e)
            }
        }
    }

    /// Cache key: stage name, relevant parameters, and the digests of
    /// every input file. `None` means the stage is never cached.
    fn stage_key(&self, stage: Stage) -> Result<Option<String>, PipelineError> {
        if stage == Stage::Report {
            return Ok(None);
        }
        let mut material = format!("stage={}\n", stage.name());
        let params = match stage {
            Stage::Ingest => serde_json::to_string(&(
                &self.config.input,
                &self.config.synth,
                self.config.windows.census_year,
            ))?,
            Stage::Networks => serde_json::to_string(&(
                &self.config.network,
                self.config.windows.impact_factor_years,
            ))?,
            Stage::Measures => serde_json::to_string(&(
                &self.config.pagerank,
                &self.config.windows,
                self.config.network.weighted_distance,
                self.config.strict_convergence,
            ))?,
            Stage::Correlate => serde_json::to_string(&self.config.analysis.alpha)?,
            Stage::Factor => serde_json::to_string(&(
                self.config.analysis.components,
                self.config.strict_convergence,
            ))?,
            Stage::Map => String::new(),
            Stage::Clusters => serde_json::to_string(&(
                self.config.analysis.linkage,
                self.config.analysis.cut_height,
                self.config.analysis.kmeans_k,
                self.config.analysis.kmeans_seed,
                self.config.analysis.kmeans_restarts,
                self.config.analysis.kmeans_max_iter,
            ))?,
            Stage::Report => unreachable!(),
        };
        material.push_str(&params);
        material.push('\n');
        if stage == Stage::Ingest {
            if let Some(input) = &self.config.input {
                for path in [
                    Some(&input.registry),
                    Some(&input.citations),
                    Some(&input.article_map),
                    input.usage_log.as_ref(),
                ]
                .into_iter()
                .flatten()
                {
                    material.push_str(&sha256_file(path)?);
                    material.push('\n');
                }
            }
        } else {
            for dep in stage.deps() {
                for (rel, digest) in dir_digests(&self.out.join(dep.dir()))? {
                    material.push_str(&format!("{rel}={digest}\n"));
                }
            }
        }
        Ok(Some(sha256_hex(material.as_bytes())))
    }

    // ----- ingest ---------------------------------------------------

    fn stage_ingest(&self, dir: &Path) -> Result<(), PipelineError> {
        let mut input_digests = BTreeMap::new();
        let (registry, tuples, articles, usage, drops, source) = match (
            &self.config.synth,
            &self.config.input,
        ) {
            (Some(section), None) => {
                let bundle = synth::generate(&section.to_core())?;
                write_json(
                    &dir.join("ground_truth.json"),
                    &ground_truth_doc(&bundle.ground_truth),
                )?;
                (
                    bundle.registry,
                    bundle.tuples,
                    bundle.articles,
                    Some(bundle.requests),
                    (0u64, 0u64),
                    "synth",
                )
            }
            (None, Some(paths)) => {
                for (label, path) in [
                    ("registry", Some(&paths.registry)),
                    ("citations", Some(&paths.citations)),
                    ("article_map", Some(&paths.article_map)),
                    ("usage_log", paths.usage_log.as_ref()),
                ] {
                    if let Some(path) = path {
                        input_digests.insert(label.to_string(), sha256_file(path)?);
                    }
                }
                let registry = corpus_files::read_registry(&paths.registry)?;
                let raw_tuples = corpus_files::read_citations(&paths.citations)?;
                let policy = if paths.lenient_citations {
                    UnknownIdPolicy::DropWithWarning
                } else {
                    UnknownIdPolicy::Strict
                };
                let (tuples, dropped_tuples) = validate_tuples(raw_tuples, &registry, policy)?;
                let articles = corpus_files::read_article_map(&paths.article_map)?;
                articles.validate_against(&registry)?;
                let (usage, dropped_requests) = match &paths.usage_log {
                    Some(path) => {
                        let requests = corpus_files::read_usage_log(path)?;
                        let policy = if paths.strict_usage {
                            UnknownIdPolicy::Strict
                        } else {
                            UnknownIdPolicy::DropWithWarning
                        };
                        // Retain only requests whose article resolves, so
                        // the canonical corpus is closed under the map.
                        let (resolved, dropped) =
                            resolve_requests(&requests, &articles, policy)?;
                        let kept_keys: BTreeSet<(i64, u64)> = resolved
                            .iter()
                            .map(|r| (r.timestamp_ms, r.order))
                            .collect();
                        let kept: Vec<_> = requests
                            .into_iter()
                            .filter(|r| kept_keys.contains(&(r.timestamp_ms, r.order)))
                            .collect();
                        (Some(kept), dropped)
                    }
                    None => (None, 0),
                };
                (
                    registry,
                    tuples,
                    articles,
                    usage,
                    (dropped_tuples, dropped_requests),
                    "files",
                )
            }
            _ => unreachable!("validated: exactly one input source"),
        };

        corpus_files::write_registry(&dir.join("registry.tsv"), &registry)?;
        corpus_files::write_citations(&dir.join("citations.csv"), &tuples)?;
        corpus_files::write_article_map(&dir.join("articles.csv"), &articles)?;
        if let Some(requests) = &usage {
            corpus_files::write_usage_log(&dir.join("usage.csv"), requests)?;
        }
        let doc = IngestDoc {
            source: source.to_string(),
            census_year: self.config.census_year(),
            has_usage: usage.is_some(),
            dropped_citation_tuples: drops.0,
            dropped_usage_requests: drops.1,
            input_digests,
        };
        write_json(&dir.join("ingest.json"), &doc)?;
        Ok(())
    }

    fn load_corpus(&self) -> Result<LoadedCorpus, PipelineError> {
        let corpus_dir = self.out.join("corpus");
        let ingest: IngestDoc = read_json(&corpus_dir.join("ingest.json"))?;
        let registry = corpus_files::read_registry(&corpus_dir.join("registry.tsv"))?;
        let tuples = corpus_files::read_citations(&corpus_dir.join("citations.csv"))?;
        let articles = corpus_files::read_article_map(&corpus_dir.join("articles.csv"))?;
        let usage = if ingest.has_usage {
            Some(corpus_files::read_usage_log(&corpus_dir.join("usage.csv"))?)
        } else {
            None
        };
        Ok(LoadedCorpus {
            ingest,
            registry,
            tuples,
            articles,
            usage,
        })
    }

    fn resolved_usage(
        &self,
        corpus: &LoadedCorpus,
    ) -> Result<Option<Vec<ResolvedRequest>>, PipelineError> {
        match &corpus.usage {
            // The canonical corpus only holds resolvable requests.
            Some(requests) => {
                let (resolved, _) =
                    resolve_requests(requests, &corpus.articles, UnknownIdPolicy::Strict)?;
                Ok(Some(resolved))
            }
            None => Ok(None),
        }
    }

    // ----- networks -------------------------------------------------

    fn citation_year_filters(&self, census: i32) -> (BTreeSet<i32>, BTreeSet<i32>) {
        let source: BTreeSet<i32> = match &self.config.network.source_years {
            Some(years) => years.iter().copied().collect(),
            None => [census].into(),
        };
        let target: BTreeSet<i32> = match &self.config.network.target_years {
            Some(years) => years.iter().copied().collect(),
            None => (1..=self.config.windows.impact_factor_years as i32)
                .map(|d| census - d)
                .collect(),
        };
        (source, target)
    }

    fn stage_networks(&self, dir: &Path) -> Result<(), PipelineError> {
        let corpus = self.load_corpus()?;
        let census = corpus.ingest.census_year;
        let (source_years, target_years) = self.citation_year_filters(census);
        let net_cfg = &self.config.network;

        let citation = build_citation_network(
            &corpus.tuples,
            &source_years,
            &target_years,
            &corpus.registry,
            net_cfg.keep_self_loops,
        )?;
        let params = format!(
            "source_years={} target_years={} self_loops={}",
            join_years(&source_years),
            join_years(&target_years),
            if net_cfg.keep_self_loops { "kept" } else { "removed" },
        );
        network::write_network(&dir.join("citation.tsv"), &citation, &params)?;

        let usage = match self.resolved_usage(&corpus)? {
            Some(resolved) => {
                let sessions = sessionize(&resolved);
                let net = build_usage_network(
                    &sessions,
                    citation.nodes(),
                    net_cfg.dedup_consecutive,
                    net_cfg.keep_self_loops,
                )?;
                let params = format!(
                    "dedup_consecutive={} self_loops={}",
                    net_cfg.dedup_consecutive,
                    if net_cfg.keep_self_loops { "kept" } else { "removed" },
                );
                network::write_network(&dir.join("usage.tsv"), &net, &params)?;
                Some(net)
            }
            None => None,
        };

        let doc = NetworksDoc {
            source_years: source_years.iter().copied().collect(),
            target_years: target_years.iter().copied().collect(),
            dedup_consecutive: net_cfg.dedup_consecutive,
            keep_self_loops: net_cfg.keep_self_loops,
            citation: summarize(&citation)?,
            usage: usage.as_ref().map(summarize).transpose()?,
        };
        write_json(&dir.join("build.json"), &doc)?;
        Ok(())
    }

    // ----- measures -------------------------------------------------

    fn stage_measures(&self, dir: &Path) -> Result<(), PipelineError> {
        let corpus = self.load_corpus()?;
        let networks_dir = self.out.join("networks");
        let citation = network::read_network(&networks_dir.join("citation.tsv"))?;
        let usage = if corpus.ingest.has_usage {
            Some(network::read_network(&networks_dir.join("usage.tsv"))?)
        } else {
            None
        };
        let windows = self
            .config
            .windows
            .to_core(corpus.ingest.census_year);
        let resolved = self.resolved_usage(&corpus)?;
        let inputs = derive_statistics(
            &corpus.registry,
            &corpus.tuples,
            &corpus.articles,
            resolved.as_deref(),
            &windows,
        );
        let options = BatteryOptions {
            pagerank: self.config.pagerank.to_core(),
            weighted_distance: self.config.network.weighted_distance.to_core(),
        };
        let outcome = full_battery(&citation, usage.as_ref(), &inputs, &options)?;

        if self.config.strict_convergence && !outcome.warnings.is_empty() {
            let detail: Vec<String> = outcome
                .warnings
                .iter()
                .map(|w| format!("measure {}: {}", w.measure_id, w.message))
                .collect();
            return Err(PipelineError::NonConvergence(detail.join("; ")));
        }

        let mut entries = Vec::new();
        for ranking in &outcome.rankings {
            let descriptor = ranking.descriptor();
            let file = format!("{}.csv", descriptor.slug());
            rankings::write_ranking(&dir.join(&file), ranking)?;
            entries.push(MeasureEntry {
                id: descriptor.id,
                name: descriptor.name.to_string(),
                source: descriptor.source.label().to_string(),
                family: descriptor.family.label().to_string(),
                params: descriptor.params.map(|p| ParamsEntry {
                    directed: p.directed,
                    weighted: p.weighted,
                }),
                file,
                undefined_journals: ranking
                    .undefined_indices()
                    .iter()
                    .map(|&i| ranking.universe().ids()[i as usize].clone())
                    .collect(),
            });
        }
        let mut input_digests = BTreeMap::new();
        for stage_dir in ["corpus", "networks"] {
            for (rel, digest) in dir_digests(&self.out.join(stage_dir))? {
                input_digests.insert(format!("{stage_dir}/{rel}"), digest);
            }
        }
        let doc = MeasuresDoc {
            census_year: windows.census_year,
            input_digests,
            pagerank: self.config.pagerank.clone(),
            weighted_distance: self.config.network.weighted_distance,
            impact_factor_years: windows.impact_factor_years,
            cites_per_doc_years: windows.cites_per_doc_years,
            total_cites_years: windows.total_cites_years,
            per_article_pagerank_years: windows.per_article_pagerank_years,
            usage_impact_years: windows.usage_impact_years,
            measures: entries,
            warnings: outcome
                .warnings
                .iter()
                .map(|w| WarningEntry {
                    measure_id: w.measure_id,
                    message: w.message.clone(),
                })
                .collect(),
        };
        write_json(&dir.join("measures.json"), &doc)?;
        Ok(())
    }

    fn load_rankings(&self) -> Result<(MeasuresDoc, Vec<MeasureRanking>), PipelineError> {
        let measures_dir = self.out.join("measures");
        let doc: MeasuresDoc = read_json(&measures_dir.join("measures.json"))?;
        let by_id: BTreeMap<u8, MeasureDescriptor> =
            catalogue().into_iter().map(|d| (d.id, d)).collect();

        let mut universe: Option<std::sync::Arc<Universe>> = None;
        let mut rankings = Vec::new();
        for entry in &doc.measures {
            let rows = rankings::read_ranking_scores(&measures_dir.join(&entry.file))?;
            let by_journal: BTreeMap<String, f64> = rows.into_iter().collect();
            let universe = match &universe {
                Some(u) => u.clone(),
                None => {
                    let ids: Vec<String> = by_journal.keys().cloned().collect();
                    let built = Universe::from_ids(ids)
                        .map_err(|e| PipelineError::Runtime(e.to_string()))?;
                    universe = Some(built.clone());
                    built
                }
            };
            let mut scores = Vec::with_capacity(universe.len());
            for id in universe.ids() {
                scores.push(*by_journal.get(id).ok_or_else(|| {
                    PipelineError::Runtime(format!(
                        "{}: journal {id} missing from ranking",
                        entry.file
                    ))
                })?);
            }
            let undefined: Vec<u32> = entry
                .undefined_journals
                .iter()
                .filter_map(|id| universe.index_of(id).map(|i| i as u32))
                .collect();
            let descriptor = by_id
                .get(&entry.id)
                .ok_or_else(|| {
                    PipelineError::Runtime(format!("unknown measure id {}", entry.id))
                })?
                .clone();
            rankings.push(
                MeasureRanking::new(descriptor, universe, scores, undefined)
                    .map_err(|e| PipelineError::Runtime(e.to_string()))?,
            );
        }
        Ok((doc, rankings))
    }

    // ----- correlate ------------------------------------------------

    fn stage_correlate(&self, dir: &Path) -> Result<(), PipelineError> {
        let (_, rankings) = self.load_rankings()?;
        let matrix = correlation_matrix(&rankings)?;
        let outcome = significance_filter(&matrix, self.config.analysis.alpha)?;
        let means = mean_correlation(&matrix);

        correlation::write_matrix(&dir.join("matrix.csv"), &matrix)?;
        let n = matrix.len();
        let details = CorrelationDetails {
            alpha: self.config.analysis.alpha,
            measure_ids: matrix.descriptors().iter().map(|d| d.id).collect(),
            pair_n: (0..n)
                .map(|i| (0..n).map(|j| matrix.pair_n(i, j)).collect())
                .collect(),
            undefined_pairs: matrix
                .undefined_pairs()
                .iter()
                .map(|p| (p.a.id, p.b.id))
                .collect(),
            removed: outcome
                .removed
                .iter()
                .map(|d| RemovedEntry {
                    id: d.id,
                    name: d.name.to_string(),
                })
                .collect(),
            kept_ids: outcome.kept.descriptors().iter().map(|d| d.id).collect(),
        };
        write_json(&dir.join("details.json"), &details)?;
        correlation::write_mean_correlation(
            &dir.join("mean_correlation.csv"),
            &matrix,
            &means,
            &details.kept_ids,
        )?;
        Ok(())
    }

    fn load_kept_matrix(&self) -> Result<(CorrelationDetails, CorrelationMatrix), PipelineError> {
        let correlation_dir = self.out.join("correlation");
        let details: CorrelationDetails = read_json(&correlation_dir.join("details.json"))?;
        let full = correlation::read_matrix(&correlation_dir.join("matrix.csv"), &details)?;
        let keep: Vec<usize> = details
            .kept_ids
            .iter()
            .map(|id| {
                details
                    .measure_ids
                    .iter()
                    .position(|m| m == id)
                    .ok_or_else(|| {
                        PipelineError::Runtime(format!("kept id {id} not in matrix"))
                    })
            })
            .collect::<Result<_, _>>()?;
        let kept = full.submatrix(&keep);
        if !kept.is_complete() {
            return Err(PipelineError::Runtime(
                "filtered correlation matrix still has missing entries".into(),
            ));
        }
        Ok((details, kept))
    }

    // ----- factor ---------------------------------------------------

    fn stage_factor(&self, dir: &Path) -> Result<(), PipelineError> {
        let (_, kept) = self.load_kept_matrix()?;
        let mut model = pca(&kept)?;
        model.rotate(
            self.config.analysis.components,
            VARIMAX_TOL,
            VARIMAX_MAX_SWEEPS,
        )?;
        let rotation = model.rotation.as_ref().expect("rotation just applied");
        if self.config.strict_convergence && !rotation.converged {
            return Err(PipelineError::NonConvergence(
                "varimax rotation did not converge".into(),
            ));
        }
        write_json(&dir.join("model.json"), &factor_doc(&model))?;
        Ok(())
    }

    // ----- map ------------------------------------------------------

    fn stage_map(&self, dir: &Path) -> Result<(), PipelineError> {
        let doc: FactorDoc = read_json(&self.out.join("factor").join("model.json"))?;
        let model = model_from_doc(&doc)?;
        let map = project_map(&model)?;

        let mut writer = csv::Writer::from_path(dir.join("map.csv"))?;
        writer.write_record(["measure_id", "name", "source", "pc1", "pc2"])?;
        for point in &map.points {
            writer.write_record([
                point.descriptor.id.to_string().as_str(),
                point.descriptor.name,
                point.descriptor.source.label(),
                &crate::fmt::sig(point.pc1),
                &crate::fmt::sig(point.pc2),
            ])?;
        }
        writer.flush()?;

        // Highlight the impact factor when it survived filtering.
        let highlight: Vec<u8> = map
            .points
            .iter()
            .filter(|p| p.descriptor.id == 5)
            .map(|p| p.descriptor.id)
            .collect();
        std::fs::write(dir.join("map.svg"), svg::measure_map_svg(&map, &highlight))?;
        Ok(())
    }

    // ----- clusters -------------------------------------------------

    fn stage_clusters(&self, dir: &Path) -> Result<(), PipelineError> {
        let (_, kept) = self.load_kept_matrix()?;
        let analysis = &self.config.analysis;
        let ids: Vec<u8> = kept.descriptors().iter().map(|d| d.id).collect();

        let dist = cluster::row_distance_matrix(&kept)?;
        let dendrogram = cluster::hclust(&dist, analysis.linkage.to_core());
        let assignment = cluster::cut(&dendrogram, analysis.cut_height);
        let dendrogram_doc = DendrogramDoc {
            linkage: analysis.linkage.label().to_string(),
            leaves: ids.clone(),
            merges: dendrogram
                .merges
                .iter()
                .map(|m| MergeDoc {
                    left: m.left,
                    right: m.right,
                    height: m.height,
                })
                .collect(),
            cut_height: analysis.cut_height,
            cut_clusters: assignment.k,
        };
        write_json(&dir.join("dendrogram.json"), &dendrogram_doc)?;
        let labels: Vec<String> = ids.iter().map(u8::to_string).collect();
        std::fs::write(
            dir.join("dendrogram.newick"),
            newick::to_newick(&dendrogram, &labels) + "\n",
        )?;
        write_assignment_csv(&dir.join("hclust_cut.csv"), &ids, &assignment.labels)?;

        let rows: Vec<Vec<f64>> = (0..kept.len())
            .map(|i| {
                kept.row(i)
                    .iter()
                    .map(|v| v.expect("kept matrix is complete"))
                    .collect()
            })
            .collect();
        let kmeans = cluster::kmeans(
            &Matrix::from_rows(&rows),
            analysis.kmeans_k,
            analysis.kmeans_seed,
            analysis.kmeans_restarts,
            analysis.kmeans_max_iter,
        )?;
        write_assignment_csv(&dir.join("kmeans.csv"), &ids, &kmeans.assignment.labels)?;
        write_json(
            &dir.join("kmeans.json"),
            &KMeansDoc {
                k: analysis.kmeans_k,
                seed: analysis.kmeans_seed,
                restarts: analysis.kmeans_restarts,
                max_iter: analysis.kmeans_max_iter,
                wcss: kmeans.wcss,
                chosen_run: kmeans.chosen_run,
            },
        )?;
        Ok(())
    }

    // ----- report ---------------------------------------------------

    fn stage_report(&self, dir: &Path) -> Result<(), PipelineError> {
        let ingest: IngestDoc = read_json(&self.out.join("corpus").join("ingest.json"))?;
        let measures: MeasuresDoc =
            read_json(&self.out.join("measures").join("measures.json"))?;
        let details: CorrelationDetails =
            read_json(&self.out.join("correlation").join("details.json"))?;
        let factor: FactorDoc = read_json(&self.out.join("factor").join("model.json"))?;
        let mean_rows = correlation::read_mean_correlation(
            &self.out.join("correlation").join("mean_correlation.csv"),
        )?;

        let summary = render_summary(&mean_rows, &details);
        std::fs::write(dir.join("summary.txt"), &summary)?;

        let mut warnings = Vec::new();
        if ingest.dropped_citation_tuples > 0 {
            warnings.push(format!(
                "ingest: dropped {} citation tuples referencing unknown journals",
                ingest.dropped_citation_tuples
            ));
        }
        if ingest.dropped_usage_requests > 0 {
            warnings.push(format!(
                "ingest: dropped {} usage requests referencing unknown articles",
                ingest.dropped_usage_requests
            ));
        }
        for w in &measures.warnings {
            warnings.push(format!("measures: measure {}: {}", w.measure_id, w.message));
        }
        if !factor.rotation.converged {
            warnings.push("factor: varimax rotation did not converge".to_string());
        }

        let mut files: Vec<FileDigest> = dir_digests(&self.out)?
            .into_iter()
            .filter(|(path, _)| path != "manifest.json" && path != "summary.txt")
            .map(|(path, sha256)| FileDigest { path, sha256 })
            .collect();
        files.push(FileDigest {
            path: "summary.txt".to_string(),
            sha256: sha256_hex(summary.as_bytes()),
        });
        files.sort_by(|a, b| a.path.cmp(&b.path));
        let mut digest_material = String::new();
        for file in &files {
            digest_material.push_str(&format!("{}\x00{}\n", file.path, file.sha256));
        }
        // The echoed parameters describe the analysis, not the bundle's
        // location; normalizing out_dir keeps bundles relocatable and
        // byte-comparable.
        let mut parameters = self.config.clone();
        parameters.out_dir = PathBuf::from(".");
        let manifest = Manifest {
            tool: ToolInfo {
                name: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            parameters,
            census_year: ingest.census_year,
            conventions: vec![
                "pair significance is a two-sided t test on each pair's shared journal \
                 count, not on the measure count"
                    .to_string(),
                "varimax uses Kaiser row normalization; rotated columns are ordered by \
                 explained sum of squares with the largest-magnitude loading positive"
                    .to_string(),
                "weighted geodesic lengths default to 1/weight (strong ties are short)"
                    .to_string(),
            ],
            warnings,
            removed_measures: details.removed.clone(),
            files,
            bundle_digest: sha256_hex(digest_material.as_bytes()),
        };
        write_json(&dir.join("manifest.json"), &manifest)?;
        Ok(())
    }
}

struct LoadedCorpus {
    ingest: IngestDoc,
    registry: impactmap_core::corpus::JournalRegistry,
    tuples: Vec<impactmap_core::corpus::CitationTuple>,
    articles: impactmap_core::corpus::ArticleMap,
    usage: Option<Vec<impactmap_core::corpus::UsageRequest>>,
}

fn closure(stage: Stage, acc: &mut BTreeSet<Stage>) {
    if acc.insert(stage) {
        for dep in stage.deps() {
            closure(*dep, acc);
        }
    }
}

fn join_years(years: &BTreeSet<i32>) -> String {
    years
        .iter()
        .map(i32::to_string)
        .collect::<Vec<_>>()
        .join("+")
}

fn summarize(net: &SparseNetwork) -> Result<NetworkSummary, PipelineError> {
    Ok(NetworkSummary {
        nodes: net.node_count(),
        edges: net.edge_count(),
        density: net.density()?,
    })
}

fn ground_truth_doc(truth: &synth::GroundTruth) -> serde_json::Value {
    serde_json::json!({
        "census_year": truth.census_year,
        "field_of": truth.field_of,
        "citation_attractiveness": truth.citation_attractiveness,
        "usage_attractiveness": truth.usage_attractiveness,
    })
}

fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Matrix {
    Matrix::from_rows(rows)
}

fn factor_doc(model: &FactorModel) -> FactorDoc {
    let rotation = model.rotation.as_ref().expect("model is rotated");
    FactorDoc {
        measure_ids: model.descriptors.iter().map(|d| d.id).collect(),
        eigenvalues: model.eigenvalues.clone(),
        variance_proportion: model.variance_proportion.clone(),
        cumulative_proportion: model.cumulative_proportion.clone(),
        eigenvectors: matrix_to_rows(&model.eigenvectors),
        loadings: matrix_to_rows(&model.loadings),
        rotation: RotationDoc {
            k: rotation.k,
            rotated_loadings: matrix_to_rows(&rotation.rotated_loadings),
            rotation_matrix: matrix_to_rows(&rotation.rotation_matrix),
            converged: rotation.converged,
            sweeps: rotation.sweeps,
        },
    }
}

fn model_from_doc(doc: &FactorDoc) -> Result<FactorModel, PipelineError> {
    let by_id: BTreeMap<u8, MeasureDescriptor> =
        catalogue().into_iter().map(|d| (d.id, d)).collect();
    let descriptors = doc
        .measure_ids
        .iter()
        .map(|id| {
            by_id
                .get(id)
                .cloned()
                .ok_or_else(|| PipelineError::Runtime(format!("unknown measure id {id}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FactorModel {
        descriptors,
        eigenvalues: doc.eigenvalues.clone(),
        variance_proportion: doc.variance_proportion.clone(),
        cumulative_proportion: doc.cumulative_proportion.clone(),
        eigenvectors: rows_to_matrix(&doc.eigenvectors),
        loadings: rows_to_matrix(&doc.loadings),
        rotation: Some(VarimaxRotation {
            k: doc.rotation.k,
            rotated_loadings: rows_to_matrix(&doc.rotation.rotated_loadings),
            rotation_matrix: rows_to_matrix(&doc.rotation.rotation_matrix),
            converged: doc.rotation.converged,
            sweeps: doc.rotation.sweeps,
        }),
    })
}

fn write_assignment_csv(
    path: &Path,
    measure_ids: &[u8],
    labels: &[u32],
) -> Result<(), PipelineError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["measure_id", "cluster"])?;
    for (id, label) in measure_ids.iter().zip(labels) {
        writer.write_record([id.to_string().as_str(), label.to_string().as_str()])?;
    }
    writer.flush()?;
    Ok(())
}

fn render_summary(
    rows: &[correlation::MeanCorrelationRow],
    details: &CorrelationDetails,
) -> String {
    let mut sorted: Vec<&correlation::MeanCorrelationRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        let fa: f64 = a
            .rho_bar
            .as_deref()
            .and_then(|s| s.parse().ok())
            .unwrap_or(f64::NEG_INFINITY);
        let fb: f64 = b
            .rho_bar
            .as_deref()
            .and_then(|s| s.parse().ok())
            .unwrap_or(f64::NEG_INFINITY);
        fb.total_cmp(&fa).then(a.id.cmp(&b.id))
    });

    let mut out = String::new();
    out.push_str("Mean rank-order correlation of each measure to all others\n");
    out.push_str("==========================================================\n");
    out.push_str(" rank   id  measure                        source    rho_bar\n");
    for (position, row) in sorted.iter().enumerate() {
        let marker = if row.kept { " " } else { "*" };
        out.push_str(&format!(
            "{:5}  {:3}  {:<29}{}{:<9} {}\n",
            position + 1,
            row.id,
            row.name,
            marker,
            row.source,
            row.rho_bar.as_deref().unwrap_or("undefined"),
        ));
    }
    out.push('\n');
    if details.removed.is_empty() {
        out.push_str("No measures were removed by the significance filter.\n");
    } else {
        let removed: Vec<String> = details
            .removed
            .iter()
            .map(|r| format!("{} ({})", r.id, r.name))
            .collect();
        out.push_str(&format!(
            "Removed by the significance filter (alpha {}): {}\n",
            details.alpha,
            removed.join(", ")
        ));
        out.push_str("Starred rows were excluded from the factor and cluster analyses.\n");
    }
    out
}
