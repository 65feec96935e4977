//! `impactmap` command line: run the full pipeline or any prefix of it.
//!
//! Exit codes: 0 success, 1 validation error (config or input data),
//! 2 runtime failure, 3 non-convergence when `strict_convergence` is on.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use impactmap::config::RunConfig;
use impactmap::error::PipelineError;
use impactmap::pipeline::{Pipeline, Stage};

#[derive(Parser)]
#[command(
    name = "impactmap",
    version,
    about = "Journal impact measures from citation and usage data: rankings, correlation structure, measure map, clusters"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, default_value = "impactmap.json")]
    config: PathBuf,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override: replaces the synth seed and the k-means seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for cached stage outputs, reused when input digests
    /// match.
    #[arg(long, global = true)]
    stage_cache: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic corpus files (requires a `synth` config).
    Synth,
    /// Parse, validate, and canonicalize the input corpus.
    Ingest,
    /// Build the citation and usage networks.
    BuildNet,
    /// Evaluate the full measure battery.
    Measures,
    /// Compute the measure correlation matrix and significance filter.
    Correlate,
    /// Eigendecompose the kept correlation matrix and rotate.
    Pca,
    /// Project measures onto the first two rotated components.
    Map,
    /// Hierarchical and k-means clusterings of the kept matrix.
    Cluster,
    /// Run every stage and write the report bundle.
    Run,
}

impl Command {
    fn target(&self) -> Stage {
        match self {
            Self::Synth | Self::Ingest => Stage::Ingest,
            Self::BuildNet => Stage::Networks,
            Self::Measures => Stage::Measures,
            Self::Correlate => Stage::Correlate,
            Self::Pca => Stage::Factor,
            Self::Map => Stage::Map,
            Self::Cluster => Stage::Clusters,
            Self::Run => Stage::Report,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    let mut config = RunConfig::load(&cli.config)?;
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        if let Some(synth) = &mut config.synth {
            synth.seed = seed;
        }
        config.analysis.kmeans_seed = seed;
    }
    if matches!(cli.command, Command::Synth) && config.synth.is_none() {
        return Err(PipelineError::Validation(
            "synth subcommand requires a synth section in the config".into(),
        ));
    }
    let pipeline = Pipeline::new(config, cli.stage_cache.clone())?;
    pipeline.run(cli.command.target())?;
    eprintln!("done: {}", pipeline.out_dir().display());
    Ok(())
}
