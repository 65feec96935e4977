//! Pipeline error taxonomy mapped to process exit codes: validation
//! failures (bad config or malformed input) exit 1, runtime failures
//! exit 2, and non-convergence exits 3 when the run asks for it.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    NonConvergence(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Runtime(_) => 2,
            Self::NonConvergence(_) => 3,
        }
    }

    /// Prefixes the failing stage name, preserving the error class.
    pub fn in_stage(self, stage: &str) -> Self {
        match self {
            Self::Validation(msg) => Self::Validation(format!("stage {stage}: {msg}")),
            Self::Runtime(msg) => Self::Runtime(format!("stage {stage}: {msg}")),
            Self::NonConvergence(msg) => Self::NonConvergence(format!("stage {stage}: {msg}")),
        }
    }
}

impl From<std::io::Error> for PipelineError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(format!("io: {e}"))
    }
}

impl From<serde_json::Error> for PipelineError {
    fn from(e: serde_json::Error) -> Self {
        Self::Validation(format!("json: {e}"))
    }
}

impl From<csv::Error> for PipelineError {
    fn from(e: csv::Error) -> Self {
        Self::Validation(format!("csv: {e}"))
    }
}

impl From<impactmap_core::corpus::CorpusError> for PipelineError {
    fn from(e: impactmap_core::corpus::CorpusError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<impactmap_core::net::NetError> for PipelineError {
    fn from(e: impactmap_core::net::NetError) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<impactmap_core::centrality::CentralityError> for PipelineError {
    fn from(e: impactmap_core::centrality::CentralityError) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<impactmap_core::measures::MeasureError> for PipelineError {
    fn from(e: impactmap_core::measures::MeasureError) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<impactmap_core::stats::StatsError> for PipelineError {
    fn from(e: impactmap_core::stats::StatsError) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<impactmap_core::factor::FactorError> for PipelineError {
    fn from(e: impactmap_core::factor::FactorError) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<impactmap_core::cluster::ClusterError> for PipelineError {
    fn from(e: impactmap_core::cluster::ClusterError) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<impactmap_core::synth::SynthError> for PipelineError {
    fn from(e: impactmap_core::synth::SynthError) -> Self {
        Self::Validation(e.to_string())
    }
}
