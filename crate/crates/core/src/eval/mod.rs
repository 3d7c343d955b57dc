//! Confusion matrices, derived metrics, experiments and latency benchmarks.

mod confusion;
mod experiment;
mod report;
mod timing;

pub use confusion::{confusion_from, metrics_from, ClassMetrics, ConfusionMatrix, Metrics};
pub use experiment::{
    build_split, evaluate_model, evaluate_saved, run_experiment, select_rpm, ExperimentConfig, ExperimentOutcome,
};
pub use report::{confusion_csv, timing_csv_row, EvalReport, TIMING_CSV_HEADER};
pub use timing::{bench_single, BenchConfig, TimingReport, TimingStats};

use crate::encoders::EncodeError;
use crate::ingest::IngestError;
use crate::nn::NnError;

/// Failure inside one pipeline stage.
#[derive(Debug, thiserror::Error)]
pub enum StageError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("length mismatch: {preds} predictions for {labels} labels")]
    Length { preds: usize, labels: usize },
    #[error("class id {id} out of range for {n} classes")]
    ClassOutOfRange { id: usize, n: usize },
    #[error("no evaluated samples")]
    Empty,
    #[error("model expects input {expected:?}, encoding produces {got:?}")]
    Shape { expected: [usize; 3], got: [usize; 3] },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: StageError,
    },
}

impl EvalError {
    pub fn stage(stage: &'static str, source: impl Into<StageError>) -> Self {
        EvalError::Stage {
            stage,
            source: source.into(),
        }
    }

    /// True when the root cause is a filesystem error.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            EvalError::Stage {
                source: StageError::Ingest(IngestError::Io { .. }) | StageError::Nn(NnError::Io { .. }),
                ..
            }
        )
    }
}
