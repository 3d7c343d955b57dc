use std::fmt::Write as _;
use std::time::Duration;

use super::confusion::{metrics_from, ConfusionMatrix, Metrics};
use super::experiment::ExperimentConfig;
use super::timing::{TimingReport, TimingStats};
use super::EvalError;
use crate::encoders::Method;
use crate::ingest::{RpmSubset, Scheme};

/// Result of scoring one model on one test split.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: Method,
    pub side: usize,
    pub scheme: Scheme,
    pub rpm: RpmSubset,
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub train_samples: usize,
    pub test_samples: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub timing: TimingReport,
    pub train_time: Duration,
}

impl EvalReport {
    pub fn new(
        config: &ExperimentConfig,
        confusion: ConfusionMatrix,
        timing: TimingReport,
        train_samples: usize,
        train_time: Duration,
    ) -> Result<Self, EvalError> {
        let metrics = metrics_from(&confusion)?;
        Ok(EvalReport {
            method: config.encode.method,
            side: config.encode.output_side(),
            scheme: config.scheme,
            rpm: config.rpm,
            seed: config.seed,
            epochs: config.epochs,
            batch_size: config.batch_size,
            train_samples,
            test_samples: confusion.total() as usize,
            confusion,
            metrics,
            timing,
            train_time,
        })
    }

    pub fn accuracy(&self) -> f64 {
        self.metrics.accuracy
    }

    /// Plain `key=value` lines. Class ids are one-based, as in the label tables.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("method", self.method.key().into());
        kv("side", self.side.to_string());
        kv("scheme", self.scheme.key().into());
        kv("rpm", self.rpm.to_string());
        kv("seed", self.seed.to_string());
        kv("epochs", self.epochs.to_string());
        kv("batch_size", self.batch_size.to_string());
        kv("train_samples", self.train_samples.to_string());
        kv("test_samples", self.test_samples.to_string());
        kv("accuracy", format!("{:.6}", self.metrics.accuracy));
        kv("macro_f1", format!("{:.6}", self.metrics.macro_f1));
        for (c, m) in self.metrics.per_class.iter().enumerate() {
            let id = c + 1;
            kv(&format!("class.{id}.precision"), format!("{:.6}", m.precision));
            kv(&format!("class.{id}.recall"), format!("{:.6}", m.recall));
            kv(&format!("class.{id}.f1"), format!("{:.6}", m.f1));
            let flags: Vec<&str> = [
                (m.precision_undefined, "precision"),
                (m.recall_undefined, "recall"),
                (m.f1_undefined, "f1"),
            ]
            .into_iter()
            .filter_map(|(set, name)| set.then_some(name))
            .collect();
            if !flags.is_empty() {
                kv(&format!("class.{id}.undefined"), flags.join(","));
            }
        }
        for (name, stats) in [
            ("encode", &self.timing.encode),
            ("infer", &self.timing.inference),
            ("total", &self.timing.total),
        ] {
            kv(&format!("{name}_mean_ms"), format!("{:.4}", stats.mean_ms()));
            kv(&format!("{name}_median_ms"), format!("{:.4}", stats.median_ms()));
            kv(&format!("{name}_p95_ms"), format!("{:.4}", stats.p95_ms()));
        }
        kv("train_seconds", format!("{:.3}", self.train_time.as_secs_f64()));
        s
    }
}

/// Confusion matrix as CSV; the corner cell reads `true\pred`.
pub fn confusion_csv(cm: &ConfusionMatrix) -> String {
    let n = cm.n_classes();
    let mut s = String::from("true\\pred");
    for p in 1..=n {
        let _ = write!(s, ",{p}");
    }
    s.push('\n');
    for (t, row) in cm.rows().enumerate().take(n) {
        let _ = write!(s, "{}", t + 1);
        for v in row {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

pub const TIMING_CSV_HEADER: &str = "method,encode_ms,infer_ms,total_ms";

/// One timing row with mean latencies in ms to two decimals, so that the
/// three columns add up.
pub fn timing_csv_row(method: Method, timing: &TimingReport) -> String {
    let ms = |s: &TimingStats| format!("{:.2}", s.mean_ms());
    format!(
        "{},{},{},{}",
        method.key(),
        ms(&timing.encode),
        ms(&timing.inference),
        ms(&timing.total)
    )
}
