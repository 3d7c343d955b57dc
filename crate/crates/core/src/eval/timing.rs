use std::time::Duration;

use super::EvalError;
use crate::encoders::{encode, EncodeOptions};
use crate::nn::{predict, CnnModel};
use crate::signal::Segment;

/// Summary of a set of durations, in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimingStats {
    pub mean_ns: f64,
    pub median_ns: f64,
    /// Nearest-rank 95th percentile.
    pub p95_ns: f64,
}

impl TimingStats {
    pub fn from_nanos(values: &[u128]) -> Self {
        if values.is_empty() {
            return TimingStats::default();
        }
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        let mean_ns = sorted.iter().sum::<u128>() as f64 / n as f64;
        let median_ns = if n % 2 == 1 {
            sorted[n / 2] as f64
        } else {
            (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
        };
        let rank = (0.95 * n as f64).ceil() as usize;
        TimingStats {
            mean_ns,
            median_ns,
            p95_ns: sorted[rank.clamp(1, n) - 1] as f64,
        }
    }

    pub fn mean_ms(&self) -> f64 {
        self.mean_ns / 1e6
    }

    pub fn median_ms(&self) -> f64 {
        self.median_ns / 1e6
    }

    pub fn p95_ms(&self) -> f64 {
        self.p95_ns / 1e6
    }
}

/// Per-sample encode and inference latencies; `total` is their per-sample sum.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimingReport {
    pub samples: usize,
    pub encode: TimingStats,
    pub inference: TimingStats,
    pub total: TimingStats,
}

impl TimingReport {
    /// `encode[i]` and `inference[i]` must belong to the same sample.
    pub fn from_pairs(encode: &[Duration], inference: &[Duration]) -> Result<Self, EvalError> {
        if encode.len() != inference.len() {
            return Err(EvalError::Length {
                preds: inference.len(),
                labels: encode.len(),
            });
        }
        let e: Vec<u128> = encode.iter().map(Duration::as_nanos).collect();
        let i: Vec<u128> = inference.iter().map(Duration::as_nanos).collect();
        let t: Vec<u128> = e.iter().zip(&i).map(|(a, b)| a + b).collect();
        Ok(TimingReport {
            samples: e.len(),
            encode: TimingStats::from_nanos(&e),
            inference: TimingStats::from_nanos(&i),
            total: TimingStats::from_nanos(&t),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub repetitions: usize,
    /// Leading repetitions run but left out of the statistics.
    pub warmup: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            repetitions: 100,
            warmup: 10,
        }
    }
}

/// Single-image latency: encode `segment` and classify it, repeatedly, on the
/// calling thread.
pub fn bench_single(
    model: &CnnModel<f32>,
    segment: &Segment,
    opts: &EncodeOptions,
    config: &BenchConfig,
) -> Result<TimingReport, EvalError> {
    let side = opts.output_side();
    let got = [opts.method.channels(), side, side];
    if got != model.input_shape {
        return Err(EvalError::Shape {
            expected: model.input_shape,
            got,
        });
    }
    if config.repetitions == 0 {
        return Err(EvalError::Config("repetitions must be positive".into()));
    }
    let mut encode_times = Vec::with_capacity(config.repetitions);
    let mut infer_times = Vec::with_capacity(config.repetitions);
    for rep in 0..config.warmup + config.repetitions {
        let image = encode(segment, opts).map_err(|e| EvalError::stage("encode", e))?;
        let prediction = predict(model, &image).map_err(|e| EvalError::stage("predict", e))?;
        if rep >= config.warmup {
            encode_times.push(image.encode_time);
            infer_times.push(prediction.inference_time);
        }
    }
    TimingReport::from_pairs(&encode_times, &infer_times)
}
