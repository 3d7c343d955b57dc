use std::time::Duration;

use super::confusion::{confusion_from, ConfusionMatrix};
use super::report::EvalReport;
use super::timing::TimingReport;
use super::EvalError;
use crate::encoders::{encode, EncodeOptions, Method};
use crate::ingest::{assemble_dataset_with, DatasetConfig, DatasetSplit, FaultLabel, RpmSubset, Scheme};
use crate::nn::{image_tensor, predict, train, ArchConfig, CnnModel, Sample, TrainConfig};
use crate::signal::{Segment, SignalRecord, DEFAULT_SEGMENT_LEN};

/// Everything that defines one cell of the accuracy tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub encode: EncodeOptions,
    pub scheme: Scheme,
    pub rpm: RpmSubset,
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub segments_per_class_per_rpm: usize,
    pub segment_len: usize,
    pub arch: ArchConfig,
}

impl ExperimentConfig {
    pub fn new(method: Method, scheme: Scheme) -> Self {
        let train = TrainConfig::default();
        ExperimentConfig {
            encode: EncodeOptions::new(method),
            scheme,
            rpm: RpmSubset::All,
            seed: 0,
            epochs: train.epochs,
            batch_size: train.batch_size,
            lr: train.lr,
            segments_per_class_per_rpm: 120,
            segment_len: DEFAULT_SEGMENT_LEN,
            arch: ArchConfig::default(),
        }
    }

    /// Network input shape produced by the encoding.
    pub fn input_shape(&self) -> [usize; 3] {
        let side = self.encode.output_side();
        [self.encode.method.channels(), side, side]
    }

    pub fn dataset_config(&self) -> DatasetConfig {
        DatasetConfig {
            scheme: self.scheme,
            segments_per_class_per_rpm: self.segments_per_class_per_rpm,
            segment_len: self.segment_len,
            seed: self.seed,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed.wrapping_add(2),
            lr: self.lr,
            ..TrainConfig::default()
        }
    }

    /// Seed for weight initialization, kept apart from the data and shuffle streams.
    pub fn init_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: EvalReport,
    pub model: CnnModel<f32>,
}

/// Keeps the records recorded at a speed in `rpm`.
pub fn select_rpm(records: &[SignalRecord], rpm: RpmSubset) -> Vec<SignalRecord> {
    records.iter().filter(|r| rpm.contains(r.meta.rpm)).cloned().collect()
}

/// Balanced split of the records matching the configured speed subset.
pub fn build_split(records: &[SignalRecord], config: &ExperimentConfig) -> Result<DatasetSplit, EvalError> {
    let selected = select_rpm(records, config.rpm);
    if selected.is_empty() {
        return Err(EvalError::Config(format!("no records at rpm {}", config.rpm)));
    }
    assemble_dataset_with(&selected, &config.dataset_config()).map_err(|e| EvalError::stage("dataset", e))
}

fn encode_samples(part: &[(Segment, FaultLabel)], opts: &EncodeOptions) -> Result<Vec<Sample>, EvalError> {
    part.iter()
        .map(|(segment, label)| {
            let image = encode(segment, opts).map_err(|e| EvalError::stage("encode", e))?;
            Ok(Sample {
                image: image_tensor(&image).map_err(|e| EvalError::stage("encode", e))?,
                label: label.index(),
            })
        })
        .collect()
}

/// Test-set confusion matrix plus per-sample encode and inference timings.
pub fn evaluate_model(
    model: &CnnModel<f32>,
    test: &[(Segment, FaultLabel)],
    opts: &EncodeOptions,
) -> Result<(ConfusionMatrix, TimingReport), EvalError> {
    let mut preds = Vec::with_capacity(test.len());
    let mut labels = Vec::with_capacity(test.len());
    let mut encode_times = Vec::with_capacity(test.len());
    let mut infer_times = Vec::with_capacity(test.len());
    for (segment, label) in test {
        let image = encode(segment, opts).map_err(|e| EvalError::stage("encode", e))?;
        let prediction = predict(model, &image).map_err(|e| EvalError::stage("predict", e))?;
        preds.push(prediction.class);
        labels.push(label.index());
        encode_times.push(image.encode_time);
        infer_times.push(prediction.inference_time);
    }
    let cm = confusion_from(&preds, &labels, model.num_classes)?;
    Ok((cm, TimingReport::from_pairs(&encode_times, &infer_times)?))
}

/// Assembles the split, encodes, trains the default network and scores it on
/// the held-out segments.
pub fn run_experiment(config: &ExperimentConfig, records: &[SignalRecord]) -> Result<ExperimentOutcome, EvalError> {
    let split = build_split(records, config)?;
    log::info!(
        "{} rpm={} scheme={}: {} train / {} test segments",
        config.encode.method,
        config.rpm,
        config.scheme,
        split.train.len(),
        split.test.len()
    );
    let train_samples = encode_samples(&split.train, &config.encode)?;
    let model = CnnModel::default_for(
        &config.arch,
        config.input_shape(),
        config.scheme.num_classes(),
        config.init_seed(),
    )
    .map_err(|e| EvalError::stage("build", e))?;
    let outcome = train(model, &train_samples, &config.train_config()).map_err(|e| EvalError::stage("train", e))?;
    if let Some(last) = outcome.log.last() {
        log::info!(
            "trained {} epochs in {:.1?}: loss {:.4}, train accuracy {:.4}",
            last.epoch,
            outcome.train_time,
            last.mean_loss,
            last.accuracy
        );
    }
    let (confusion, timing) = evaluate_model(&outcome.model, &split.test, &config.encode)?;
    let report = EvalReport::new(config, confusion, timing, train_samples.len(), outcome.train_time)?;
    Ok(ExperimentOutcome {
        report,
        model: outcome.model,
    })
}

/// Scores an existing model on the test part of a freshly assembled split.
pub fn evaluate_saved(
    model: &CnnModel<f32>,
    config: &ExperimentConfig,
    records: &[SignalRecord],
) -> Result<EvalReport, EvalError> {
    if model.input_shape != config.input_shape() {
        return Err(EvalError::Shape {
            expected: model.input_shape,
            got: config.input_shape(),
        });
    }
    if model.num_classes != config.scheme.num_classes() {
        return Err(EvalError::Config(format!(
            "model has {} outputs but scheme {} has {} classes",
            model.num_classes,
            config.scheme,
            config.scheme.num_classes()
        )));
    }
    let split = build_split(records, config)?;
    let (confusion, timing) = evaluate_model(model, &split.test, &config.encode)?;
    EvalReport::new(config, confusion, timing, split.train.len(), Duration::ZERO)
}
