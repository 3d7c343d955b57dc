use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::AdamState;
use super::layers::{cross_entropy, softmax, softmax_cross_entropy_grad};
use super::model::CnnModel;
use super::tensor::Tensor;
use super::NnError;
use crate::encoders::EncodedImage;

/// One labelled network input.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: Tensor<f32>,
    /// Zero-based class index.
    pub label: usize,
}

/// Converts an encoded image to a `[C, side, side]` network input.
pub fn image_tensor(image: &EncodedImage) -> Result<Tensor<f32>, NnError> {
    Tensor::new(vec![image.channels, image.side, image.side], image.to_f32())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Seeds the per-epoch shuffle.
    pub seed: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 150,
            batch_size: 64,
            seed: 0,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    /// Fraction of training samples classified correctly during the epoch.
    pub accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: CnnModel<f32>,
    pub log: Vec<EpochStats>,
    pub train_time: Duration,
}

/// Mini-batch Adam training, single-threaded and deterministic for a given
/// seed. Gradients are averaged over each batch.
pub fn train(mut model: CnnModel<f32>, samples: &[Sample], config: &TrainConfig) -> Result<TrainOutcome, NnError> {
    let start = Instant::now();
    if config.epochs == 0 {
        return Ok(TrainOutcome {
            model,
            log: Vec::new(),
            train_time: start.elapsed(),
        });
    }
    if samples.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    if config.batch_size == 0 {
        return Err(NnError::Optimizer("batch size must be positive".into()));
    }
    for s in samples {
        if s.image.dims() != model.input_shape {
            return Err(NnError::InputShape {
                expected: model.input_shape.to_vec(),
                got: s.image.dims().to_vec(),
            });
        }
        if s.label >= model.num_classes {
            return Err(NnError::Label {
                label: s.label,
                classes: model.num_classes,
            });
        }
    }

    let mut adam = AdamState::new(config.lr, config.beta1, config.beta2, config.eps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(config.batch_size) {
            let mut acc: Vec<Tensor<f32>> = model.params().map(|p| Tensor::zeros(p.dims())).collect();
            for &idx in batch {
                let sample = &samples[idx];
                let cache = model.forward_cached(&sample.image)?;
                let probs = softmax(cache.logits())?;
                loss_sum += f64::from(cross_entropy(&probs, sample.label)?);
                if argmax(probs.data()) == sample.label {
                    correct += 1;
                }
                let grad = softmax_cross_entropy_grad(&probs, sample.label)?;
                let (_, grads) = model.backward(&cache, &grad)?;
                for (a, g) in acc.iter_mut().zip(grads.iter().flatten()) {
                    a.add_assign(g);
                }
            }
            let scale = 1.0 / batch.len() as f32;
            acc.iter_mut().for_each(|g| g.scale(scale));
            adam.step(model.params_mut(), &acc)?;
        }
        let stats = EpochStats {
            epoch: epoch + 1,
            mean_loss: loss_sum / samples.len() as f64,
            accuracy: correct as f64 / samples.len() as f64,
        };
        log::debug!(
            "epoch {:>3}: loss {:.4}, train accuracy {:.4}",
            stats.epoch,
            stats.mean_loss,
            stats.accuracy
        );
        log.push(stats);
    }

    Ok(TrainOutcome {
        model,
        log,
        train_time: start.elapsed(),
    })
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub probabilities: Vec<f32>,
    /// Forward pass plus softmax, measured on a monotonic clock.
    pub inference_time: Duration,
}

/// Classifies one encoded image.
pub fn predict(model: &CnnModel<f32>, image: &EncodedImage) -> Result<Prediction, NnError> {
    let expected = model.input_shape;
    if [image.channels, image.side, image.side] != expected {
        return Err(NnError::InputShape {
            expected: expected.to_vec(),
            got: vec![image.channels, image.side, image.side],
        });
    }
    predict_tensor(model, &image_tensor(image)?)
}

pub fn predict_tensor(model: &CnnModel<f32>, input: &Tensor<f32>) -> Result<Prediction, NnError> {
    let start = Instant::now();
    let logits = model.forward(input)?;
    let probs = softmax(&logits)?;
    let inference_time = start.elapsed();
    Ok(Prediction {
        class: argmax(probs.data()),
        probabilities: probs.into_data(),
        inference_time,
    })
}

/// Predicted class for every sample, via the same forward path used in training.
pub fn classify_all(model: &CnnModel<f32>, samples: &[Sample]) -> Result<Vec<usize>, NnError> {
    samples
        .iter()
        .map(|s| {
            let cache = model.forward_cached(&s.image)?;
            Ok(argmax(softmax(cache.logits())?.data()))
        })
        .collect()
}
