//! A small dense-tensor CNN with hand-written backward passes.
//!
//! Layers, losses and the optimizer are generic over [`Scalar`] so the same
//! code runs in `f32` for training and in `f64` for gradient checking.

mod adam;
mod layers;
mod model;
mod serialize;
mod tensor;
mod train;

pub use adam::{adam_step, AdamState};
pub use layers::{
    conv2d_backward, conv2d_forward, cross_entropy, dense_backward, dense_forward, maxpool_backward, maxpool_forward,
    relu_backward, relu_forward, softmax, softmax_cross_entropy_grad, ParamGrads, PROB_FLOOR,
};
pub use model::{ArchConfig, CnnModel, ForwardCache, Layer, LayerGrads, LayerSpec};
pub use serialize::{decode_model, encode_model, load_model, save_model, VCNN_MAGIC, VCNN_VERSION};
pub use tensor::{Scalar, Tensor};
pub use train::{
    argmax, classify_all, image_tensor, predict, predict_tensor, train, EpochStats, Prediction, Sample, TrainConfig,
    TrainOutcome,
};

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("input shape {got:?} does not match model input {expected:?}")]
    InputShape { expected: Vec<usize>, got: Vec<usize> },
    #[error("label {label} out of range for {classes} classes")]
    Label { label: usize, classes: usize },
    #[error("invalid network: {0}")]
    Build(String),
    #[error("invalid optimizer settings: {0}")]
    Optimizer(String),
    #[error("empty training set")]
    EmptyDataset,
    #[error("corrupt model: {0}")]
    Corrupt(String),
    #[error("unsupported model file: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
