//! Data files, fault labels and dataset assembly.

mod dataset;
mod labels;
mod manifest;
mod mat;
mod text;

pub use dataset::{assemble_dataset, assemble_dataset_with, DatasetConfig, DatasetSplit, RpmSubset};
pub use labels::{label_for, FaultLabel, Scheme};
pub use manifest::{load_manifest_records, parse_manifest, read_record_file, write_manifest, ManifestEntry};
pub use mat::{drive_end_channel, read_mat, MatVariable};
pub use text::{read_csv, read_raw_f64le, write_raw_f64le};

use crate::signal::SignalError;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("unsupported container: {0}")]
    UnsupportedContainer(String),
    #[error("corrupt file: {0}")]
    Corrupt(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("raw stream length {0} is not a multiple of 8 bytes")]
    RawLength(usize),
    #[error("no drive-end channel (*_DE_time) in {0}")]
    NoDriveEnd(String),
    #[error("unknown fault diameter {0} (valid: 0.007, 0.014, 0.021)")]
    UnknownDiameter(f64),
    #[error("insufficient segments for class {class} at {rpm} rpm: need {needed}, have {available}")]
    Insufficient {
        class: u8,
        rpm: u32,
        needed: usize,
        available: usize,
    },
    #[error("invalid dataset configuration: {0}")]
    Config(String),
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Signal(#[from] SignalError),
}
