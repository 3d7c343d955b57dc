//! Time-series to image encodings.
//!
//! Each encoder takes a [`Segment`], selects a window of it, and produces a
//! square image. Arithmetic is done in `f64`; conversion to `f32` happens when
//! an image is handed to the network.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::signal::Segment;

mod export;
mod gaf;
mod mtf;
mod pixel;
mod recurrence;
mod rqa;

pub use export::{dequantize, quantize, read_vimg, write_pgm, write_vimg, ExportError};
pub use gaf::{encode_gasf, gasf_field};
pub use mtf::{encode_mtf, encode_mtf_pooled, quantile_states, transition_matrix};
pub use pixel::encode_pixel_strength;
pub use recurrence::encode_recurrence;
pub use rqa::{rqa_from_binary, rqa_summary, RqaSummary};

/// Default number of MTF quantile bins.
pub const DEFAULT_MTF_BINS: usize = 8;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EncodeError {
    #[error("segment too short: {method} with side {side} needs {needed} samples, got {got}")]
    TooShort {
        method: Method,
        side: usize,
        needed: usize,
        got: usize,
    },
    #[error("image side must be positive")]
    ZeroSide,
    #[error("MTF needs at least 2 bins, got {0}")]
    Bins(usize),
    #[error("fuzzy kernel width {kernel} invalid for side {side}")]
    Kernel { kernel: usize, side: usize },
    #[error("expected a {expected} image, got {got}")]
    WrongMethod { expected: Method, got: Method },
    #[error("invalid RQA parameters: {0}")]
    Rqa(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    PixelStrength,
    Gasf,
    Mtf,
    Recurrence,
    GafMtf,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::PixelStrength,
        Method::Gasf,
        Method::Mtf,
        Method::Recurrence,
        Method::GafMtf,
    ];

    /// Short name used on the command line and in reports.
    pub fn key(self) -> &'static str {
        match self {
            Method::PixelStrength => "pixel",
            Method::Gasf => "gasf",
            Method::Mtf => "mtf",
            Method::Recurrence => "rp",
            Method::GafMtf => "gafmtf",
        }
    }

    pub fn channels(self) -> usize {
        match self {
            Method::GafMtf => 2,
            _ => 1,
        }
    }

    /// Image side used by default: 31 for pixel strength, 256 otherwise.
    pub fn default_side(self) -> usize {
        match self {
            Method::PixelStrength => 31,
            _ => 256,
        }
    }

    /// Range of pixel values the encoder produces, used to quantize exports.
    pub fn value_range(self) -> (f64, f64) {
        match self {
            Method::Gasf => (-1.0, 1.0),
            _ => (0.0, 1.0),
        }
    }

    /// Samples consumed for a given image side.
    pub fn samples_needed(self, side: usize) -> usize {
        match self {
            Method::PixelStrength => side * side,
            _ => side,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.key() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                let valid: Vec<_> = Method::ALL.iter().map(|m| m.key()).collect();
                format!("unknown method '{s}' (valid: {})", valid.join(", "))
            })
    }
}

/// How the encoder window is taken from a longer segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowSelect {
    /// The first `n` samples.
    #[default]
    Prefix,
    /// `n` samples spread uniformly over the whole segment, `x[floor(i * L / n)]`.
    Decimate,
}

impl FromStr for WindowSelect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "prefix" => Ok(WindowSelect::Prefix),
            "decimate" => Ok(WindowSelect::Decimate),
            other => Err(format!("unknown window selection '{other}' (valid: prefix, decimate)")),
        }
    }
}

/// A `channels x side x side` image, channel-major then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedImage {
    pub channels: usize,
    pub side: usize,
    pub data: Vec<f64>,
    pub method: Method,
    pub encode_time: Duration,
}

impl EncodedImage {
    pub fn at(&self, channel: usize, row: usize, col: usize) -> f64 {
        self.data[(channel * self.side + row) * self.side + col]
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let plane = self.side * self.side;
        &self.data[c * plane..(c + 1) * plane]
    }

    pub fn to_f32(&self) -> Vec<f32> {
        self.data.iter().map(|&v| v as f32).collect()
    }
}

/// Full encoder configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodeOptions {
    pub method: Method,
    pub side: usize,
    pub bins: usize,
    pub window: WindowSelect,
    /// MTF mean-pooling width; 1 disables pooling.
    pub fuzzy_kernel: usize,
}

impl EncodeOptions {
    pub fn new(method: Method) -> Self {
        EncodeOptions {
            method,
            side: method.default_side(),
            bins: DEFAULT_MTF_BINS,
            window: WindowSelect::Prefix,
            fuzzy_kernel: 1,
        }
    }

    pub fn with_side(mut self, side: usize) -> Self {
        self.side = side;
        self
    }

    /// Side of the produced image (smaller than `side` when MTF pooling is on).
    pub fn output_side(&self) -> usize {
        match self.method {
            Method::Mtf | Method::GafMtf if self.fuzzy_kernel > 1 => self.side / self.fuzzy_kernel,
            _ => self.side,
        }
    }
}

/// Encodes `segment` with the configured method.
pub fn encode(segment: &Segment, opts: &EncodeOptions) -> Result<EncodedImage, EncodeError> {
    let start = Instant::now();
    let needed = opts.method.samples_needed(opts.side);
    let window = select_window(&segment.samples, needed, opts.window, opts.method, opts.side)?;
    let window = Segment {
        samples: window,
        source: segment.source.clone(),
        index: segment.index,
    };
    let mut image = match opts.method {
        Method::PixelStrength => encode_pixel_strength(&window, opts.side),
        Method::Gasf => encode_gasf(&window, opts.side),
        Method::Mtf => encode_mtf_pooled(&window, opts.side, opts.bins, opts.fuzzy_kernel),
        Method::Recurrence => encode_recurrence(&window, opts.side),
        Method::GafMtf => encode_gaf_mtf_pooled(&window, opts.side, opts.bins, opts.fuzzy_kernel),
    }?;
    image.encode_time = start.elapsed();
    Ok(image)
}

/// Dual-channel image: GASF in channel 0, MTF in channel 1.
pub fn encode_gaf_mtf(segment: &Segment, side: usize, bins: usize) -> Result<EncodedImage, EncodeError> {
    encode_gaf_mtf_pooled(segment, side, bins, 1)
}

fn encode_gaf_mtf_pooled(
    segment: &Segment,
    side: usize,
    bins: usize,
    kernel: usize,
) -> Result<EncodedImage, EncodeError> {
    let start = Instant::now();
    check_len(segment, Method::GafMtf, side, side)?;
    let gasf = encode_gasf(segment, side)?;
    let mtf = encode_mtf_pooled(segment, side, bins, kernel)?;
    let gasf = if kernel > 1 {
        mean_pool(&gasf.data, side, kernel)
    } else {
        gasf.data
    };
    let mut data = gasf;
    data.extend_from_slice(&mtf.data);
    Ok(EncodedImage {
        channels: 2,
        side: mtf.side,
        data,
        method: Method::GafMtf,
        encode_time: start.elapsed(),
    })
}

pub(crate) fn check_len(segment: &Segment, method: Method, side: usize, needed: usize) -> Result<(), EncodeError> {
    if side == 0 {
        return Err(EncodeError::ZeroSide);
    }
    if segment.samples.len() < needed {
        return Err(EncodeError::TooShort {
            method,
            side,
            needed,
            got: segment.samples.len(),
        });
    }
    Ok(())
}

fn select_window(
    samples: &[f64],
    n: usize,
    how: WindowSelect,
    method: Method,
    side: usize,
) -> Result<Vec<f64>, EncodeError> {
    if side == 0 {
        return Err(EncodeError::ZeroSide);
    }
    if samples.len() < n {
        return Err(EncodeError::TooShort {
            method,
            side,
            needed: n,
            got: samples.len(),
        });
    }
    Ok(match how {
        WindowSelect::Prefix => samples[..n].to_vec(),
        WindowSelect::Decimate => (0..n).map(|i| samples[i * samples.len() / n]).collect(),
    })
}

/// Non-overlapping `k x k` mean pooling; trailing rows/columns that do not
/// fill a full block are dropped.
pub(crate) fn mean_pool(data: &[f64], side: usize, k: usize) -> Vec<f64> {
    let out = side / k;
    let norm = (k * k) as f64;
    let mut pooled = vec![0.0; out * out];
    for (r, row) in pooled.chunks_exact_mut(out).enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..k {
                let base = (r * k + i) * side + c * k;
                acc += data[base..base + k].iter().sum::<f64>();
            }
            *cell = acc / norm;
        }
    }
    pooled
}
