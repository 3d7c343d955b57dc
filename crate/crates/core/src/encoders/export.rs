//! Image export: binary PGM for single-channel images and the `VIMG` raw
//! tensor format for any channel count.
//!
//! `VIMG` layout, all little-endian:
//!
//! | bytes | field |
//! |-------|-------|
//! | 4     | magic `b"VIMG"` |
//! | 4     | u32 version (1) |
//! | 4     | u32 channels |
//! | 4     | u32 side |
//! | 4·c·s² | f32 values, channel-major then row-major |

use std::io::{self, Write};

use super::{EncodedImage, Method};

pub const VIMG_MAGIC: &[u8; 4] = b"VIMG";
pub const VIMG_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("PGM export needs a single-channel image, got {0} channels")]
    Channels(usize),
    #[error("not a VIMG file")]
    Magic,
    #[error("unsupported VIMG version {0}")]
    Version(u32),
    #[error("truncated VIMG file: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Maps `v` in `[lo, hi]` to `0..=255`, rounding to nearest.
pub fn quantize(v: f64, lo: f64, hi: f64) -> u8 {
    let unit = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
    (unit * 255.0).round() as u8
}

pub fn dequantize(q: u8, lo: f64, hi: f64) -> f64 {
    lo + f64::from(q) / 255.0 * (hi - lo)
}

/// Writes a P5 PGM with maxval 255, quantizing over the method's value range.
pub fn write_pgm<W: Write>(image: &EncodedImage, mut out: W) -> Result<(), ExportError> {
    if image.channels != 1 {
        return Err(ExportError::Channels(image.channels));
    }
    let (lo, hi) = image.method.value_range();
    write!(out, "P5\n{} {}\n255\n", image.side, image.side)?;
    let pixels: Vec<u8> = image.data.iter().map(|&v| quantize(v, lo, hi)).collect();
    out.write_all(&pixels)?;
    Ok(())
}

pub fn write_vimg<W: Write>(image: &EncodedImage, mut out: W) -> Result<(), ExportError> {
    out.write_all(VIMG_MAGIC)?;
    out.write_all(&VIMG_VERSION.to_le_bytes())?;
    out.write_all(&(image.channels as u32).to_le_bytes())?;
    out.write_all(&(image.side as u32).to_le_bytes())?;
    let mut payload = Vec::with_capacity(image.data.len() * 4);
    for &v in &image.data {
        payload.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out.write_all(&payload)?;
    Ok(())
}

/// Parses a `VIMG` buffer into `(channels, side, values)`.
pub fn read_vimg(bytes: &[u8]) -> Result<(usize, usize, Vec<f32>), ExportError> {
    if bytes.len() < 16 {
        return Err(if bytes.len() >= 4 && &bytes[..4] != VIMG_MAGIC {
            ExportError::Magic
        } else {
            ExportError::Truncated {
                expected: 16,
                got: bytes.len(),
            }
        });
    }
    if &bytes[..4] != VIMG_MAGIC {
        return Err(ExportError::Magic);
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = word(4);
    if version != VIMG_VERSION {
        return Err(ExportError::Version(version));
    }
    let channels = word(8) as usize;
    let side = word(12) as usize;
    let expected = 16 + 4 * channels * side * side;
    if bytes.len() != expected {
        return Err(ExportError::Truncated {
            expected,
            got: bytes.len(),
        });
    }
    let values = bytes[16..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((channels, side, values))
}

impl EncodedImage {
    /// Quantized 8-bit pixels of one channel over the method's value range.
    pub fn quantized(&self, channel: usize) -> Vec<u8> {
        let (lo, hi) = match (self.method, channel) {
            (Method::GafMtf, 0) => (-1.0, 1.0),
            (Method::GafMtf, _) => (0.0, 1.0),
            (m, _) => m.value_range(),
        };
        self.channel(channel).iter().map(|&v| quantize(v, lo, hi)).collect()
    }
}
