use std::time::Instant;

use super::{check_len, EncodeError, EncodedImage, Method};
use crate::signal::{minmax_normalize, Segment};

/// Gramian angular summation field of the first `side` samples.
///
/// With `x` rescaled to `[-1, 1]` and `phi = arccos(x)`, entry `(i, j)` is
/// `cos(phi_i + phi_j) = x_i x_j - sqrt(1 - x_i²) sqrt(1 - x_j²)`.
pub fn encode_gasf(segment: &Segment, side: usize) -> Result<EncodedImage, EncodeError> {
    let start = Instant::now();
    check_len(segment, Method::Gasf, side, side)?;
    let x = minmax_normalize(&segment.samples[..side], -1.0, 1.0).expect("non-empty window");
    Ok(EncodedImage {
        channels: 1,
        side,
        data: gasf_field(&x),
        method: Method::Gasf,
        encode_time: start.elapsed(),
    })
}

/// Summation field of a series already in `[-1, 1]` (values outside are clamped).
pub fn gasf_field(x: &[f64]) -> Vec<f64> {
    let side = x.len();
    let x: Vec<f64> = x.iter().map(|v| v.clamp(-1.0, 1.0)).collect();
    let sines: Vec<f64> = x.iter().map(|&v| (1.0 - v * v).max(0.0).sqrt()).collect();
    let mut data = vec![0.0; side * side];
    for i in 0..side {
        let (xi, si) = (x[i], sines[i]);
        data[i * side + i] = (xi * xi - si * si).clamp(-1.0, 1.0);
        for j in i + 1..side {
            let v = (xi * x[j] - si * sines[j]).clamp(-1.0, 1.0);
            data[i * side + j] = v;
            data[j * side + i] = v;
        }
    }
    data
}
