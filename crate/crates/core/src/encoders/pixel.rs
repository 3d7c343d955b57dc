use std::time::Instant;

use super::{check_len, EncodeError, EncodedImage, Method};
use crate::signal::{minmax_normalize, Segment};

/// Reshapes the first `side²` samples, scaled to `[0, 1]`, into a row-major grid.
pub fn encode_pixel_strength(segment: &Segment, side: usize) -> Result<EncodedImage, EncodeError> {
    let start = Instant::now();
    let n = side * side;
    check_len(segment, Method::PixelStrength, side, n)?;
    let data = minmax_normalize(&segment.samples[..n], 0.0, 1.0).expect("non-empty window");
    Ok(EncodedImage {
        channels: 1,
        side,
        data,
        method: Method::PixelStrength,
        encode_time: start.elapsed(),
    })
}
