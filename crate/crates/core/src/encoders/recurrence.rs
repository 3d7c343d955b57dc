use std::time::Instant;

use super::{check_len, EncodeError, EncodedImage, Method};
use crate::signal::Segment;

/// Unthresholded recurrence plot `|x_i - x_j|` of the first `side` samples,
/// divided by its maximum (all zeros when the window is constant).
pub fn encode_recurrence(segment: &Segment, side: usize) -> Result<EncodedImage, EncodeError> {
    let start = Instant::now();
    check_len(segment, Method::Recurrence, side, side)?;
    let x = &segment.samples[..side];
    let mut data = distance_matrix(x);
    let max = data.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        data.iter_mut().for_each(|v| *v /= max);
    }
    Ok(EncodedImage {
        channels: 1,
        side,
        data,
        method: Method::Recurrence,
        encode_time: start.elapsed(),
    })
}

pub(crate) fn distance_matrix(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = (x[i] - x[j]).abs();
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_distances() {
        assert_eq!(
            distance_matrix(&[0.0, 1.0, 0.0]),
            vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]
        );
    }

    #[test]
    fn scaled_by_max() {
        let img = encode_recurrence(&Segment::from_samples(vec![0.0, 2.0, 4.0]), 3).unwrap();
        assert_eq!(img.data, vec![0.0, 0.5, 1.0, 0.5, 0.0, 0.5, 1.0, 0.5, 0.0]);
    }

    #[test]
    fn constant_is_zero() {
        let img = encode_recurrence(&Segment::from_samples(vec![3.0; 4]), 4).unwrap();
        assert!(img.data.iter().all(|&v| v == 0.0));
    }
}
