use std::time::Instant;

use super::{check_len, mean_pool, EncodeError, EncodedImage, Method};
use crate::signal::Segment;

/// Assigns each value to one of `bins` quantile states.
///
/// Bin edges are the `k / bins` quantiles (`k = 1..bins`) of `x`, linearly
/// interpolated between order statistics. A value's state is the number of
/// edges strictly below it, so ties at an edge fall into the lower bin.
pub fn quantile_states(x: &[f64], bins: usize) -> Vec<usize> {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let last = sorted.len().saturating_sub(1) as f64;
    let edges: Vec<f64> = (1..bins)
        .map(|k| {
            let h = last * k as f64 / bins as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        })
        .collect();
    x.iter().map(|&v| edges.partition_point(|&e| e < v)).collect()
}

/// Row-stochastic first-order transition matrix over `bins` states,
/// flattened row-major. Rows without outgoing transitions are uniform.
pub fn transition_matrix(states: &[usize], bins: usize) -> Vec<f64> {
    let mut w = vec![0.0; bins * bins];
    for pair in states.windows(2) {
        w[pair[0] * bins + pair[1]] += 1.0;
    }
    for row in w.chunks_exact_mut(bins) {
        let total: f64 = row.iter().sum();
        if total == 0.0 {
            row.fill(1.0 / bins as f64);
        } else {
            row.iter_mut().for_each(|v| *v /= total);
        }
    }
    w
}

/// Markov transition field of the first `side` samples with `bins` quantile states.
pub fn encode_mtf(segment: &Segment, side: usize, bins: usize) -> Result<EncodedImage, EncodeError> {
    encode_mtf_pooled(segment, side, bins, 1)
}

/// MTF followed by non-overlapping `kernel x kernel` mean pooling.
pub fn encode_mtf_pooled(
    segment: &Segment,
    side: usize,
    bins: usize,
    kernel: usize,
) -> Result<EncodedImage, EncodeError> {
    let start = Instant::now();
    check_len(segment, Method::Mtf, side, side)?;
    if bins < 2 {
        return Err(EncodeError::Bins(bins));
    }
    if kernel == 0 || kernel > side {
        return Err(EncodeError::Kernel { kernel, side });
    }
    let states = quantile_states(&segment.samples[..side], bins);
    let w = transition_matrix(&states, bins);

    let mut data = Vec::with_capacity(side * side);
    for &a in &states {
        let row = &w[a * bins..(a + 1) * bins];
        data.extend(states.iter().map(|&b| row[b]));
    }
    let (data, side) = if kernel > 1 {
        (mean_pool(&data, side, kernel), side / kernel)
    } else {
        (data, side)
    };
    Ok(EncodedImage {
        channels: 1,
        side,
        data,
        method: Method::Mtf,
        encode_time: start.elapsed(),
    })
}
