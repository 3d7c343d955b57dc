//! Structural properties every encoder must satisfy, as plain checkers so
//! both the proptest suite and the acceptance runner can drive them.

use faultcnn::encoders::{
    dequantize, encode, encode_gasf, encode_mtf, encode_pixel_strength, encode_recurrence, quantile_states, quantize,
    transition_matrix, EncodeOptions, Method,
};
use faultcnn::signal::{minmax_normalize, Segment};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

pub fn series(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 2..max_len)
}

pub fn gasf_symmetric_with_double_angle_diagonal(x: &[f64]) -> Check {
    let n = x.len();
    let img = encode_gasf(&Segment::from_samples(x.to_vec()), n).map_err(|e| e.to_string())?;
    let scaled = minmax_normalize(x, -1.0, 1.0).map_err(|e| e.to_string())?;
    for i in 0..n {
        let want = 2.0 * scaled[i] * scaled[i] - 1.0;
        ensure!(
            (img.at(0, i, i) - want).abs() < 1e-12,
            "diagonal {i}: {} vs {want}",
            img.at(0, i, i)
        );
        for j in 0..n {
            ensure!(img.at(0, i, j) == img.at(0, j, i), "asymmetric at ({i},{j})");
            ensure!((-1.0..=1.0).contains(&img.at(0, i, j)), "out of range at ({i},{j})");
        }
    }
    Ok(())
}

pub fn mtf_rows_stochastic_and_unit_range(x: &[f64], bins: usize) -> Check {
    let states = quantile_states(x, bins);
    ensure!(states.iter().all(|&s| s < bins), "state out of range");
    let w = transition_matrix(&states, bins);
    for (r, row) in w.chunks(bins).enumerate() {
        ensure!(
            (row.iter().sum::<f64>() - 1.0).abs() < 1e-12,
            "row {r} sums to {}",
            row.iter().sum::<f64>()
        );
        ensure!(row.iter().all(|&v| v >= 0.0), "negative entry in row {r}");
    }
    let img = encode_mtf(&Segment::from_samples(x.to_vec()), x.len(), bins).map_err(|e| e.to_string())?;
    ensure!(
        img.data.iter().all(|v| (0.0..=1.0).contains(v)),
        "image value outside [0,1]"
    );
    Ok(())
}

pub fn recurrence_symmetric_zero_diagonal(x: &[f64]) -> Check {
    let n = x.len();
    let img = encode_recurrence(&Segment::from_samples(x.to_vec()), n).map_err(|e| e.to_string())?;
    for i in 0..n {
        ensure!(img.at(0, i, i) == 0.0, "diagonal {i} is {}", img.at(0, i, i));
        for j in 0..n {
            ensure!(img.at(0, i, j) == img.at(0, j, i), "asymmetric at ({i},{j})");
            ensure!((0.0..=1.0).contains(&img.at(0, i, j)), "out of range at ({i},{j})");
        }
    }
    Ok(())
}

pub fn pixel_strategy() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..12).prop_flat_map(|side| {
        (
            Just(side),
            prop::collection::vec(-5.0f64..5.0, side * side..side * side + 20),
        )
    })
}

pub fn pixel_range_and_quantization_round_trip(side: usize, x: &[f64]) -> Check {
    let img = encode_pixel_strength(&Segment::from_samples(x.to_vec()), side).map_err(|e| e.to_string())?;
    ensure!(img.data.len() == side * side, "length {}", img.data.len());
    for &v in &img.data {
        ensure!((0.0..=1.0).contains(&v), "value {v} outside [0,1]");
        let q = quantize(v, 0.0, 1.0);
        ensure!(
            (dequantize(q, 0.0, 1.0) - v).abs() <= 0.5 / 255.0 + 1e-12,
            "quantization error at {v}"
        );
        ensure!(
            quantize(dequantize(q, 0.0, 1.0), 0.0, 1.0) == q,
            "requantization moved {q}"
        );
    }
    Ok(())
}

pub fn gaf_mtf_channels_match_single_encoders(x: &[f64]) -> Check {
    let side = 16;
    let seg = Segment::from_samples(x.to_vec());
    let both = encode(&seg, &EncodeOptions::new(Method::GafMtf).with_side(side)).map_err(|e| e.to_string())?;
    let gasf = encode_gasf(&seg, side).map_err(|e| e.to_string())?;
    let mtf = encode_mtf(&seg, side, 8).map_err(|e| e.to_string())?;
    ensure!(both.channels == 2, "{} channels", both.channels);
    ensure!(both.channel(0) == &gasf.data[..], "first channel differs from gasf");
    ensure!(both.channel(1) == &mtf.data[..], "second channel differs from mtf");
    Ok(())
}

pub fn config(cases: u32) -> Config {
    Config {
        failure_persistence: None,
        ..Config::with_cases(cases)
    }
}

fn fmt<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Check {
    r.map_err(|e| format!("{e:?}"))
}

fn lift(r: Check) -> Result<(), TestCaseError> {
    r.map_err(TestCaseError::fail)
}

/// Runs every property for `cases` random inputs each with a fixed-seed
/// runner. Returns one outcome per property.
pub fn run_all(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    let mut out = Vec::new();
    let runner = || TestRunner::new_with_rng(config(cases), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    out.push((
        "gasf symmetry and diagonal",
        fmt(runner().run(&series(48), |x| lift(gasf_symmetric_with_double_angle_diagonal(&x)))),
    ));
    out.push((
        "mtf row sums and range",
        fmt(runner().run(&(series(64), 2usize..12), |(x, b)| {
            lift(mtf_rows_stochastic_and_unit_range(&x, b))
        })),
    ));
    out.push((
        "recurrence symmetry and diagonal",
        fmt(runner().run(&series(48), |x| lift(recurrence_symmetric_zero_diagonal(&x)))),
    ));
    out.push((
        "pixel range and quantization",
        fmt(runner().run(&pixel_strategy(), |(s, x)| {
            lift(pixel_range_and_quantization_round_trip(s, &x))
        })),
    ));
    out.push((
        "gaf-mtf channel split",
        fmt(runner().run(&prop::collection::vec(-5.0f64..5.0, 16..40), |x| {
            lift(gaf_mtf_channels_match_single_encoders(&x))
        })),
    ));
    out
}
