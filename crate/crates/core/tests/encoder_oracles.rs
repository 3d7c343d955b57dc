//! Every encoder against a deliberately naive re-implementation.

mod common;

use common::oracles::{max_abs_diff, oracle, oracle_mtf, oracle_rqa, random_segment};
use faultcnn::encoders::{encode, rqa_from_binary, EncodeOptions, Method, WindowSelect};
use faultcnn::signal::Segment;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

#[test]
fn all_methods_match_naive_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let segments: Vec<Vec<f64>> = (0..100).map(|_| random_segment(&mut rng, 1000)).collect();
    for method in Method::ALL {
        let opts = EncodeOptions::new(method);
        let mut worst = 0.0f64;
        for x in &segments {
            let img = encode(&Segment::from_samples(x.clone()), &opts).unwrap();
            assert_eq!(img.channels, method.channels());
            assert_eq!(img.side, method.default_side());
            worst = worst.max(max_abs_diff(&img.data, &oracle(method, x, opts.side, opts.bins)));
        }
        assert!(worst <= TOL, "{method}: max abs diff {worst:e}");
    }
}

#[test]
fn other_bin_counts_and_sides() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for bins in [2, 3, 5, 16] {
        for side in [2, 7, 64] {
            let x = random_segment(&mut rng, 1000);
            let opts = EncodeOptions {
                bins,
                ..EncodeOptions::new(Method::Mtf).with_side(side)
            };
            let img = encode(&Segment::from_samples(x.clone()), &opts).unwrap();
            assert!(max_abs_diff(&img.data, &oracle_mtf(&x, side, bins)) <= TOL);
        }
    }
}

#[test]
fn decimated_window() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x = random_segment(&mut rng, 1000);
    let side = 256;
    let picked: Vec<f64> = (0..side).map(|i| x[i * 1000 / side]).collect();
    for method in [Method::Gasf, Method::Recurrence] {
        let opts = EncodeOptions {
            window: WindowSelect::Decimate,
            ..EncodeOptions::new(method)
        };
        let img = encode(&Segment::from_samples(x.clone()), &opts).unwrap();
        assert!(max_abs_diff(&img.data, &oracle(method, &picked, side, 8)) <= TOL);
    }
}

#[test]
fn rqa_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 12;
    for trial in 0..200 {
        let density = [0.2, 0.5, 0.8][trial % 3];
        let mut b = vec![false; n * n];
        for i in 0..n {
            for j in i..n {
                let v = i == j || rng.random_bool(density);
                b[i * n + j] = v;
                b[j * n + i] = v;
            }
        }
        // a few asymmetric matrices too; the measures do not assume symmetry
        if trial % 10 == 0 {
            b.iter_mut().for_each(|v| *v = rng.random_bool(0.5));
        }
        for l_min in [2, 3] {
            let s = rqa_from_binary(&b, n, l_min).unwrap();
            let (rr, det, lam, l_max, ent) = oracle_rqa(&b, n, l_min);
            assert!((s.rr - rr).abs() < 1e-12);
            assert!((s.det - det).abs() < 1e-12, "trial {trial}: det {} vs {det}", s.det);
            assert!((s.lam - lam).abs() < 1e-12, "trial {trial}: lam {} vs {lam}", s.lam);
            assert_eq!(s.l_max, l_max);
            assert!((s.ent - ent).abs() < 1e-12);
        }
    }
}
