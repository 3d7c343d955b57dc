//! Forward passes and the optimizer against direct loop implementations.

use faultcnn::nn::{adam_step, conv2d_forward, dense_forward, maxpool_forward, AdamState, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(rng: &mut ChaCha8Rng, dims: &[usize]) -> Tensor<f64> {
    Tensor::from_fn(dims, |_| rng.random_range(-2.0..2.0))
}

#[test]
fn conv_matches_quadruple_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (c, f, k, h, w) in [(1, 8, 3, 31, 31), (3, 5, 3, 9, 12), (2, 4, 5, 7, 7), (4, 2, 1, 3, 6)] {
        let x = random(&mut rng, &[c, h, w]);
        let wt = random(&mut rng, &[f, c, k, k]);
        let b = random(&mut rng, &[f]);
        let y = conv2d_forward(&x, &wt, &b).unwrap();
        let (oh, ow) = (h - k + 1, w - k + 1);
        assert_eq!(y.dims(), [f, oh, ow]);
        let (xd, wd) = (x.data(), wt.data());
        for o in 0..f {
            for i in 0..oh {
                for j in 0..ow {
                    let mut acc = b.data()[o];
                    for ch in 0..c {
                        for u in 0..k {
                            for v in 0..k {
                                acc += wd[((o * c + ch) * k + u) * k + v] * xd[(ch * h + i + u) * w + j + v];
                            }
                        }
                    }
                    let got = y.data()[(o * oh + i) * ow + j];
                    assert!((got - acc).abs() <= 1e-10, "conv mismatch {got} vs {acc}");
                }
            }
        }
    }
}

#[test]
fn dense_matches_dot_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let x = random(&mut rng, &[37]);
    let w = random(&mut rng, &[5, 37]);
    let b = random(&mut rng, &[5]);
    let y = dense_forward(&x, &w, &b).unwrap();
    for o in 0..5 {
        let acc: f64 = b.data()[o] + (0..37).map(|i| w.data()[o * 37 + i] * x.data()[i]).sum::<f64>();
        assert!((y.data()[o] - acc).abs() <= 1e-10);
    }
}

#[test]
fn maxpool_matches_window_maxima() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let x = random(&mut rng, &[2, 7, 9]);
    let (y, _) = maxpool_forward(&x).unwrap();
    assert_eq!(y.dims(), [2, 3, 4]);
    for c in 0..2 {
        for i in 0..3 {
            for j in 0..4 {
                let m = [(0, 0), (0, 1), (1, 0), (1, 1)]
                    .iter()
                    .map(|(a, b)| x.data()[(c * 7 + 2 * i + a) * 9 + 2 * j + b])
                    .fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(y.data()[(c * 3 + i) * 4 + j], m);
            }
        }
    }
}

#[test]
fn adam_matches_textbook_update() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let (lr, b1, b2, eps) = (1e-3, 0.9, 0.999, 1e-8);
    let mut params = vec![random(&mut rng, &[3, 4]), random(&mut rng, &[4])];
    let mut reference: Vec<Vec<f64>> = params.iter().map(|p| p.data().to_vec()).collect();
    let mut m: Vec<Vec<f64>> = reference.iter().map(|p| vec![0.0; p.len()]).collect();
    let mut v = m.clone();
    let mut state = AdamState::new(lr, b1, b2, eps).unwrap();
    for t in 1..=25 {
        let grads = vec![random(&mut rng, &[3, 4]), random(&mut rng, &[4])];
        adam_step(&mut params, &grads, &mut state).unwrap();
        for (p, g) in grads.iter().enumerate() {
            for (i, &gi) in g.data().iter().enumerate() {
                m[p][i] = b1 * m[p][i] + (1.0 - b1) * gi;
                v[p][i] = b2 * v[p][i] + (1.0 - b2) * gi * gi;
                let mh = m[p][i] / (1.0 - b1.powi(t));
                let vh = v[p][i] / (1.0 - b2.powi(t));
                reference[p][i] -= lr * mh / (vh.sqrt() + eps);
            }
        }
    }
    for (p, r) in params.iter().zip(&reference) {
        for (a, b) in p.data().iter().zip(r) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }
}
