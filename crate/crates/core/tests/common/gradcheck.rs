//! Central finite-difference gradient checks in f64.

use faultcnn::nn::{
    conv2d_backward, conv2d_forward, cross_entropy, dense_backward, dense_forward, maxpool_backward, maxpool_forward,
    relu_backward, relu_forward, softmax, softmax_cross_entropy_grad, ArchConfig, CnnModel, Tensor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const H: f64 = 1e-5;
pub const MAX_REL: f64 = 1e-4;

pub fn random(rng: &mut ChaCha8Rng, dims: &[usize]) -> Tensor<f64> {
    Tensor::from_fn(dims, |_| rng.random_range(-1.0..1.0))
}

/// `||a - b|| / max(||a||, ||b||)`, zero when both vanish.
pub fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Numerical gradient of `f` with respect to every entry of `x`.
pub fn numeric_grad(x: &Tensor<f64>, mut f: impl FnMut(&Tensor<f64>) -> f64) -> Vec<f64> {
    let mut probe = x.clone();
    (0..x.len())
        .map(|i| {
            let orig = probe.data()[i];
            probe.data_mut()[i] = orig + H;
            let up = f(&probe);
            probe.data_mut()[i] = orig - H;
            let down = f(&probe);
            probe.data_mut()[i] = orig;
            (up - down) / (2.0 * H)
        })
        .collect()
}

/// Scalar loss `sum(r * y)` so that `dL/dy = r`.
pub fn project(y: &Tensor<f64>, r: &Tensor<f64>) -> f64 {
    y.data().iter().zip(r.data()).map(|(a, b)| a * b).sum()
}

/// Worst relative error over input, weight and bias gradients of several
/// convolution shapes.
pub fn conv_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for (c, f, k, side) in [(1, 3, 3, 8), (2, 4, 3, 7), (3, 2, 2, 5), (2, 2, 1, 4)] {
        let x = random(&mut rng, &[c, side, side]);
        let w = random(&mut rng, &[f, c, k, k]);
        let b = random(&mut rng, &[f]);
        let out = side - k + 1;
        let r = random(&mut rng, &[f, out, out]);
        let g = conv2d_backward(&x, &w, &b, &r).unwrap();
        let nx = numeric_grad(&x, |x| project(&conv2d_forward(x, &w, &b).unwrap(), &r));
        let nw = numeric_grad(&w, |w| project(&conv2d_forward(&x, w, &b).unwrap(), &r));
        let nb = numeric_grad(&b, |b| project(&conv2d_forward(&x, &w, b).unwrap(), &r));
        worst = worst
            .max(rel_error(g.input.data(), &nx))
            .max(rel_error(g.weights.data(), &nw))
            .max(rel_error(g.bias.data(), &nb));
    }
    worst
}

pub fn dense_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for (inp, out) in [(1, 2), (7, 3), (64, 10)] {
        let x = random(&mut rng, &[inp]);
        let w = random(&mut rng, &[out, inp]);
        let b = random(&mut rng, &[out]);
        let r = random(&mut rng, &[out]);
        let g = dense_backward(&x, &w, &b, &r).unwrap();
        let nx = numeric_grad(&x, |x| project(&dense_forward(x, &w, &b).unwrap(), &r));
        let nw = numeric_grad(&w, |w| project(&dense_forward(&x, w, &b).unwrap(), &r));
        let nb = numeric_grad(&b, |b| project(&dense_forward(&x, &w, b).unwrap(), &r));
        worst = worst
            .max(rel_error(g.input.data(), &nx))
            .max(rel_error(g.weights.data(), &nw))
            .max(rel_error(g.bias.data(), &nb));
    }
    worst
}

pub fn relu_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // keep inputs clear of the kink at zero
    let x = Tensor::from_fn(&[2, 8, 8], |_| {
        let v: f64 = rng.random_range(0.01..1.0);
        if rng.random_bool(0.5) {
            v
        } else {
            -v
        }
    });
    let r = random(&mut rng, &[2, 8, 8]);
    let g = relu_backward(&x, &r).unwrap();
    rel_error(g.data(), &numeric_grad(&x, |x| project(&relu_forward(x), &r)))
}

pub fn maxpool_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for side in [8, 7, 2] {
        // a shuffled grid of well separated values keeps every window's maximum unique
        let n = 3 * side * side;
        let mut values: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        for i in (1..n).rev() {
            values.swap(i, rng.random_range(0..=i));
        }
        let x = Tensor::new(vec![3, side, side], values).unwrap();
        let (y, routes) = maxpool_forward(&x).unwrap();
        let r = random(&mut rng, y.dims());
        let g = maxpool_backward(x.dims(), &routes, &r).unwrap();
        let num = numeric_grad(&x, |x| project(&maxpool_forward(x).unwrap().0, &r));
        worst = worst.max(rel_error(g.data(), &num));
    }
    worst
}

pub fn softmax_ce_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for n in [2, 4, 10] {
        let z = Tensor::from_fn(&[n], |_| rng.random_range(-3.0..3.0));
        for label in 0..n {
            let g = softmax_cross_entropy_grad(&softmax(&z).unwrap(), label).unwrap();
            let num = numeric_grad(&z, |z| cross_entropy(&softmax(z).unwrap(), label).unwrap());
            worst = worst.max(rel_error(g.data(), &num));
        }
    }
    worst
}

/// Worst relative error over the input gradient and every parameter
/// gradient of a whole network under the cross-entropy loss.
pub fn network_error(model: &CnnModel<f64>, rng: &mut ChaCha8Rng, label: usize) -> f64 {
    let x = random(rng, &model.input_shape);
    let loss =
        |m: &CnnModel<f64>, x: &Tensor<f64>| cross_entropy(&softmax(&m.forward(x).unwrap()).unwrap(), label).unwrap();
    let cache = model.forward_cached(&x).unwrap();
    let grad_logits = softmax_cross_entropy_grad(&softmax(cache.logits()).unwrap(), label).unwrap();
    let (grad_x, grads) = model.backward(&cache, &grad_logits).unwrap();

    let mut worst = rel_error(grad_x.data(), &numeric_grad(&x, |x| loss(model, x)));
    for (li, layer) in model.layers.iter().enumerate() {
        for (pi, param) in layer.params.iter().enumerate() {
            let mut probe = model.clone();
            let num = numeric_grad(param, |p| {
                probe.layers[li].params[pi] = p.clone();
                loss(&probe, &x)
            });
            worst = worst.max(rel_error(grads[li][pi].data(), &num));
        }
    }
    worst
}

/// Replaces zero biases, which would park dead ReLU channels exactly on the kink.
pub fn with_random_biases(mut model: CnnModel<f64>, rng: &mut ChaCha8Rng) -> CnnModel<f64> {
    for layer in &mut model.layers {
        if let Some(b) = layer.params.get_mut(1) {
            b.data_mut().iter_mut().for_each(|v| *v = rng.random_range(-0.1..0.1));
        }
    }
    model
}

/// The default layer sequence on 8x8 inputs. Three conv/pool stages fit
/// an 8x8 input only with 1x1 kernels.
pub fn default_topology_8x8(channels: usize, classes: usize, seed: u64) -> CnnModel<f64> {
    let arch = ArchConfig {
        kernel: 1,
        ..ArchConfig::default()
    };
    CnnModel::default_for(&arch, [channels, 8, 8], classes, seed).unwrap()
}

/// The default network with 3x3 kernels on the smallest input it accepts.
pub fn default_network_22x22(seed: u64) -> CnnModel<f64> {
    CnnModel::default_for(&ArchConfig::default(), [1, 22, 22], 4, seed).unwrap()
}

/// Every full-network check, worst error first element.
pub fn full_network_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for (channels, classes) in [(1, 4), (2, 10)] {
        let model = with_random_biases(default_topology_8x8(channels, classes, seed + 1), &mut rng);
        worst = worst.max(network_error(&model, &mut rng, classes - 1));
    }
    let model = with_random_biases(default_network_22x22(seed + 2), &mut rng);
    worst.max(network_error(&model, &mut rng, 2))
}
