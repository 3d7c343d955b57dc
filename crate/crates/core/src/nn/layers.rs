//! Forward and backward kernels for the fixed layer set.
//!
//! Convolutions are valid, stride 1, lowered to a matrix product with im2col.
//! Pooling is 2x2 with stride 2; odd trailing rows/columns are dropped.

use super::tensor::{matmul, matmul_at, matmul_bt, Scalar, Tensor};
use super::NnError;

fn chw(t: &Tensor<impl Scalar>, what: &str) -> Result<(usize, usize, usize), NnError> {
    match *t.dims() {
        [c, h, w] => Ok((c, h, w)),
        ref d => Err(NnError::Shape(format!("{what}: expected [C, H, W], got {d:?}"))),
    }
}

/// Gradients of a parameterized layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads<T> {
    pub input: Tensor<T>,
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
}

fn check_conv<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<(usize, usize, usize, usize, usize), NnError> {
    let (c, h, w) = chw(input, "conv2d input")?;
    let (f, wc, k) = match *weights.dims() {
        [f, wc, kh, kw] if kh == kw => (f, wc, kh),
        ref d => {
            return Err(NnError::Shape(format!(
                "conv2d weights: expected [F, C, k, k], got {d:?}"
            )))
        }
    };
    if wc != c {
        return Err(NnError::Shape(format!(
            "conv2d: input has {c} channels, kernel expects {wc}"
        )));
    }
    if bias.dims() != [f] {
        return Err(NnError::Shape(format!(
            "conv2d bias: expected [{f}], got {:?}",
            bias.dims()
        )));
    }
    if h < k || w < k {
        return Err(NnError::Shape(format!("conv2d: input {h}x{w} smaller than kernel {k}")));
    }
    Ok((c, h, w, f, k))
}

/// Unfolds `[C, H, W]` into a `[C*k*k, OH*OW]` patch matrix.
fn im2col<T: Scalar>(x: &[T], c: usize, h: usize, w: usize, k: usize) -> Vec<T> {
    let (oh, ow) = (h - k + 1, w - k + 1);
    let mut cols = vec![T::zero(); c * k * k * oh * ow];
    for ch in 0..c {
        for ki in 0..k {
            for kj in 0..k {
                let row = (ch * k + ki) * k + kj;
                let dst = &mut cols[row * oh * ow..(row + 1) * oh * ow];
                for y in 0..oh {
                    let src = &x[(ch * h + y + ki) * w + kj..][..ow];
                    dst[y * ow..(y + 1) * ow].copy_from_slice(src);
                }
            }
        }
    }
    cols
}

/// Folds a patch-matrix gradient back onto the `[C, H, W]` input, summing overlaps.
fn col2im<T: Scalar>(cols: &[T], c: usize, h: usize, w: usize, k: usize) -> Vec<T> {
    let (oh, ow) = (h - k + 1, w - k + 1);
    let mut x = vec![T::zero(); c * h * w];
    for ch in 0..c {
        for ki in 0..k {
            for kj in 0..k {
                let row = (ch * k + ki) * k + kj;
                let src = &cols[row * oh * ow..(row + 1) * oh * ow];
                for y in 0..oh {
                    let dst = &mut x[(ch * h + y + ki) * w + kj..][..ow];
                    for (d, &s) in dst.iter_mut().zip(&src[y * ow..(y + 1) * ow]) {
                        *d = *d + s;
                    }
                }
            }
        }
    }
    x
}

/// Valid cross-correlation plus bias: `[C, H, W] -> [F, H-k+1, W-k+1]`.
pub fn conv2d_forward<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>, NnError> {
    let (c, h, w, f, k) = check_conv(input, weights, bias)?;
    let (oh, ow) = (h - k + 1, w - k + 1);
    let cols = im2col(input.data(), c, h, w, k);
    let mut out = matmul(weights.data(), &cols, f, c * k * k, oh * ow);
    for (plane, &b) in out.chunks_exact_mut(oh * ow).zip(bias.data()) {
        plane.iter_mut().for_each(|v| *v = *v + b);
    }
    Tensor::new(vec![f, oh, ow], out)
}

pub fn conv2d_backward<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> Result<ParamGrads<T>, NnError> {
    let (c, h, w, f, k) = check_conv(input, weights, bias)?;
    let (oh, ow) = (h - k + 1, w - k + 1);
    if grad_out.dims() != [f, oh, ow] {
        return Err(NnError::Shape(format!(
            "conv2d upstream gradient: expected [{f}, {oh}, {ow}], got {:?}",
            grad_out.dims()
        )));
    }
    let ckk = c * k * k;
    let p = oh * ow;
    let cols = im2col(input.data(), c, h, w, k);
    let g = grad_out.data();
    let grad_w = matmul_bt(g, &cols, f, p, ckk);
    let grad_b: Vec<T> = g.chunks_exact(p).map(|plane| plane.iter().copied().sum()).collect();
    let grad_cols = matmul_at(weights.data(), g, ckk, f, p);
    let grad_in = col2im(&grad_cols, c, h, w, k);
    Ok(ParamGrads {
        input: Tensor::new(vec![c, h, w], grad_in)?,
        weights: Tensor::new(weights.dims().to_vec(), grad_w)?,
        bias: Tensor::new(vec![f], grad_b)?,
    })
}

/// 2x2/stride-2 max pooling. Also returns, for each output cell, the flat
/// input index that produced it (first maximum in row-major window order).
pub fn maxpool_forward<T: Scalar>(input: &Tensor<T>) -> Result<(Tensor<T>, Vec<usize>), NnError> {
    let (c, h, w) = chw(input, "maxpool input")?;
    let (oh, ow) = (h / 2, w / 2);
    if oh == 0 || ow == 0 {
        return Err(NnError::Shape(format!("maxpool: input {h}x{w} smaller than 2x2")));
    }
    let x = input.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut argmax = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for y in 0..oh {
            for xo in 0..ow {
                let base = (ch * h + 2 * y) * w + 2 * xo;
                let mut best = base;
                for idx in [base + 1, base + w, base + w + 1] {
                    if x[idx] > x[best] {
                        best = idx;
                    }
                }
                out.push(x[best]);
                argmax.push(best);
            }
        }
    }
    Ok((Tensor::new(vec![c, oh, ow], out)?, argmax))
}

/// Routes each upstream gradient to the input position that won the max.
pub fn maxpool_backward<T: Scalar>(
    input_dims: &[usize],
    argmax: &[usize],
    grad_out: &Tensor<T>,
) -> Result<Tensor<T>, NnError> {
    if argmax.len() != grad_out.len() {
        return Err(NnError::Shape(format!(
            "maxpool backward: {} routes for {} gradients",
            argmax.len(),
            grad_out.len()
        )));
    }
    let mut grad = Tensor::zeros(input_dims);
    let g = grad.data_mut();
    for (&idx, &v) in argmax.iter().zip(grad_out.data()) {
        if idx >= g.len() {
            return Err(NnError::Shape("maxpool backward: route out of range".into()));
        }
        g[idx] = g[idx] + v;
    }
    Ok(grad)
}

pub fn relu_forward<T: Scalar>(input: &Tensor<T>) -> Tensor<T> {
    let mut out = input.clone();
    out.data_mut().iter_mut().for_each(|v| *v = v.max(T::zero()));
    out
}

/// Passes gradient where the forward input was positive.
pub fn relu_backward<T: Scalar>(input: &Tensor<T>, grad_out: &Tensor<T>) -> Result<Tensor<T>, NnError> {
    if input.dims() != grad_out.dims() {
        return Err(NnError::Shape(format!(
            "relu backward: input {:?} vs gradient {:?}",
            input.dims(),
            grad_out.dims()
        )));
    }
    let data = input
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&x, &g)| if x > T::zero() { g } else { T::zero() })
        .collect();
    Tensor::new(input.dims().to_vec(), data)
}

fn check_dense<T: Scalar>(input: &Tensor<T>, weights: &Tensor<T>, bias: &Tensor<T>) -> Result<(usize, usize), NnError> {
    let (out, inp) = match *weights.dims() {
        [o, i] => (o, i),
        ref d => return Err(NnError::Shape(format!("dense weights: expected [out, in], got {d:?}"))),
    };
    if input.len() != inp || input.dims().len() != 1 {
        return Err(NnError::Shape(format!(
            "dense: expected input [{inp}], got {:?}",
            input.dims()
        )));
    }
    if bias.dims() != [out] {
        return Err(NnError::Shape(format!(
            "dense bias: expected [{out}], got {:?}",
            bias.dims()
        )));
    }
    Ok((out, inp))
}

/// `y = W x + b` with `W` stored `[out, in]`.
pub fn dense_forward<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>, NnError> {
    let (out, inp) = check_dense(input, weights, bias)?;
    let mut y = matmul(weights.data(), input.data(), out, inp, 1);
    for (v, &b) in y.iter_mut().zip(bias.data()) {
        *v = *v + b;
    }
    Tensor::new(vec![out], y)
}

pub fn dense_backward<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> Result<ParamGrads<T>, NnError> {
    let (out, inp) = check_dense(input, weights, bias)?;
    if grad_out.dims() != [out] {
        return Err(NnError::Shape(format!(
            "dense upstream gradient: expected [{out}], got {:?}",
            grad_out.dims()
        )));
    }
    let g = grad_out.data();
    let grad_w = matmul(g, input.data(), out, 1, inp);
    let grad_in = matmul_at(weights.data(), g, inp, out, 1);
    Ok(ParamGrads {
        input: Tensor::new(vec![inp], grad_in)?,
        weights: Tensor::new(vec![out, inp], grad_w)?,
        bias: grad_out.clone(),
    })
}

/// Numerically stable softmax (max subtracted before exponentiation).
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Result<Tensor<T>, NnError> {
    if logits.dims().len() != 1 || logits.len() < 2 {
        return Err(NnError::Shape(format!(
            "softmax needs a vector of length >= 2, got {:?}",
            logits.dims()
        )));
    }
    let max = logits.data().iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.data().iter().map(|&v| (v - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    Tensor::new(logits.dims().to_vec(), exps.into_iter().map(|e| e / total).collect())
}

/// Smallest probability fed to the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// `-ln p[label]` with `p` clamped to at least [`PROB_FLOOR`].
pub fn cross_entropy<T: Scalar>(probs: &Tensor<T>, label: usize) -> Result<T, NnError> {
    let p = *probs.data().get(label).ok_or(NnError::Label {
        label,
        classes: probs.len(),
    })?;
    Ok(-p.max(T::from_f64(PROB_FLOOR)).ln())
}

/// Gradient of `cross_entropy(softmax(z), label)` with respect to `z`: `p - onehot(label)`.
pub fn softmax_cross_entropy_grad<T: Scalar>(probs: &Tensor<T>, label: usize) -> Result<Tensor<T>, NnError> {
    if label >= probs.len() {
        return Err(NnError::Label {
            label,
            classes: probs.len(),
        });
    }
    let mut g = probs.clone();
    g.data_mut()[label] = g.data()[label] - T::one();
    Ok(g)
}
