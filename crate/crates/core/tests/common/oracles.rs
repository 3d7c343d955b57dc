//! Naive reference implementations of the encoders and RQA.

use faultcnn::encoders::Method;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_segment(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-5.0..=5.0)).collect()
}

pub fn min_max(x: &[f64]) -> (f64, f64) {
    let mut lo = x[0];
    let mut hi = x[0];
    for &v in x {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    (lo, hi)
}

pub fn oracle_pixel(x: &[f64], side: usize) -> Vec<f64> {
    let w = &x[..side * side];
    let (lo, hi) = min_max(w);
    let mut img = vec![0.0; side * side];
    for r in 0..side {
        for c in 0..side {
            let v = w[r * side + c];
            img[r * side + c] = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
        }
    }
    img
}

pub fn oracle_gasf(x: &[f64], side: usize) -> Vec<f64> {
    let w = &x[..side];
    let (lo, hi) = min_max(w);
    let phi: Vec<f64> = w
        .iter()
        .map(|&v| {
            let s = if hi > lo {
                2.0 * (v - lo) / (hi - lo) - 1.0
            } else {
                -1.0
            };
            s.clamp(-1.0, 1.0).acos()
        })
        .collect();
    let mut img = vec![0.0; side * side];
    for i in 0..side {
        for j in 0..side {
            img[i * side + j] = (phi[i] + phi[j]).cos();
        }
    }
    img
}

pub fn oracle_mtf(x: &[f64], side: usize, q: usize) -> Vec<f64> {
    let w = &x[..side];
    // selection sort keeps this independent of the library's sort
    let mut sorted = w.to_vec();
    for i in 0..sorted.len() {
        let mut m = i;
        for j in i + 1..sorted.len() {
            if sorted[j] < sorted[m] {
                m = j;
            }
        }
        sorted.swap(i, m);
    }
    let mut edges = Vec::new();
    for k in 1..q {
        let pos = (side - 1) as f64 * k as f64 / q as f64;
        let below = pos.floor();
        let frac = pos - below;
        let a = sorted[below as usize];
        let b = sorted[(below as usize + 1).min(side - 1)];
        edges.push(if frac == 0.0 { a } else { a + frac * (b - a) });
    }
    let state: Vec<usize> = w.iter().map(|&v| edges.iter().filter(|&&e| e < v).count()).collect();
    let mut counts = vec![vec![0u32; q]; q];
    for t in 1..side {
        counts[state[t - 1]][state[t]] += 1;
    }
    let mut m = vec![vec![0.0; q]; q];
    for a in 0..q {
        let total: u32 = counts[a].iter().sum();
        for b in 0..q {
            m[a][b] = if total == 0 {
                1.0 / q as f64
            } else {
                counts[a][b] as f64 / total as f64
            };
        }
    }
    let mut img = vec![0.0; side * side];
    for i in 0..side {
        for j in 0..side {
            img[i * side + j] = m[state[i]][state[j]];
        }
    }
    img
}

pub fn oracle_recurrence(x: &[f64], side: usize) -> Vec<f64> {
    let w = &x[..side];
    let mut img = vec![0.0; side * side];
    let mut biggest = 0.0f64;
    for i in 0..side {
        for j in 0..side {
            let d = (w[i] - w[j]).abs();
            img[i * side + j] = d;
            biggest = biggest.max(d);
        }
    }
    if biggest > 0.0 {
        for v in &mut img {
            *v /= biggest;
        }
    }
    img
}

pub fn oracle(method: Method, x: &[f64], side: usize, bins: usize) -> Vec<f64> {
    match method {
        Method::PixelStrength => oracle_pixel(x, side),
        Method::Gasf => oracle_gasf(x, side),
        Method::Mtf => oracle_mtf(x, side, bins),
        Method::Recurrence => oracle_recurrence(x, side),
        Method::GafMtf => {
            let mut both = oracle_gasf(x, side);
            both.extend(oracle_mtf(x, side, bins));
            both
        }
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// RQA by walking out from every recurrent point along its line.
pub fn oracle_rqa(b: &[bool], n: usize, l_min: usize) -> (f64, f64, f64, usize, f64) {
    let at = |i: isize, j: isize| -> bool {
        i >= 0 && j >= 0 && (i as usize) < n && (j as usize) < n && i != j && b[i as usize * n + j as usize]
    };
    let mut recurrent = 0usize;
    let mut on_diag = 0usize;
    let mut on_vert = 0usize;
    for i in 0..n as isize {
        for j in 0..n as isize {
            if !at(i, j) {
                continue;
            }
            recurrent += 1;
            let mut d = 1;
            while at(i - d, j - d) {
                d += 1;
            }
            let mut e = 1;
            while at(i + e, j + e) {
                e += 1;
            }
            if (d + e - 1) as usize >= l_min {
                on_diag += 1;
            }
            let mut u = 1;
            while at(i - u, j) {
                u += 1;
            }
            let mut w = 1;
            while at(i + w, j) {
                w += 1;
            }
            if (u + w - 1) as usize >= l_min {
                on_vert += 1;
            }
        }
    }
    // diagonal line lengths, one entry per line start
    let mut lengths = Vec::new();
    for i in 0..n as isize {
        for j in 0..n as isize {
            if at(i, j) && !at(i - 1, j - 1) {
                let mut len = 0;
                while at(i + len, j + len) {
                    len += 1;
                }
                lengths.push(len as usize);
            }
        }
    }
    let l_max = lengths.iter().copied().max().unwrap_or(0);
    let long: Vec<usize> = lengths.into_iter().filter(|&l| l >= l_min).collect();
    let mut ent = 0.0;
    for l in 1..=n {
        let c = long.iter().filter(|&&x| x == l).count();
        if c > 0 {
            let p = c as f64 / long.len() as f64;
            ent -= p * p.ln();
        }
    }
    let frac = |k: usize| {
        if recurrent == 0 {
            0.0
        } else {
            k as f64 / recurrent as f64
        }
    };
    (
        recurrent as f64 / (n * n - n) as f64,
        frac(on_diag),
        frac(on_vert),
        l_max,
        ent,
    )
}
