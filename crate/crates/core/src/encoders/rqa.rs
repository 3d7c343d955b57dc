use super::{EncodeError, EncodedImage, Method};

/// Recurrence quantification measures of a thresholded recurrence plot.
///
/// The main diagonal (line of identity) is excluded from every measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RqaSummary {
    /// Recurrence rate.
    pub rr: f64,
    /// Determinism: share of recurrence points on diagonal lines of length >= `l_min`.
    pub det: f64,
    /// Laminarity: share of recurrence points on vertical lines of length >= `l_min`.
    pub lam: f64,
    /// Longest diagonal line.
    pub l_max: usize,
    /// Shannon entropy (nats) of the diagonal line-length distribution, lines >= `l_min`.
    pub ent: f64,
}

/// Thresholds a recurrence image at `epsilon` and summarizes it.
pub fn rqa_summary(recurrence: &EncodedImage, epsilon: f64, l_min: usize) -> Result<RqaSummary, EncodeError> {
    if recurrence.method != Method::Recurrence {
        return Err(EncodeError::WrongMethod {
            expected: Method::Recurrence,
            got: recurrence.method,
        });
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(EncodeError::Rqa(format!("epsilon {epsilon} outside [0, 1]")));
    }
    let n = recurrence.side;
    let binary: Vec<bool> = recurrence.channel(0).iter().map(|&v| v <= epsilon).collect();
    rqa_from_binary(&binary, n, l_min)
}

/// RQA measures of an `n x n` binary recurrence matrix (row-major).
pub fn rqa_from_binary(b: &[bool], n: usize, l_min: usize) -> Result<RqaSummary, EncodeError> {
    if l_min < 2 {
        return Err(EncodeError::Rqa(format!("l_min must be >= 2, got {l_min}")));
    }
    if n < 2 || b.len() != n * n {
        return Err(EncodeError::Rqa(format!(
            "matrix of {} cells is not a square of side >= 2",
            b.len()
        )));
    }
    let at = |i: usize, j: usize| i != j && b[i * n + j];

    let recurrent = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| at(i, j))
        .count();

    // diagonal runs, both triangles
    let mut diag_hist = vec![0usize; n];
    for offset in 1..n {
        for upper in [true, false] {
            let cells = (0..n - offset).map(|t| if upper { (t, t + offset) } else { (t + offset, t) });
            accumulate_runs(cells.map(|(i, j)| at(i, j)), &mut diag_hist);
        }
    }
    let mut vert_hist = vec![0usize; n + 1];
    for j in 0..n {
        accumulate_runs((0..n).map(|i| at(i, j)), &mut vert_hist);
    }

    let points_on = |hist: &[usize]| -> usize { hist.iter().enumerate().skip(l_min).map(|(len, &c)| len * c).sum() };
    let ratio = |num: usize| {
        if recurrent == 0 {
            0.0
        } else {
            num as f64 / recurrent as f64
        }
    };

    let lines: usize = diag_hist.iter().skip(l_min).sum();
    let ent = if lines == 0 {
        0.0
    } else {
        diag_hist
            .iter()
            .skip(l_min)
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / lines as f64;
                -p * p.ln()
            })
            .sum()
    };

    Ok(RqaSummary {
        rr: recurrent as f64 / (n * n - n) as f64,
        det: ratio(points_on(&diag_hist)),
        lam: ratio(points_on(&vert_hist)),
        l_max: diag_hist.iter().rposition(|&c| c > 0).unwrap_or(0),
        ent,
    })
}

fn accumulate_runs(cells: impl Iterator<Item = bool>, hist: &mut [usize]) {
    let mut run = 0;
    for on in cells {
        if on {
            run += 1;
        } else if run > 0 {
            hist[run] += 1;
            run = 0;
        }
    }
    if run > 0 {
        hist[run] += 1;
    }
}
