use super::EvalError;

/// Counts indexed `[true][predicted]`, zero-based class ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        ConfusionMatrix {
            n_classes,
            counts: vec![0; n_classes * n_classes],
        }
    }

    /// Builds a matrix from explicit rows.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self, EvalError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(EvalError::Config("confusion matrix rows must form a square".into()));
        }
        Ok(ConfusionMatrix {
            n_classes: n,
            counts: rows.concat(),
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.n_classes + predicted]
    }

    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<(), EvalError> {
        let n = self.n_classes;
        for id in [truth, predicted] {
            if id >= n {
                return Err(EvalError::ClassOutOfRange { id, n });
            }
        }
        self.counts[truth * n + predicted] += 1;
        Ok(())
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks(self.n_classes.max(1))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|c| self.get(c, c)).sum()
    }

    pub fn row_sum(&self, truth: usize) -> u64 {
        (0..self.n_classes).map(|p| self.get(truth, p)).sum()
    }

    pub fn col_sum(&self, predicted: usize) -> u64 {
        (0..self.n_classes).map(|t| self.get(t, predicted)).sum()
    }

    /// `trace / total`; undefined for an empty matrix.
    pub fn accuracy(&self) -> Result<f64, EvalError> {
        match self.total() {
            0 => Err(EvalError::Empty),
            total => Ok(self.trace() as f64 / total as f64),
        }
    }
}

pub fn confusion_from(preds: &[usize], labels: &[usize], n: usize) -> Result<ConfusionMatrix, EvalError> {
    if preds.len() != labels.len() {
        return Err(EvalError::Length {
            preds: preds.len(),
            labels: labels.len(),
        });
    }
    let mut cm = ConfusionMatrix::new(n);
    for (&p, &t) in preds.iter().zip(labels) {
        cm.record(t, p)?;
    }
    Ok(cm)
}

/// Per-class scores. A zero denominator yields 0 with the matching flag set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Nothing was predicted as this class.
    pub precision_undefined: bool,
    /// The class never occurs in the labels.
    pub recall_undefined: bool,
    /// Precision and recall are both zero.
    pub f1_undefined: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_f1: f64,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn metrics_from(cm: &ConfusionMatrix) -> Result<Metrics, EvalError> {
    let accuracy = cm.accuracy()?;
    let per_class: Vec<ClassMetrics> = (0..cm.n_classes())
        .map(|c| {
            let hit = cm.get(c, c);
            let (precision, precision_undefined) = ratio(hit, cm.col_sum(c));
            let (recall, recall_undefined) = ratio(hit, cm.row_sum(c));
            let sum = precision + recall;
            let (f1, f1_undefined) = if sum == 0.0 {
                (0.0, true)
            } else {
                (2.0 * precision * recall / sum, false)
            };
            ClassMetrics {
                precision,
                recall,
                f1,
                precision_undefined,
                recall_undefined,
                f1_undefined,
            }
        })
        .collect();
    let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / per_class.len() as f64;
    Ok(Metrics {
        accuracy,
        per_class,
        macro_f1,
    })
}
