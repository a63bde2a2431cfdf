// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are actual classes, columns predicted, both in `labels` order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<u32>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<u32>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = labels.len();
        if k == 0 || counts.len() != k || counts.iter().any(|r| r.len() != k) {
            return Err(Error::Schema(format!(
                "confusion matrix must be {k}x{k} to match its labels"
            )));
        }
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k {
            return Err(Error::Schema("confusion matrix labels must be distinct".into()));
        }
        Ok(Self { labels, counts })
    }

    /// Tallies predictions over the sorted union of observed labels.
    pub fn from_predictions(actual: &[u32], predicted: &[u32]) -> Self {
        let mut labels: Vec<u32> = actual.iter().chain(predicted).copied().collect();
        labels.sort_unstable();
        labels.dedup();
        let k = labels.len();
        let mut counts = vec![vec![0u64; k]; k];
        let pos = |l: u32| labels.binary_search(&l).expect("collected");
        for (&a, &p) in actual.iter().zip(predicted) {
            counts[pos(a)][pos(p)] += 1;
        }
        Self { labels, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.labels.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }
}

/// `(TP*TN - FP*FN) / sqrt((TP+FP)(TP+FN)(TN+FP)(TN+FN))` on a 2x2 matrix
/// whose second label is the positive class. A zero factor in the
/// denominator gives 0.
pub fn mcc_binary(cm: &ConfusionMatrix) -> Result<f64> {
    if cm.labels.len() != 2 {
        return Err(Error::Schema("binary MCC needs a 2x2 confusion matrix".into()));
    }
    let c = |i: usize, j: usize| cm.counts[i][j] as f64;
    let (tn, fp, fn_, tp) = (c(0, 0), c(0, 1), c(1, 0), c(1, 1));
    let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((tp * tn - fp * fn_) / denom.sqrt())
}

/// Gorodkin's R_K: `(c*s - sum p_k t_k) / sqrt((s^2 - sum p_k^2)(s^2 - sum t_k^2))`
/// with `c` correct, `s` total, `t_k`/`p_k` actual/predicted class totals.
pub fn mcc_multiclass(cm: &ConfusionMatrix) -> f64 {
    let s = cm.total() as f64;
    let c = cm.trace() as f64;
    let t: Vec<f64> = cm.row_sums().into_iter().map(|v| v as f64).collect();
    let p: Vec<f64> = cm.col_sums().into_iter().map(|v| v as f64).collect();
    let pt: f64 = p.iter().zip(&t).map(|(a, b)| a * b).sum();
    let pp: f64 = p.iter().map(|v| v * v).sum();
    let tt: f64 = t.iter().map(|v| v * v).sum();
    let denom = (s * s - pp) * (s * s - tt);
    if denom <= 0.0 {
        return 0.0;
    }
    (c * s - pt) / denom.sqrt()
}

/// One-vs-rest metrics for a single class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: u32,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f1: f64,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Accuracy and per-class sensitivity/specificity/F1; every 0/0 is 0.
pub fn confusion_metrics(cm: &ConfusionMatrix) -> (f64, Vec<ClassMetrics>) {
    let total = cm.total() as f64;
    let rows = cm.row_sums();
    let cols = cm.col_sums();
    let per_class = cm
        .labels
        .iter()
        .enumerate()
        .map(|(k, &label)| {
            let tp = cm.counts[k][k] as f64;
            let fn_ = rows[k] as f64 - tp;
            let fp = cols[k] as f64 - tp;
            let tn = total - tp - fn_ - fp;
            let sensitivity = ratio(tp, tp + fn_);
            let precision = ratio(tp, tp + fp);
            ClassMetrics {
                label,
                sensitivity,
                specificity: ratio(tn, tn + fp),
                precision,
                f1: ratio(2.0 * precision * sensitivity, precision + sensitivity),
            }
        })
        .collect();
    (ratio(cm.trace() as f64, total), per_class)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub mcc: f64,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    /// Metrics computed once on predictions pooled over all folds.
    pub pooled: bool,
    /// Fewer than two actual classes; MCC is reported as 0.
    pub degenerate: bool,
}

impl EvalReport {
    pub fn from_confusion(confusion: ConfusionMatrix, pooled: bool) -> Self {
        let actual_classes = confusion.row_sums().iter().filter(|&&r| r > 0).count();
        let degenerate = actual_classes < 2;
        let mcc = if degenerate {
            0.0
        } else if confusion.labels.len() == 2 {
            mcc_binary(&confusion).expect("2x2")
        } else {
            mcc_multiclass(&confusion)
        };
        let (accuracy, per_class) = confusion_metrics(&confusion);
        EvalReport {
            confusion,
            mcc,
            accuracy,
            per_class,
            pooled,
            degenerate,
        }
    }

    pub fn class(&self, label: u32) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|c| c.label == label)
    }
}
