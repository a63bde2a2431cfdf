// SPDX-License-Identifier: MIT OR Apache-2.0

//! KNN classification evaluated by leave-one-out cross-validation.
//!
//! Each fold fits mean imputation and min-max scaling on the training rows
//! only (unless [`LeakageMode::Global`] is chosen), predicts the held-out
//! row, and all predictions are pooled into one confusion matrix.

pub mod knn;
pub mod metrics;
pub mod preprocess;
pub mod selection;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use knn::knn_predict;
pub use metrics::{confusion_metrics, mcc_binary, mcc_multiclass, ClassMetrics, ConfusionMatrix, EvalReport};
pub use preprocess::{impute_mean, minmax_scale, ImputerParams, Row, ScalerParams};
pub use selection::{exhaustive_select, forward_select, forward_select_holdout, HoldoutSelection, SelectionResult};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::ingest::SubjectRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Binary food-addiction label.
    #[default]
    Fa,
    /// Symptom-count class 1..=4.
    Sc,
}

impl Target {
    pub fn label(self, s: &SubjectRecord) -> u32 {
        match self {
            Target::Fa => u32::from(s.fa),
            Target::Sc => u32::from(s.sc_class()),
        }
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fa" => Ok(Target::Fa),
            "sc" => Ok(Target::Sc),
            _ => Err(Error::InvalidConfig(format!("unknown target `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LeakageMode {
    /// Imputer and scaler see only the training split of each fold.
    #[default]
    FoldSafe,
    /// Imputer and scaler are fitted once on all rows.
    Global,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    #[default]
    Euclidean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub k_neighbors: usize,
    pub k_grid: Vec<usize>,
    pub distance: Distance,
    pub leakage_mode: LeakageMode,
    pub selection_max_size: usize,
    pub target: Target,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 5,
            k_grid: vec![1, 3, 5, 7, 9, 11, 15],
            distance: Distance::Euclidean,
            leakage_mode: LeakageMode::FoldSafe,
            selection_max_size: 5,
            target: Target::Fa,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::InvalidConfig("k_neighbors must be >= 1".into()));
        }
        if self.k_grid.is_empty() || self.k_grid.contains(&0) {
            return Err(Error::InvalidConfig("k_grid must be non-empty with k >= 1".into()));
        }
        if self.selection_max_size == 0 {
            return Err(Error::InvalidConfig("selection_max_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Labels for the matrix rows, matched to subjects by participant id.
pub fn labels_for(matrix: &FeatureMatrix, subjects: &[SubjectRecord], target: Target) -> Result<Vec<u32>> {
    let by_id: BTreeMap<&str, &SubjectRecord> =
        subjects.iter().map(|s| (s.participant_id.as_str(), s)).collect();
    matrix
        .ids
        .iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .map(|s| target.label(s))
                .ok_or_else(|| Error::Dataset(format!("no subject record for `{id}`")))
        })
        .collect()
}

/// Fails with [`Error::DegenerateLabels`] unless at least two classes
/// occur.
pub fn check_labels(y: &[u32]) -> Result<()> {
    let mut classes: Vec<u32> = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    match classes.len() {
        0 => Err(Error::DegenerateLabels("no labels".into())),
        1 => Err(Error::DegenerateLabels(format!("every subject has class {}", classes[0]))),
        _ => Ok(()),
    }
}

/// Rows restricted to the given column indices.
pub fn select_columns(rows: &[Row], cols: &[usize]) -> Vec<Row> {
    rows.iter()
        .map(|r| cols.iter().map(|&j| r[j]).collect())
        .collect()
}

/// Held-out predictions for every row, in row order.
pub fn loocv_predictions(rows: &[Row], y: &[u32], k: usize, mode: LeakageMode) -> Result<Vec<u32>> {
    let n = rows.len();
    if n < 2 || y.len() != n {
        return Err(Error::InsufficientData(format!(
            "LOOCV needs at least 2 labelled rows (got {n} rows, {} labels)",
            y.len()
        )));
    }
    if k == 0 || k > n - 1 {
        return Err(Error::InvalidConfig(format!("k = {k} exceeds the LOOCV training size {}", n - 1)));
    }
    match mode {
        LeakageMode::FoldSafe => (0..n)
            .into_par_iter()
            .map(|i| {
                let train: Vec<Row> = rows
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, r)| r.clone())
                    .collect();
                let train_y: Vec<u32> = (0..n).filter(|&j| j != i).map(|j| y[j]).collect();
                let (tx, qx, _) = impute_mean(&train, std::slice::from_ref(&rows[i]));
                let (tx, qx, _) = minmax_scale(&tx, &qx);
                knn_predict(&tx, &train_y, &qx[0], k)
            })
            .collect(),
        LeakageMode::Global => {
            let (all, _, _) = impute_mean(rows, &[]);
            let (all, _, _) = minmax_scale(&all, &[]);
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let train: Vec<Vec<f64>> = (0..n).filter(|&j| j != i).map(|j| all[j].clone()).collect();
                    let train_y: Vec<u32> = (0..n).filter(|&j| j != i).map(|j| y[j]).collect();
                    knn_predict(&train, &train_y, &all[i], k)
                })
                .collect()
        }
    }
}

/// Pooled LOOCV evaluation with `cfg.k_neighbors`.
pub fn loocv(rows: &[Row], y: &[u32], cfg: &ModelConfig) -> Result<EvalReport> {
    loocv_with_k(rows, y, cfg.k_neighbors, cfg.leakage_mode)
}

pub fn loocv_with_k(rows: &[Row], y: &[u32], k: usize, mode: LeakageMode) -> Result<EvalReport> {
    let predicted = loocv_predictions(rows, y, k, mode)?;
    let cm = ConfusionMatrix::from_predictions(y, &predicted);
    let report = EvalReport::from_confusion(cm, true);
    if report.degenerate {
        log::warn!("labels contain a single class; MCC reported as 0");
    }
    Ok(report)
}

/// Pooled LOOCV MCC for each k on the grid; the best k is the smallest
/// one reaching the maximum. Values of k above the training size are
/// skipped.
pub fn sweep_k(rows: &[Row], y: &[u32], cfg: &ModelConfig) -> Result<(usize, Vec<(usize, f64)>)> {
    let n = rows.len();
    let mut grid: Vec<usize> = cfg.k_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    let mut scores = Vec::new();
    for k in grid {
        if n < 2 || k > n - 1 {
            log::warn!("skipping k = {k}: larger than the LOOCV training size");
            continue;
        }
        scores.push((k, loocv_with_k(rows, y, k, cfg.leakage_mode)?.mcc));
    }
    let mut best: Option<(usize, f64)> = None;
    for &(k, mcc) in &scores {
        if best.is_none_or(|(_, b)| mcc > b) {
            best = Some((k, mcc));
        }
    }
    let (best_k, _) = best.ok_or_else(|| Error::InvalidConfig("no usable k on the grid".into()))?;
    Ok((best_k, scores))
}
