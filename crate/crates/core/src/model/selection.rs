// SPDX-License-Identifier: MIT OR Apache-2.0

//! Feature-subset search scored by pooled LOOCV MCC.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    impute_mean, knn_predict, loocv, minmax_scale, select_columns, ConfusionMatrix, EvalReport, ModelConfig, Row,
};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, GroupFilter};

/// Upper bound on the number of subsets scored by [`exhaustive_select`].
pub const EXHAUSTIVE_LIMIT: usize = 250_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub chosen_features: Vec<String>,
    /// Feature added at each step and the MCC after adding it.
    pub trajectory: Vec<(String, f64)>,
    pub final_report: EvalReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoldoutSelection {
    pub selection: SelectionResult,
    pub holdout_ids: Vec<String>,
    /// KNN trained on the selection split, scored on the held-out rows.
    pub holdout_report: EvalReport,
}

fn candidates(matrix: &FeatureMatrix, filter: GroupFilter) -> Result<Vec<usize>> {
    let mut cols = matrix.columns_matching(filter);
    cols.sort_by(|&a, &b| matrix.names[a].cmp(&matrix.names[b]));
    if cols.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no candidate features for group {filter:?}"
        )));
    }
    Ok(cols)
}

fn score(rows: &[Row], y: &[u32], cols: &[usize], cfg: &ModelConfig) -> Result<f64> {
    Ok(loocv(&select_columns(rows, cols), y, cfg)?.mcc)
}

fn check_rows(matrix: &FeatureMatrix, y: &[u32]) -> Result<()> {
    if matrix.rows.len() != y.len() {
        return Err(Error::Dataset(format!(
            "{} feature rows but {} labels",
            matrix.rows.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Greedy forward selection. Each step adds the candidate with the highest
/// MCC (name order breaks ties); the search stops when no candidate
/// strictly improves on the current MCC or `selection_max_size` is hit.
pub fn forward_select(
    matrix: &FeatureMatrix,
    y: &[u32],
    filter: GroupFilter,
    cfg: &ModelConfig,
) -> Result<SelectionResult> {
    check_rows(matrix, y)?;
    forward_on_rows(&matrix.rows, &matrix.names, y, &candidates(matrix, filter)?, cfg)
}

fn forward_on_rows(
    rows: &[Row],
    names: &[String],
    y: &[u32],
    pool: &[usize],
    cfg: &ModelConfig,
) -> Result<SelectionResult> {
    cfg.validate()?;
    let mut chosen: Vec<usize> = Vec::new();
    let mut trajectory = Vec::new();
    let mut current = f64::NEG_INFINITY;
    while chosen.len() < cfg.selection_max_size {
        let remaining: Vec<usize> = pool.iter().copied().filter(|c| !chosen.contains(c)).collect();
        if remaining.is_empty() {
            break;
        }
        let scores: Vec<f64> = remaining
            .par_iter()
            .map(|&c| {
                let mut cols = chosen.clone();
                cols.push(c);
                score(rows, y, &cols, cfg)
            })
            .collect::<Result<_>>()?;
        let mut best: Option<(usize, f64)> = None;
        for (&c, &s) in remaining.iter().zip(&scores) {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((c, s));
            }
        }
        let (c, s) = best.expect("non-empty");
        if s <= current {
            break;
        }
        log::info!("selected {} (MCC {s:.4})", names[c]);
        chosen.push(c);
        trajectory.push((names[c].clone(), s));
        current = s;
    }
    let final_report = loocv(&select_columns(rows, &chosen), y, cfg)?;
    Ok(SelectionResult {
        chosen_features: chosen.iter().map(|&c| names[c].clone()).collect(),
        trajectory,
        final_report,
    })
}

fn subsets(pool: &[usize], max_size: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_size {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&last| last + 1);
            for i in start..pool.len() {
                let mut t = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.into_iter()
        .map(|s| s.into_iter().map(|i| pool[i]).collect())
        .collect()
}

fn binomial_total(n: usize, k: usize) -> usize {
    let mut total = 0usize;
    let mut c = 1usize;
    for i in 0..k.min(n) {
        c = c.saturating_mul(n - i) / (i + 1);
        total = total.saturating_add(c);
    }
    total
}

/// Scores every subset of at most `min(3, selection_max_size)` candidates and
/// returns the best; ties go to the smaller subset, then to name order.
/// The trajectory lists the chosen features in name order, each paired with
/// the final MCC.
pub fn exhaustive_select(
    matrix: &FeatureMatrix,
    y: &[u32],
    filter: GroupFilter,
    cfg: &ModelConfig,
) -> Result<SelectionResult> {
    cfg.validate()?;
    check_rows(matrix, y)?;
    let pool = candidates(matrix, filter)?;
    let max_size = cfg.selection_max_size.min(3);
    let total = binomial_total(pool.len(), max_size);
    if total > EXHAUSTIVE_LIMIT {
        return Err(Error::InvalidConfig(format!(
            "exhaustive search over {} candidates would score {total} subsets (limit {EXHAUSTIVE_LIMIT})",
            pool.len()
        )));
    }
    let all = subsets(&pool, max_size);
    let scores: Vec<f64> = all
        .par_iter()
        .map(|cols| score(&matrix.rows, y, cols, cfg))
        .collect::<Result<_>>()?;
    let mut best = 0usize;
    for i in 1..all.len() {
        let (s, b) = (scores[i], scores[best]);
        if s > b || (s == b && all[i].len() < all[best].len()) {
            best = i;
        }
    }
    let chosen = &all[best];
    let final_report = loocv(&select_columns(&matrix.rows, chosen), y, cfg)?;
    let names: Vec<String> = chosen.iter().map(|&c| matrix.names[c].clone()).collect();
    Ok(SelectionResult {
        trajectory: names.iter().map(|n| (n.clone(), scores[best])).collect(),
        chosen_features: names,
        final_report,
    })
}

/// Stratified split: per class, a seeded shuffle sends `round(fraction * n_c)`
/// rows (at least one when the class has two or more) to the held-out side.
pub fn stratified_holdout(y: &[u32], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig("holdout fraction must lie in (0, 1)".into()));
    }
    let mut labels: Vec<u32> = y.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for label in labels {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == label).collect();
        idx.shuffle(&mut rng);
        let mut n_test = (fraction * idx.len() as f64).round() as usize;
        if idx.len() >= 2 {
            n_test = n_test.clamp(1, idx.len() - 1);
        } else {
            n_test = 0;
        }
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Forward selection on a stratified selection split, then a single
/// evaluation of the chosen subset on rows never seen during the search.
pub fn forward_select_holdout(
    matrix: &FeatureMatrix,
    y: &[u32],
    filter: GroupFilter,
    cfg: &ModelConfig,
    fraction: f64,
    seed: u64,
) -> Result<HoldoutSelection> {
    check_rows(matrix, y)?;
    let pool = candidates(matrix, filter)?;
    let (train, test) = stratified_holdout(y, fraction, seed)?;
    if test.is_empty() {
        return Err(Error::InsufficientData("holdout split is empty".into()));
    }
    let train_rows: Vec<Row> = train.iter().map(|&i| matrix.rows[i].clone()).collect();
    let train_y: Vec<u32> = train.iter().map(|&i| y[i]).collect();
    let selection = forward_on_rows(&train_rows, &matrix.names, &train_y, &pool, cfg)?;
    let cols: Vec<usize> = selection
        .chosen_features
        .iter()
        .map(|n| matrix.column_index(n).expect("chosen from matrix"))
        .collect();
    let tx = select_columns(&train_rows, &cols);
    let qx: Vec<Row> = select_columns(&test.iter().map(|&i| matrix.rows[i].clone()).collect::<Vec<_>>(), &cols);
    let (tx, qx, _) = impute_mean(&tx, &qx);
    let (tx, qx, _) = minmax_scale(&tx, &qx);
    if cfg.k_neighbors > tx.len() {
        return Err(Error::InvalidConfig(format!(
            "k = {} exceeds the selection split size {}",
            cfg.k_neighbors,
            tx.len()
        )));
    }
    let predicted: Vec<u32> = qx
        .iter()
        .map(|q| knn_predict(&tx, &train_y, q, cfg.k_neighbors))
        .collect::<Result<_>>()?;
    let actual: Vec<u32> = test.iter().map(|&i| y[i]).collect();
    Ok(HoldoutSelection {
        selection,
        holdout_ids: test.iter().map(|&i| matrix.ids[i].clone()).collect(),
        holdout_report: EvalReport::from_confusion(ConfusionMatrix::from_predictions(&actual, &predicted), false),
    })
}
