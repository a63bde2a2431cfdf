// SPDX-License-Identifier: MIT OR Apache-2.0

use std::collections::BTreeMap;

use crate::error::{Error, Result};

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Majority vote of the `k` Euclidean-nearest training rows.
///
/// Equal distances keep training-row order; a tied vote goes to the
/// smallest class code.
pub fn knn_predict(train_x: &[Vec<f64>], train_y: &[u32], query: &[f64], k: usize) -> Result<u32> {
    if train_x.is_empty() {
        return Err(Error::InsufficientData("empty training set".into()));
    }
    if k == 0 || k > train_x.len() {
        return Err(Error::InvalidConfig(format!(
            "k = {k} must be between 1 and the training size {}",
            train_x.len()
        )));
    }
    let mut order: Vec<(f64, usize)> = train_x
        .iter()
        .enumerate()
        .map(|(i, row)| (squared_distance(row, query), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes: BTreeMap<u32, usize> = BTreeMap::new();
    for &(_, i) in &order[..k] {
        *votes.entry(train_y[i]).or_default() += 1;
    }
    let mut best = (0u32, 0usize);
    for (label, count) in votes {
        if count > best.1 {
            best = (label, count);
        }
    }
    Ok(best.0)
}
