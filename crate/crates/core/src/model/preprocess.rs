// SPDX-License-Identifier: MIT OR Apache-2.0

//! Mean imputation and min-max scaling, fitted on one matrix and applied to
//! another.

use serde::{Deserialize, Serialize};

pub type Row = Vec<Option<f64>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImputerParams {
    /// Per-column training mean; `None` when the column had no observed
    /// value, in which case it is dropped on transform.
    pub means: Vec<Option<f64>>,
}

impl ImputerParams {
    pub fn fit(train: &[Row]) -> Self {
        let width = train.first().map_or(0, Vec::len);
        let mut sums = vec![0.0; width];
        let mut counts = vec![0usize; width];
        for row in train {
            for (j, v) in row.iter().enumerate() {
                if let Some(v) = v {
                    sums[j] += v;
                    counts[j] += 1;
                }
            }
        }
        let means = sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
            .collect();
        ImputerParams { means }
    }

    pub fn dropped(&self) -> Vec<usize> {
        (0..self.means.len()).filter(|&j| self.means[j].is_none()).collect()
    }

    pub fn transform_row(&self, row: &[Option<f64>]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .filter_map(|(v, mean)| mean.map(|m| v.unwrap_or(m)))
            .collect()
    }

    pub fn transform(&self, rows: &[Row]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

/// Fills missing cells with training-column means. All-missing training
/// columns are dropped from both outputs (see [`ImputerParams::dropped`]).
pub fn impute_mean(train: &[Row], apply_to: &[Row]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, ImputerParams) {
    let params = ImputerParams::fit(train);
    let dropped = params.dropped();
    if !dropped.is_empty() {
        log::warn!("dropping {} feature column(s) with no observed training value", dropped.len());
    }
    (params.transform(train), params.transform(apply_to), params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalerParams {
    pub fn fit(train: &[Vec<f64>]) -> Self {
        let width = train.first().map_or(0, Vec::len);
        let mut min = vec![f64::INFINITY; width];
        let mut max = vec![f64::NEG_INFINITY; width];
        for row in train {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        ScalerParams { min, max }
    }

    /// `(v - min) / (max - min)`; constant columns map to 0. Values outside
    /// the training range are not clipped.
    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                let span = self.max[j] - self.min[j];
                if span > 0.0 {
                    (v - self.min[j]) / span
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

pub fn minmax_scale(train: &[Vec<f64>], apply_to: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, ScalerParams) {
    let params = ScalerParams::fit(train);
    (params.transform(train), params.transform(apply_to), params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[Option<f64>]) -> Vec<Row> {
        v.iter().map(|x| vec![*x]).collect()
    }

    #[test]
    fn imputes_training_mean() {
        let train = col(&[Some(1.0), Some(2.0), None, Some(3.0)]);
        let (t, _, p) = impute_mean(&train, &[]);
        assert_eq!(p.means, vec![Some(2.0)]);
        assert_eq!(t[2], vec![2.0]);
    }

    #[test]
    fn complete_data_is_identity() {
        let train = col(&[Some(1.0), Some(5.0)]);
        let (t, a, _) = impute_mean(&train, &col(&[Some(9.0)]));
        assert_eq!(t, vec![vec![1.0], vec![5.0]]);
        assert_eq!(a, vec![vec![9.0]]);
    }

    #[test]
    fn all_missing_column_dropped() {
        let train = vec![vec![Some(1.0), None], vec![Some(2.0), None]];
        let (t, a, p) = impute_mean(&train, &[vec![None, Some(4.0)]]);
        assert_eq!(p.dropped(), vec![1]);
        assert_eq!(t, vec![vec![1.0], vec![2.0]]);
        assert_eq!(a, vec![vec![1.5]]);
    }

    #[test]
    fn scaling() {
        let (t, _, _) = minmax_scale(&[vec![0.0], vec![5.0], vec![10.0]], &[]);
        assert_eq!(t, vec![vec![0.0], vec![0.5], vec![1.0]]);
        let (t, _, _) = minmax_scale(&[vec![4.0], vec![4.0], vec![4.0]], &[]);
        assert_eq!(t, vec![vec![0.0]; 3]);
        let (_, a, _) = minmax_scale(&[vec![2.0], vec![6.0]], &[vec![8.0]]);
        assert_eq!(a, vec![vec![1.5]]);
    }
}
