// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    Mean,
    Max,
    Min,
    Range,
    Std,
    Variance,
    Cv,
    P1,
    P5,
    P25,
    P50,
    P75,
    P95,
    P99,
}

impl StatKind {
    pub const ALL: [StatKind; 14] = [
        StatKind::Mean,
        StatKind::Max,
        StatKind::Min,
        StatKind::Range,
        StatKind::Std,
        StatKind::Variance,
        StatKind::Cv,
        StatKind::P1,
        StatKind::P5,
        StatKind::P25,
        StatKind::P50,
        StatKind::P75,
        StatKind::P95,
        StatKind::P99,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StatKind::Mean => "mean",
            StatKind::Max => "max",
            StatKind::Min => "min",
            StatKind::Range => "range",
            StatKind::Std => "std",
            StatKind::Variance => "variance",
            StatKind::Cv => "cv",
            StatKind::P1 => "p1",
            StatKind::P5 => "p5",
            StatKind::P25 => "p25",
            StatKind::P50 => "p50",
            StatKind::P75 => "p75",
            StatKind::P95 => "p95",
            StatKind::P99 => "p99",
        }
    }
}

/// Percentile by linear interpolation between closest ranks of sorted data:
/// position `p/100 * (n-1)`.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// The 14 statistics in [`StatKind::ALL`] order. Segments shorter than 2
/// give all-missing; `cv` is missing when the mean is 0.
pub fn stat_features(x: &[f64]) -> [Option<f64>; 14] {
    if x.len() < 2 {
        return [None; 14];
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let variance = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std = variance.sqrt();
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let cv = (mean != 0.0).then(|| std / mean);
    let pct = |p| Some(percentile_sorted(&sorted, p));
    [
        Some(mean),
        Some(max),
        Some(min),
        Some(max - min),
        Some(std),
        Some(variance),
        cv,
        pct(1.0),
        pct(5.0),
        pct(25.0),
        pct(50.0),
        pct(75.0),
        pct(95.0),
        pct(99.0),
    ]
}
