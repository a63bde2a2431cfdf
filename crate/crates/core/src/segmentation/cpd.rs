// SPDX-License-Identifier: MIT OR Apache-2.0

//! Penalized kernel change-point detection.
//!
//! Minimizes `sum(segment cost) + penalty * (#segments - 1)` exactly with
//! PELT pruning. The segment cost is the kernel variance criterion
//! `sum_i k(x_i, x_i) - (1/len) * sum_{i,j} k(x_i, x_j)`.
//!
//! For the RBF kernel the Gram block sums are carried incrementally for every
//! live candidate start, so memory stays O(n) and time is O(n * L) where L
//! is the span of live candidates (O(n^2) worst case).

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CpdKernel {
    #[default]
    Rbf,
    Linear,
}

/// RBF bandwidth `h` in `k(a, b) = exp(-(a - b)^2 / (2 h^2))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Median of pairwise absolute differences (over at most
    /// [`MEDIAN_SAMPLE`] evenly spaced points). Falls back to the sample
    /// standard deviation when that median is 0, then to 1.
    #[default]
    MedianHeuristic,
    Fixed(f64),
}

pub const MEDIAN_SAMPLE: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpdConfig {
    pub kernel: CpdKernel,
    pub penalty: f64,
    pub bandwidth: Bandwidth,
}

pub const DEFAULT_PENALTY: f64 = 100.0;

impl Default for CpdConfig {
    fn default() -> Self {
        Self {
            kernel: CpdKernel::Rbf,
            penalty: DEFAULT_PENALTY,
            bandwidth: Bandwidth::MedianHeuristic,
        }
    }
}

/// Resolves the RBF bandwidth for `x`.
pub fn resolve_bandwidth(x: &[f64], bw: Bandwidth) -> f64 {
    match bw {
        Bandwidth::Fixed(h) => h,
        Bandwidth::MedianHeuristic => {
            let n = x.len();
            let m = n.min(MEDIAN_SAMPLE);
            if m < 2 {
                return 1.0;
            }
            let pts: Vec<f64> = (0..m).map(|i| x[i * n / m]).collect();
            let mut d = Vec::with_capacity(m * (m - 1) / 2);
            for i in 0..m {
                for j in i + 1..m {
                    d.push((pts[i] - pts[j]).abs());
                }
            }
            let mid = d.len() / 2;
            let (_, med, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
            if *med > 0.0 {
                return *med;
            }
            let mean = x.iter().sum::<f64>() / n as f64;
            let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        }
    }
}

/// Ordered breakpoints (exclusive segment ends). Never contains 0; always
/// ends with `x.len()` for non-empty input.
pub fn detect_change_points(x: &[f64], cfg: &CpdConfig) -> Vec<usize> {
    if x.is_empty() {
        return Vec::new();
    }
    let penalty = cfg.penalty.max(0.0);
    match cfg.kernel {
        CpdKernel::Linear => pelt_linear(x, penalty),
        CpdKernel::Rbf => {
            let h = resolve_bandwidth(x, cfg.bandwidth);
            pelt_rbf(x, 1.0 / (2.0 * h * h), penalty)
        }
    }
}

fn backtrack(last: &[usize]) -> Vec<usize> {
    let mut bps = Vec::new();
    let mut e = last.len() - 1;
    while e > 0 {
        bps.push(e);
        e = last[e];
    }
    bps.reverse();
    bps
}

fn prune_slack(f: f64) -> f64 {
    1e-9 * f.abs().max(1.0)
}

fn pelt_rbf(x: &[f64], gamma: f64, penalty: f64) -> Vec<usize> {
    let n = x.len();
    let mut best = vec![0.0; n + 1];
    best[0] = -penalty;
    let mut last = vec![0usize; n + 1];
    // live candidate starts, ascending, with their Gram block sum over [s, e)
    let mut cands: Vec<usize> = vec![0];
    let mut block: Vec<f64> = vec![0.0];

    for e in 1..=n {
        let p = e - 1;
        let xp = x[p];
        // S(s, e) = S(s, e-1) + 2 * sum_{i=s}^{p-1} k(x_i, x_p) + 1
        let mut suffix = 0.0;
        let mut i = p;
        for j in (0..cands.len()).rev() {
            let s = cands[j];
            while i > s {
                i -= 1;
                let d = x[i] - xp;
                suffix += (-gamma * d * d).exp();
            }
            block[j] += 2.0 * suffix + 1.0;
        }

        let mut f_e = f64::INFINITY;
        let mut arg = 0;
        for (j, &s) in cands.iter().enumerate() {
            let len = (e - s) as f64;
            let v = best[s] + (len - block[j] / len) + penalty;
            if v < f_e {
                f_e = v;
                arg = s;
            }
        }
        best[e] = f_e;
        last[e] = arg;

        let limit = f_e + prune_slack(f_e);
        let mut w = 0;
        for j in 0..cands.len() {
            let s = cands[j];
            let len = (e - s) as f64;
            if best[s] + (len - block[j] / len) <= limit {
                cands[w] = s;
                block[w] = block[j];
                w += 1;
            }
        }
        cands.truncate(w);
        block.truncate(w);
        cands.push(e);
        block.push(0.0);
    }
    backtrack(&last)
}

fn pelt_linear(x: &[f64], penalty: f64) -> Vec<usize> {
    let n = x.len();
    let mut s1 = vec![0.0; n + 1];
    let mut s2 = vec![0.0; n + 1];
    for (i, v) in x.iter().enumerate() {
        s1[i + 1] = s1[i] + v;
        s2[i + 1] = s2[i] + v * v;
    }
    let cost = |s: usize, e: usize| {
        let len = (e - s) as f64;
        let a = s1[e] - s1[s];
        ((s2[e] - s2[s]) - a * a / len).max(0.0)
    };
    let mut best = vec![0.0; n + 1];
    best[0] = -penalty;
    let mut last = vec![0usize; n + 1];
    let mut cands: Vec<usize> = vec![0];
    for e in 1..=n {
        let mut f_e = f64::INFINITY;
        let mut arg = 0;
        for &s in &cands {
            let v = best[s] + cost(s, e) + penalty;
            if v < f_e {
                f_e = v;
                arg = s;
            }
        }
        best[e] = f_e;
        last[e] = arg;
        let limit = f_e + prune_slack(f_e);
        cands.retain(|&s| best[s] + cost(s, e) <= limit);
        cands.push(e);
    }
    backtrack(&last)
}
