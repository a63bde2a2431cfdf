// SPDX-License-Identifier: MIT OR Apache-2.0

//! Brute-force reference implementations used by several test targets.

#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Random walk with occasional level jumps, so templates are not all
/// distinct by accident.
pub fn segment_like(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut level: f64 = rng.random_range(0.0..200.0);
    (0..n)
        .map(|_| {
            if rng.random::<f64>() < 0.02 {
                level = rng.random_range(0.0..200.0);
            }
            let z: f64 = StandardNormal.sample(rng);
            (level + 15.0 * z).max(0.0)
        })
        .collect()
}

fn entropy_of_counts<'a>(counts: impl Iterator<Item = &'a usize>, total: f64) -> f64 {
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.ln();
        }
    }
    h
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|v| v as f64).product()
}

pub fn perm_entropy(x: &[f64], m: usize, tau: usize) -> Option<f64> {
    let span = (m - 1) * tau;
    if x.len() < span + 2 {
        return None;
    }
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    let windows = x.len() - span;
    for i in 0..windows {
        let w: Vec<f64> = (0..m).map(|k| x[i + k * tau]).collect();
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap());
        *counts.entry(idx).or_default() += 1;
    }
    Some(entropy_of_counts(counts.values(), windows as f64) / factorial(m).ln())
}

fn sd(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

pub fn fuzzy_entropy(x: &[f64], m: usize, r: f64, n: f64, tau: usize) -> Option<f64> {
    if x.len() < m * tau + 2 {
        return None;
    }
    let count = x.len() - m * tau;
    let tol = r * sd(x);
    let phi = |len: usize| {
        let templates: Vec<Vec<f64>> = (0..count)
            .map(|i| {
                let t: Vec<f64> = (0..len).map(|k| x[i + k * tau]).collect();
                let mean = t.iter().sum::<f64>() / len as f64;
                t.iter().map(|v| v - mean).collect()
            })
            .collect();
        let mut total = 0.0;
        for i in 0..count {
            for j in 0..count {
                if i == j {
                    continue;
                }
                let d = (0..len)
                    .map(|k| (templates[i][k] - templates[j][k]).abs())
                    .fold(0.0, f64::max);
                total += (-(d / tol).powf(n)).exp();
            }
        }
        total / (count * (count - 1)) as f64
    };
    Some(phi(m).ln() - phi(m + 1).ln())
}

fn histogram_entropy(values: &[f64], bins: usize) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return 0.0;
    }
    let mut counts = vec![0usize; bins];
    for &v in values {
        let mut b = ((v - lo) / (hi - lo) * bins as f64).floor() as usize;
        if b == bins {
            b -= 1;
        }
        counts[b] += 1;
    }
    entropy_of_counts(counts.iter(), values.len() as f64) / (bins as f64).ln()
}

pub fn dist_entropy(x: &[f64], m: usize, bins: usize) -> Option<f64> {
    if x.len() < m + 1 {
        return None;
    }
    let count = x.len() - m + 1;
    let mut d = Vec::new();
    for i in 0..count {
        for j in 0..count {
            if i < j {
                d.push((0..m).map(|k| (x[i + k] - x[j + k]).abs()).fold(0.0, f64::max));
            }
        }
    }
    Some(histogram_entropy(&d, bins))
}

pub fn svd_entropy(x: &[f64], m: usize, tau: usize) -> Option<f64> {
    if x.len() < (m - 1) * tau + 1 {
        return None;
    }
    let rows = x.len() - (m - 1) * tau;
    let a = nalgebra::DMatrix::from_fn(rows, m, |i, k| x[i + k * tau]);
    let sv = a.singular_values();
    let total: f64 = sv.iter().sum();
    if total <= 0.0 {
        return Some(0.0);
    }
    let h: f64 = sv
        .iter()
        .filter(|&&s| s > 0.0)
        .map(|s| -(s / total) * (s / total).ln())
        .sum();
    Some(h / (m as f64).ln())
}

pub fn phase_entropy(x: &[f64], sectors: usize, tau: usize) -> Option<f64> {
    if x.len() < 2 * tau + 1 {
        return None;
    }
    let mut counts = vec![0usize; sectors];
    let mut total = 0usize;
    for k in 0..x.len() - 2 * tau {
        let u = x[k + tau] - x[k];
        let v = x[k + 2 * tau] - x[k + tau];
        if u == 0.0 && v == 0.0 {
            continue;
        }
        let theta = v.atan2(u).rem_euclid(2.0 * PI);
        let s = ((theta * sectors as f64 / (2.0 * PI)).floor() as usize).min(sectors - 1);
        counts[s] += 1;
        total += 1;
    }
    if total == 0 {
        return Some(0.0);
    }
    Some(entropy_of_counts(counts.iter(), total as f64) / (sectors as f64).ln())
}

/// Exact minimizer of `sum cost(segment) + penalty * (#segments)` by
/// optimal-partitioning DP over the full Gram matrix. Returns segment ends
/// (the last is `n`).
pub fn cpd_dp(x: &[f64], rbf_bandwidth: Option<f64>, penalty: f64) -> Vec<usize> {
    let n = x.len();
    let k = |i: usize, j: usize| match rbf_bandwidth {
        Some(h) => (-(x[i] - x[j]).powi(2) / (2.0 * h * h)).exp(),
        None => x[i] * x[j],
    };
    // p[i][j] = sum of K over [0,i) x [0,j)
    let w = n + 1;
    let mut p = vec![0.0f64; w * w];
    for i in 1..=n {
        for j in 1..=n {
            p[i * w + j] = k(i - 1, j - 1) + p[(i - 1) * w + j] + p[i * w + j - 1] - p[(i - 1) * w + j - 1];
        }
    }
    let block = |s: usize, e: usize| p[e * w + e] - p[s * w + e] - p[e * w + s] + p[s * w + s];
    let diag: Vec<f64> = {
        let mut d = vec![0.0; n + 1];
        for i in 0..n {
            d[i + 1] = d[i] + k(i, i);
        }
        d
    };
    let cost = |s: usize, e: usize| (diag[e] - diag[s]) - block(s, e) / (e - s) as f64;
    let mut f = vec![0.0f64; n + 1];
    let mut prev = vec![0usize; n + 1];
    for e in 1..=n {
        let mut best = f64::INFINITY;
        for (s, fs) in f[..e].iter().enumerate() {
            let v = fs + cost(s, e) + penalty;
            if v < best {
                best = v;
                prev[e] = s;
            }
        }
        f[e] = best;
    }
    let mut ends = Vec::new();
    let mut e = n;
    while e > 0 {
        ends.push(e);
        e = prev[e];
    }
    ends.reverse();
    ends
}

/// Objective value of a segmentation under the same cost.
pub fn cpd_objective(x: &[f64], ends: &[usize], rbf_bandwidth: Option<f64>, penalty: f64) -> f64 {
    let mut total = 0.0;
    let mut s = 0;
    for &e in ends {
        let seg = &x[s..e];
        let len = seg.len() as f64;
        let mut diag = 0.0;
        let mut block = 0.0;
        for (i, &a) in seg.iter().enumerate() {
            for (j, &b) in seg.iter().enumerate() {
                let kv = match rbf_bandwidth {
                    Some(h) => (-(a - b).powi(2) / (2.0 * h * h)).exp(),
                    None => a * b,
                };
                block += kv;
                if i == j {
                    diag += kv;
                }
            }
        }
        total += diag - block / len + penalty;
        s = e;
    }
    total
}

/// Two-tailed Student-t p-value for integer degrees of freedom via the
/// closed-form finite series for the t CDF.
pub fn t_two_tailed(t: f64, df: usize) -> f64 {
    let nu = df as f64;
    let theta = (t.abs() / nu.sqrt()).atan();
    let (s, c) = theta.sin_cos();
    // A(t|nu) = P(|T| < t)
    let a = if df % 2 == 1 {
        let mut sum = 0.0;
        if df > 1 {
            let mut term = c;
            sum = term;
            let mut k = 3.0;
            while k <= nu - 2.0 + 1e-9 {
                term *= (k - 1.0) / k * c * c;
                sum += term;
                k += 2.0;
            }
        }
        2.0 / PI * (theta + s * sum)
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 2.0;
        while k <= nu - 2.0 + 1e-9 {
            term *= (k - 1.0) / k * c * c;
            sum += term;
            k += 2.0;
        }
        s * sum
    };
    1.0 - a
}

/// Pearson r by the two-pass textbook formula and its two-tailed p.
pub fn pearson(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r = cov / (vx * vy).sqrt();
    let df = x.len() - 2;
    let t = r * (df as f64 / (1.0 - r * r)).sqrt();
    (r, t_two_tailed(t, df))
}
