// SPDX-License-Identifier: MIT OR Apache-2.0

//! Entropy estimators over a single segment.
//!
//! Every estimator returns `None` when the segment is too short for its
//! embedding, and a value normalized to its maximum where one exists.

use std::f64::consts::TAU;

fn sample_sd(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// `-sum p ln p` over the non-zero counts.
fn shannon(counts: impl IntoIterator<Item = usize>, total: usize) -> f64 {
    let total = total as f64;
    counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

fn factorial(m: usize) -> usize {
    (1..=m).product()
}

/// Normalized permutation entropy (natural log, divided by `ln(m!)`).
///
/// Ordinal patterns come from a stable sort, so tied values are ranked in
/// order of occurrence.
pub fn perm_entropy(x: &[f64], m: usize, tau: usize) -> Option<f64> {
    if m == 0 || tau == 0 {
        return None;
    }
    let span = (m - 1) * tau;
    if x.len() < span + 2 {
        return None;
    }
    if m == 1 {
        return Some(0.0);
    }
    let windows = x.len() - span;
    let mut counts = vec![0usize; factorial(m)];
    let mut order = vec![0usize; m];
    let mut weights = vec![0usize; m];
    for (k, w) in weights.iter_mut().enumerate() {
        *w = factorial(m - 1 - k);
    }
    for i in 0..windows {
        for (k, o) in order.iter_mut().enumerate() {
            *o = k;
        }
        // insertion sort is stable and m is tiny
        for a in 1..m {
            let mut b = a;
            while b > 0 && x[i + order[b - 1] * tau] > x[i + order[b] * tau] {
                order.swap(b - 1, b);
                b -= 1;
            }
        }
        // Lehmer code of `order`
        let mut code = 0;
        for a in 0..m {
            let smaller_after = order[a + 1..].iter().filter(|&&o| o < order[a]).count();
            code += smaller_after * weights[a];
        }
        counts[code] += 1;
    }
    Some(shannon(counts, windows) / (factorial(m) as f64).ln())
}

/// Mean-centered delay templates of length `m`, starting at `0..count`.
fn centered_templates(x: &[f64], m: usize, tau: usize, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count * m);
    for i in 0..count {
        let start = out.len();
        out.extend((0..m).map(|k| x[i + k * tau]));
        let mean = out[start..].iter().sum::<f64>() / m as f64;
        for v in &mut out[start..] {
            *v -= mean;
        }
    }
    out
}

fn chebyshev(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

/// Fuzzy entropy for several tolerances sharing one distance pass.
///
/// Templates of length `m` and `m + 1` are taken at the same `N - m*tau`
/// start positions and mean-centered. Similarity is
/// `exp(-(d / r_abs)^n)` with Chebyshev distance `d` and
/// `r_abs = r * sd(x)`. The result is `ln(phi_m) - ln(phi_{m+1})`.
pub fn fuzzy_entropy_multi(x: &[f64], m: usize, rs: &[f64], n: f64, tau: usize) -> Vec<Option<f64>> {
    if m == 0 || tau == 0 || x.len() < m * tau + 2 {
        return vec![None; rs.len()];
    }
    let sd = sample_sd(x);
    if !(sd > 0.0) {
        return vec![Some(0.0); rs.len()];
    }
    let count = x.len() - m * tau;
    let short = centered_templates(x, m, tau, count);
    let long = centered_templates(x, m + 1, tau, count);
    let inv_r: Vec<f64> = rs.iter().map(|r| 1.0 / (r * sd)).collect();
    let mut phi_m = vec![0.0; rs.len()];
    let mut phi_m1 = vec![0.0; rs.len()];
    let squared = n == 2.0;
    for i in 0..count {
        let ti = &short[i * m..(i + 1) * m];
        let li = &long[i * (m + 1)..(i + 1) * (m + 1)];
        for j in i + 1..count {
            let d_m = chebyshev(ti, &short[j * m..(j + 1) * m]);
            let d_m1 = chebyshev(li, &long[j * (m + 1)..(j + 1) * (m + 1)]);
            for (k, &ir) in inv_r.iter().enumerate() {
                let (a, b) = (d_m * ir, d_m1 * ir);
                if squared {
                    phi_m[k] += (-(a * a)).exp();
                    phi_m1[k] += (-(b * b)).exp();
                } else {
                    phi_m[k] += (-a.powf(n)).exp();
                    phi_m1[k] += (-b.powf(n)).exp();
                }
            }
        }
    }
    // the common 2 / (count * (count - 1)) factor cancels in the log ratio
    phi_m
        .iter()
        .zip(&phi_m1)
        .map(|(&a, &b)| (a > 0.0 && b > 0.0).then(|| a.ln() - b.ln()))
        .collect()
}

pub fn fuzzy_entropy(x: &[f64], m: usize, r: f64, n: f64, tau: usize) -> Option<f64> {
    fuzzy_entropy_multi(x, m, &[r], n, tau)[0]
}

/// Normalized Shannon entropy (log2 / log2(bins)) of a histogram of values
/// over `bins` equal-width bins spanning `[min, max]`. Returns 0 when all
/// values coincide.
pub fn histogram_entropy(values: &[f64], bins: usize) -> f64 {
    if values.is_empty() || bins < 2 {
        return 0.0;
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(hi > lo) {
        return 0.0;
    }
    let scale = bins as f64 / (hi - lo);
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - lo) * scale) as usize).min(bins - 1);
        counts[b] += 1;
    }
    shannon(counts, values.len()) / (bins as f64).ln()
}

/// Distribution entropy for several bin counts sharing one distance pass.
///
/// Chebyshev distances between all pairs of the `N - m + 1` length-`m`
/// templates are histogrammed; see [`histogram_entropy`].
pub fn dist_entropy_multi(x: &[f64], m: usize, bins: &[usize]) -> Vec<Option<f64>> {
    if m == 0 || x.len() < m + 1 {
        return vec![None; bins.len()];
    }
    let count = x.len() - m + 1;
    let mut d = Vec::with_capacity(count * (count - 1) / 2);
    for i in 0..count {
        let a = &x[i..i + m];
        for j in i + 1..count {
            d.push(chebyshev(a, &x[j..j + m]));
        }
    }
    bins.iter().map(|&b| Some(histogram_entropy(&d, b))).collect()
}

pub fn dist_entropy(x: &[f64], m: usize, bins: usize) -> Option<f64> {
    dist_entropy_multi(x, m, &[bins])[0]
}

/// Singular values of a column-major `rows x cols` matrix by one-sided
/// (Hestenes) Jacobi rotations.
pub fn singular_values(mut a: Vec<f64>, rows: usize, cols: usize) -> Vec<f64> {
    const MAX_SWEEPS: usize = 60;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (cp, cq) = (p * rows, q * rows);
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..rows {
                    let (u, v) = (a[cp + i], a[cq + i]);
                    alpha += u * u;
                    beta += v * v;
                    gamma += u * v;
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let (u, v) = (a[cp + i], a[cq + i]);
                    a[cp + i] = c * u - s * v;
                    a[cq + i] = s * u + c * v;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (0..cols)
        .map(|c| a[c * rows..(c + 1) * rows].iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect()
}

/// Normalized SVD entropy (natural log, divided by `ln(m)`) of the delay
/// embedding with `m` columns and delay `tau`.
pub fn svd_entropy(x: &[f64], m: usize, tau: usize) -> Option<f64> {
    if m == 0 || tau == 0 || x.len() < (m - 1) * tau + 1 {
        return None;
    }
    if m == 1 {
        return Some(0.0);
    }
    let rows = x.len() - (m - 1) * tau;
    let mut a = Vec::with_capacity(rows * m);
    for k in 0..m {
        a.extend_from_slice(&x[k * tau..k * tau + rows]);
    }
    let sv = singular_values(a, rows, m);
    let total: f64 = sv.iter().sum();
    if !(total > 0.0) {
        return Some(0.0);
    }
    let h: f64 = sv
        .iter()
        .filter(|&&s| s > 0.0)
        .map(|s| {
            let p = s / total;
            -p * p.ln()
        })
        .sum();
    Some(h / (m as f64).ln())
}

/// Normalized phase entropy: angular distribution of second-order
/// difference plot points `(x[k+tau] - x[k], x[k+2tau] - x[k+tau])` over
/// `sectors` equal sectors, natural log divided by `ln(sectors)`. Points at
/// the origin are skipped.
pub fn phase_entropy(x: &[f64], sectors: usize, tau: usize) -> Option<f64> {
    if sectors < 2 || tau == 0 || x.len() < 2 * tau + 1 {
        return None;
    }
    let width = TAU / sectors as f64;
    let mut counts = vec![0usize; sectors];
    let mut total = 0;
    for k in 0..x.len() - 2 * tau {
        let dx = x[k + tau] - x[k];
        let dy = x[k + 2 * tau] - x[k + tau];
        if dx == 0.0 && dy == 0.0 {
            continue;
        }
        let mut angle = dy.atan2(dx);
        if angle < 0.0 {
            angle += TAU;
        }
        let s = ((angle / width) as usize).min(sectors - 1);
        counts[s] += 1;
        total += 1;
    }
    if total == 0 {
        return Some(0.0);
    }
    Some(shannon(counts, total) / (sectors as f64).ln())
}
