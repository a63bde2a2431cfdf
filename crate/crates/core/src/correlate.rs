// SPDX-License-Identifier: MIT OR Apache-2.0

//! Pearson correlation between actimetric and subjective columns with
//! two-tailed Student-t significance.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, SUBJECTIVE_PREFIX};

/// Subjective columns correlated against actimetric features by default.
pub const CORRELATION_SUBJECTIVE: [&str; 5] = ["bmi_pct", "zsdsi", "debq_restr", "debq_extern", "debq_emo"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stars {
    None,
    One,
    Two,
}

impl Stars {
    pub fn from_p(p: f64) -> Self {
        if p < 0.01 {
            Stars::Two
        } else if p < 0.05 {
            Stars::One
        } else {
            Stars::None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stars::None => "",
            Stars::One => "*",
            Stars::Two => "**",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub r: f64,
    pub n: usize,
    pub p: f64,
    pub stars: Stars,
}

/// Two-tailed p-value of Pearson `r` over `n` pairs.
pub fn pearson_p(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// Sample Pearson correlation over pairs where both values are present.
pub fn pearson_r(x: &[Option<f64>], y: &[Option<f64>]) -> Result<CorrelationCell> {
    if x.len() != y.len() {
        return Err(Error::Schema(format!(
            "correlation inputs differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .collect();
    let n = pairs.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("{n} complete pairs; at least 3 needed")));
    }
    let nf = n as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(a, b) in &pairs {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let p = pearson_p(r, n);
    Ok(CorrelationCell {
        r,
        n,
        p,
        stars: Stars::from_p(p),
    })
}

pub fn pearson_r_complete(x: &[f64], y: &[f64]) -> Result<CorrelationCell> {
    let wrap = |v: &[f64]| v.iter().map(|&a| Some(a)).collect::<Vec<_>>();
    pearson_r(&wrap(x), &wrap(y))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub features: Vec<String>,
    pub subjective: Vec<String>,
    /// `cells[i][j]` pairs `features[i]` with `subjective[j]`; `None` when
    /// the correlation is unavailable (too few pairs or zero variance).
    pub cells: Vec<Vec<Option<CorrelationCell>>>,
}

/// Correlates each selected actimetric column with each subjective column
/// (named without the `subjective.` prefix) using pairwise deletion.
pub fn correlation_table(matrix: &FeatureMatrix, subjective: &[&str], selected: &[String]) -> Result<CorrelationTable> {
    let column = |name: &str| {
        matrix
            .column_index(name)
            .map(|j| matrix.column(j))
            .ok_or_else(|| Error::Dataset(format!("feature `{name}` not in matrix")))
    };
    let feature_cols = selected.iter().map(|s| column(s)).collect::<Result<Vec<_>>>()?;
    let subj_cols = subjective
        .iter()
        .map(|s| column(&format!("{SUBJECTIVE_PREFIX}{s}")))
        .collect::<Result<Vec<_>>>()?;
    let cells = feature_cols
        .par_iter()
        .map(|f| subj_cols.iter().map(|s| pearson_r(f, s).ok()).collect())
        .collect();
    Ok(CorrelationTable {
        features: selected.to_vec(),
        subjective: subjective.iter().map(|s| s.to_string()).collect(),
        cells,
    })
}

fn split_name(name: &str) -> (&str, &str, &str) {
    let mut parts = name.splitn(3, '.');
    let group = parts.next().unwrap_or_default();
    let agg = parts.next().unwrap_or_default();
    (group, agg, parts.next().unwrap_or_default())
}

impl CorrelationTable {
    /// One row per feature (`group,aggregation,method`), one column per
    /// subjective variable. Significant cells print `r` with stars, the
    /// rest `-`, and unavailable cells `NA`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["group".to_string(), "aggregation".into(), "method".into()];
        header.extend(self.subjective.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in self.features.iter().zip(&self.cells) {
            let (g, a, m) = split_name(name);
            let mut rec = vec![g.to_string(), a.to_string(), m.to_string()];
            rec.extend(row.iter().map(|c| match c {
                None => "NA".to_string(),
                Some(c) if c.stars == Stars::None => "-".to_string(),
                Some(c) => format!("{:.3}{}", c.r, c.stars.as_str()),
            }));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<correlation writer>", e))?;
        Ok(())
    }

    /// Long format with every cell's `r`, `n` and `p`.
    pub fn write_long_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["feature", "subjective", "r", "n", "p", "stars"])?;
        for (name, row) in self.features.iter().zip(&self.cells) {
            for (s, c) in self.subjective.iter().zip(row) {
                match c {
                    Some(c) => w.write_record([
                        name.as_str(),
                        s,
                        &c.r.to_string(),
                        &c.n.to_string(),
                        &c.p.to_string(),
                        c.stars.as_str(),
                    ])?,
                    None => w.write_record([name.as_str(), s, "", "", "", ""])?,
                }
            }
        }
        w.flush().map_err(|e| Error::io("<correlation writer>", e))?;
        Ok(())
    }
}
