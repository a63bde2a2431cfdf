// SPDX-License-Identifier: MIT OR Apache-2.0

//! Per-participant actimetric feature vectors.
//!
//! Every base method (14 statistics plus five entropies with ten parameter
//! sets each) is evaluated on each segment of a group, giving one value per
//! segment. That per-segment series is reduced by mean and sample standard
//! deviation, for activity and rest separately: 64 x 2 x 2 = 256 features.
//!
//! Canonical names are `<group>.<agg>.<method>[.<paramtag>]`, e.g.
//! `activity.std.max` or `rest.mean.fuzzy_en.m2_r0.2_n2_t1`.

pub mod entropy;
pub mod stats;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use stats::{stat_features, StatKind};

use crate::error::{Error, Result};
use crate::ingest::{SubjectRecord, SUBJECTIVE_FEATURES};
use crate::segmentation::{SegmentKind, Segmentation};

pub const PARAM_SETS_PER_ENTROPY: usize = 10;
pub const BASE_METHOD_COUNT: usize = 14 + 5 * PARAM_SETS_PER_ENTROPY;
pub const ACTIMETRIC_FEATURE_COUNT: usize = BASE_METHOD_COUNT * 2 * 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzyParams {
    pub m: usize,
    /// Tolerance as a fraction of the segment's standard deviation.
    pub r: f64,
    /// Exponent of the exponential membership function.
    pub n: f64,
    pub tau: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistParams {
    pub m: usize,
    pub bins: usize,
}

/// Embedding dimension and delay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedParams {
    pub m: usize,
    pub tau: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseParams {
    pub sectors: usize,
    pub tau: usize,
}

/// The ten parameter sets used for each entropy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyGrids {
    pub fuzzy_en: Vec<FuzzyParams>,
    pub dist_en: Vec<DistParams>,
    pub svd_en: Vec<EmbedParams>,
    pub perm_en: Vec<EmbedParams>,
    pub phase_en: Vec<PhaseParams>,
}

impl Default for EntropyGrids {
    fn default() -> Self {
        let mut fuzzy_en = Vec::new();
        for m in [1, 2] {
            for r in [0.10, 0.15, 0.20, 0.25, 0.30] {
                fuzzy_en.push(FuzzyParams { m, r, n: 2.0, tau: 1 });
            }
        }
        let embed = || {
            let mut v = Vec::new();
            for m in 3..=7 {
                for tau in [1, 2] {
                    v.push(EmbedParams { m, tau });
                }
            }
            v
        };
        let mut dist_en = Vec::new();
        for m in [2, 3] {
            for bins in [64, 128, 256, 512, 1024] {
                dist_en.push(DistParams { m, bins });
            }
        }
        let mut phase_en = Vec::new();
        for sectors in [4, 8, 16, 32, 64] {
            for tau in [1, 2] {
                phase_en.push(PhaseParams { sectors, tau });
            }
        }
        Self {
            fuzzy_en,
            dist_en,
            svd_en: embed(),
            perm_en: embed(),
            phase_en,
        }
    }
}

impl EntropyGrids {
    pub fn validate(&self) -> Result<()> {
        let sizes = [
            ("fuzzy_en", self.fuzzy_en.len()),
            ("dist_en", self.dist_en.len()),
            ("svd_en", self.svd_en.len()),
            ("perm_en", self.perm_en.len()),
            ("phase_en", self.phase_en.len()),
        ];
        for (name, len) in sizes {
            if len != PARAM_SETS_PER_ENTROPY {
                return Err(Error::InvalidConfig(format!(
                    "{name} grid has {len} parameter sets; expected {PARAM_SETS_PER_ENTROPY}"
                )));
            }
        }
        let bad = |what: &str| Err(Error::InvalidConfig(format!("invalid {what} parameters")));
        if self
            .fuzzy_en
            .iter()
            .any(|p| p.m < 1 || p.tau < 1 || !(p.r > 0.0) || !(p.n > 0.0))
        {
            return bad("fuzzy_en");
        }
        if self.dist_en.iter().any(|p| p.m < 1 || p.bins < 2) {
            return bad("dist_en");
        }
        if self.svd_en.iter().chain(&self.perm_en).any(|p| p.m < 1 || p.tau < 1) {
            return bad("svd_en/perm_en");
        }
        if self.phase_en.iter().any(|p| p.sectors < 2 || p.tau < 1) {
            return bad("phase_en");
        }
        let names: std::collections::BTreeSet<String> =
            base_methods(self).iter().map(Method::name).collect();
        if names.len() != BASE_METHOD_COUNT {
            return Err(Error::InvalidConfig("entropy grids contain duplicate parameter sets".into()));
        }
        Ok(())
    }
}

/// A base method: one statistic or one entropy with one parameter set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Stat(StatKind),
    FuzzyEn(FuzzyParams),
    DistEn(DistParams),
    SvdEn(EmbedParams),
    PermEn(EmbedParams),
    PhaseEn(PhaseParams),
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::Stat(k) => k.name().to_string(),
            Method::FuzzyEn(p) => format!("fuzzy_en.m{}_r{}_n{}_t{}", p.m, p.r, p.n, p.tau),
            Method::DistEn(p) => format!("dist_en.m{}_b{}", p.m, p.bins),
            Method::SvdEn(p) => format!("svd_en.m{}_t{}", p.m, p.tau),
            Method::PermEn(p) => format!("perm_en.m{}_t{}", p.m, p.tau),
            Method::PhaseEn(p) => format!("phase_en.k{}_t{}", p.sectors, p.tau),
        }
    }

    pub fn compute(&self, x: &[f64]) -> Option<f64> {
        match *self {
            Method::Stat(k) => {
                let idx = StatKind::ALL.iter().position(|s| *s == k).expect("listed");
                stat_features(x)[idx]
            }
            Method::FuzzyEn(p) => entropy::fuzzy_entropy(x, p.m, p.r, p.n, p.tau),
            Method::DistEn(p) => entropy::dist_entropy(x, p.m, p.bins),
            Method::SvdEn(p) => entropy::svd_entropy(x, p.m, p.tau),
            Method::PermEn(p) => entropy::perm_entropy(x, p.m, p.tau),
            Method::PhaseEn(p) => entropy::phase_entropy(x, p.sectors, p.tau),
        }
    }
}

/// The 64 base methods in a fixed order: statistics, then each entropy grid.
pub fn base_methods(grids: &EntropyGrids) -> Vec<Method> {
    let mut v: Vec<Method> = StatKind::ALL.iter().map(|&k| Method::Stat(k)).collect();
    v.extend(grids.fuzzy_en.iter().map(|&p| Method::FuzzyEn(p)));
    v.extend(grids.dist_en.iter().map(|&p| Method::DistEn(p)));
    v.extend(grids.svd_en.iter().map(|&p| Method::SvdEn(p)));
    v.extend(grids.perm_en.iter().map(|&p| Method::PermEn(p)));
    v.extend(grids.phase_en.iter().map(|&p| Method::PhaseEn(p)));
    v
}

/// Evaluates every base method on one segment, in [`base_methods`] order.
/// Fuzzy and distribution entropies sharing an embedding reuse one
/// distance pass.
pub fn compute_base_methods(x: &[f64], grids: &EntropyGrids) -> Vec<Option<f64>> {
    let mut out: Vec<Option<f64>> = stat_features(x).to_vec();

    let mut fuzzy = vec![None; grids.fuzzy_en.len()];
    let mut groups: BTreeMap<(usize, usize, u64), Vec<usize>> = BTreeMap::new();
    for (i, p) in grids.fuzzy_en.iter().enumerate() {
        groups.entry((p.m, p.tau, p.n.to_bits())).or_default().push(i);
    }
    for ((m, tau, n_bits), idx) in groups {
        let rs: Vec<f64> = idx.iter().map(|&i| grids.fuzzy_en[i].r).collect();
        let vals = entropy::fuzzy_entropy_multi(x, m, &rs, f64::from_bits(n_bits), tau);
        for (i, v) in idx.into_iter().zip(vals) {
            fuzzy[i] = v;
        }
    }
    out.extend(fuzzy);

    let mut dist = vec![None; grids.dist_en.len()];
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, p) in grids.dist_en.iter().enumerate() {
        groups.entry(p.m).or_default().push(i);
    }
    for (m, idx) in groups {
        let bins: Vec<usize> = idx.iter().map(|&i| grids.dist_en[i].bins).collect();
        for (i, v) in idx.into_iter().zip(entropy::dist_entropy_multi(x, m, &bins)) {
            dist[i] = v;
        }
    }
    out.extend(dist);

    out.extend(grids.svd_en.iter().map(|p| entropy::svd_entropy(x, p.m, p.tau)));
    out.extend(grids.perm_en.iter().map(|p| entropy::perm_entropy(x, p.m, p.tau)));
    out.extend(grids.phase_en.iter().map(|p| entropy::phase_entropy(x, p.sectors, p.tau)));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Mean,
    Std,
}

impl Aggregation {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::Mean => "mean",
            Aggregation::Std => "std",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub group: SegmentKind,
    pub aggregation: Aggregation,
    pub method: Method,
}

impl FeatureSpec {
    pub fn name(&self) -> String {
        format!(
            "{}.{}.{}",
            self.group.as_str(),
            self.aggregation.as_str(),
            self.method.name()
        )
    }
}

/// All 256 actimetric feature specs, sorted by canonical name.
pub fn feature_layout(grids: &EntropyGrids) -> Vec<FeatureSpec> {
    let mut specs = Vec::with_capacity(ACTIMETRIC_FEATURE_COUNT);
    for group in [SegmentKind::Activity, SegmentKind::Rest] {
        for aggregation in [Aggregation::Mean, Aggregation::Std] {
            for method in base_methods(grids) {
                specs.push(FeatureSpec {
                    group,
                    aggregation,
                    method,
                });
            }
        }
    }
    specs.sort_by_key(FeatureSpec::name);
    specs
}

/// Method values for every segment of `group`, in temporal order. Missing
/// values are dropped; the second element counts them.
pub fn per_segment_series(seg: &Segmentation, group: SegmentKind, method: &Method) -> (Vec<f64>, usize) {
    let mut ts = Vec::new();
    let mut dropped = 0;
    for s in seg.of_kind(group) {
        match method.compute(seg.values(s)) {
            Some(v) => ts.push(v),
            None => dropped += 1,
        }
    }
    (ts, dropped)
}

/// Mean and sample standard deviation. A single value has std 0; an empty
/// series gives both missing.
pub fn aggregate(ts: &[f64]) -> (Option<f64>, Option<f64>) {
    match ts.len() {
        0 => (None, None),
        1 => (Some(ts[0]), Some(0.0)),
        n => {
            let mean = ts.iter().sum::<f64>() / n as f64;
            let var = ts.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (Some(mean), Some(var.sqrt()))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub participant_id: String,
    /// Sorted by name.
    pub entries: Vec<(String, Option<f64>)>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<Option<f64>> {
        self.entries
            .binary_search_by(|(n, _)| n.as_str().cmp(name))
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn extract_all(seg: &Segmentation, grids: &EntropyGrids) -> FeatureVector {
    let methods = base_methods(grids);
    let mut entries = Vec::with_capacity(ACTIMETRIC_FEATURE_COUNT);
    for group in [SegmentKind::Activity, SegmentKind::Rest] {
        let per_segment: Vec<Vec<Option<f64>>> = seg
            .of_kind(group)
            .map(|s| compute_base_methods(seg.values(s), grids))
            .collect();
        for (i, method) in methods.iter().enumerate() {
            let ts: Vec<f64> = per_segment.iter().filter_map(|row| row[i]).collect();
            let dropped = per_segment.len() - ts.len();
            if dropped > 0 {
                log::debug!(
                    "{}: {dropped} {} segment(s) too short for {}",
                    seg.participant_id,
                    group.as_str(),
                    method.name()
                );
            }
            let (mean, std) = aggregate(&ts);
            for (aggregation, value) in [(Aggregation::Mean, mean), (Aggregation::Std, std)] {
                let spec = FeatureSpec {
                    group,
                    aggregation,
                    method: *method,
                };
                entries.push((spec.name(), value));
            }
        }
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    FeatureVector {
        participant_id: seg.participant_id.clone(),
        entries,
    }
}

/// Extracts every participant's vector; output order follows the input.
pub fn extract_dataset(segmentations: &[Segmentation], grids: &EntropyGrids) -> Vec<FeatureVector> {
    segmentations
        .par_iter()
        .map(|s| extract_all(s, grids))
        .collect()
}

/// Feature groups used to restrict model inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GroupFilter {
    Activity,
    Rest,
    Both,
    Subjective,
    #[default]
    All,
}

impl GroupFilter {
    pub fn matches(self, name: &str) -> bool {
        let activity = name.starts_with("activity.");
        let rest = name.starts_with("rest.");
        let subjective = name.starts_with(SUBJECTIVE_PREFIX);
        match self {
            GroupFilter::Activity => activity,
            GroupFilter::Rest => rest,
            GroupFilter::Both => activity || rest,
            GroupFilter::Subjective => subjective,
            GroupFilter::All => true,
        }
    }
}

impl std::str::FromStr for GroupFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "activity" => Ok(GroupFilter::Activity),
            "rest" => Ok(GroupFilter::Rest),
            "both" => Ok(GroupFilter::Both),
            "subjective" => Ok(GroupFilter::Subjective),
            "all" => Ok(GroupFilter::All),
            _ => Err(Error::InvalidConfig(format!("unknown feature group `{s}`"))),
        }
    }
}

pub const SUBJECTIVE_PREFIX: &str = "subjective.";

/// Participants x named features, `None` for missing cells.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub names: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl FeatureMatrix {
    pub fn from_vectors(vectors: &[FeatureVector]) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Ok(FeatureMatrix {
                ids: Vec::new(),
                names: Vec::new(),
                rows: Vec::new(),
            });
        };
        let names: Vec<String> = first.entries.iter().map(|(n, _)| n.clone()).collect();
        let mut rows = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.entries.len() != names.len() || v.entries.iter().zip(&names).any(|((a, _), b)| a != b) {
                return Err(Error::Schema(format!(
                    "feature vector of `{}` has a different layout",
                    v.participant_id
                )));
            }
            rows.push(v.entries.iter().map(|(_, x)| *x).collect());
        }
        Ok(FeatureMatrix {
            ids: vectors.iter().map(|v| v.participant_id.clone()).collect(),
            names,
            rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, j: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Appends `subjective.<name>` columns taken from matching subject
    /// records.
    pub fn with_subjective(mut self, subjects: &[SubjectRecord]) -> Result<Self> {
        let by_id: BTreeMap<&str, &SubjectRecord> =
            subjects.iter().map(|s| (s.participant_id.as_str(), s)).collect();
        for (id, row) in self.ids.iter().zip(&mut self.rows) {
            let s = by_id
                .get(id.as_str())
                .ok_or_else(|| Error::Dataset(format!("no subject record for `{id}`")))?;
            row.extend(SUBJECTIVE_FEATURES.iter().map(|f| s.subjective(f)));
        }
        self.names
            .extend(SUBJECTIVE_FEATURES.iter().map(|f| format!("{SUBJECTIVE_PREFIX}{f}")));
        Ok(self)
    }

    /// Columns accepted by `filter`, in name order.
    pub fn columns_matching(&self, filter: GroupFilter) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.names.len())
            .filter(|&j| filter.matches(&self.names[j]))
            .collect();
        idx.sort_by(|&a, &b| self.names[a].cmp(&self.names[b]));
        idx
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["participant_id".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (id, row) in self.ids.iter().zip(&self.rows) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| v.map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<feature writer>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("participant_id") {
            return Err(Error::Schema("feature CSV must start with `participant_id`".into()));
        }
        let names: Vec<String> = headers.iter().skip(1).map(String::from).collect();
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            ids.push(rec.get(0).unwrap_or_default().to_string());
            let row = rec
                .iter()
                .skip(1)
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>()
                            .map(Some)
                            .map_err(|_| Error::format(line, format!("bad feature value {c:?}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(FeatureMatrix { ids, names, rows })
    }
}
