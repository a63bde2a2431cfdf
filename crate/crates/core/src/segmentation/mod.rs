// SPDX-License-Identifier: MIT OR Apache-2.0

//! Activity/rest segmentation of a minute-resolution actigram.
//!
//! Pipeline: splice out gaps and over-long zero runs, smooth with a centered
//! moving average, run penalized kernel change-point detection, label each
//! piece against a median-proportional threshold, then merge into a strictly
//! alternating activity/rest sequence.

pub mod cpd;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use cpd::{detect_change_points, Bandwidth, CpdConfig, CpdKernel};

use crate::error::{Error, Result};
use crate::ingest::ActigramSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdBasis {
    #[default]
    Smoothed,
    Raw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationConfig {
    /// Moving-average window, minutes.
    pub smoothing_window: usize,
    /// Zero runs longer than this many minutes are removed.
    pub max_inactivity: usize,
    pub threshold_factor: f64,
    pub threshold_basis: ThresholdBasis,
    pub min_rest: usize,
    pub min_activity: usize,
    pub cpd_kernel: CpdKernel,
    pub cpd_penalty: f64,
    pub rbf_bandwidth: Bandwidth,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            smoothing_window: 60,
            max_inactivity: 720,
            threshold_factor: 0.75,
            threshold_basis: ThresholdBasis::Smoothed,
            min_rest: 180,
            min_activity: 240,
            cpd_kernel: CpdKernel::Rbf,
            cpd_penalty: cpd::DEFAULT_PENALTY,
            rbf_bandwidth: Bandwidth::MedianHeuristic,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        let durations = [
            ("smoothing_window", self.smoothing_window),
            ("max_inactivity", self.max_inactivity),
            ("min_rest", self.min_rest),
            ("min_activity", self.min_activity),
        ];
        if let Some((name, _)) = durations.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be > 0")));
        }
        if !(self.threshold_factor > 0.0 && self.threshold_factor <= 1.0) {
            return Err(Error::InvalidConfig("threshold_factor must be in (0, 1]".into()));
        }
        if !(self.cpd_penalty >= 0.0) {
            return Err(Error::InvalidConfig("cpd_penalty must be non-negative".into()));
        }
        if let Bandwidth::Fixed(h) = self.rbf_bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidConfig("rbf_bandwidth must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn cpd(&self) -> CpdConfig {
        CpdConfig {
            kernel: self.cpd_kernel,
            penalty: self.cpd_penalty,
            bandwidth: self.rbf_bandwidth,
        }
    }
}

/// Series after gap splicing and long-inactivity removal.
#[derive(Clone, Debug, PartialEq)]
pub struct CleanedSeries {
    pub values: Vec<f64>,
    /// Original minute index of every retained value.
    pub minutes: Vec<u32>,
}

impl CleanedSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn clean_series(series: &ActigramSeries, cfg: &SegmentationConfig) -> Result<CleanedSeries> {
    let spliced: Vec<(u32, f64)> = series
        .epochs()
        .iter()
        .map(|e| (e.minute_index, e.count))
        .collect();
    let kept = drop_long_zero_runs(&spliced, cfg.max_inactivity);
    if kept.is_empty() {
        return Err(Error::EmptyAfterCleaning(series.participant_id().to_string()));
    }
    Ok(CleanedSeries {
        minutes: kept.iter().map(|(m, _)| *m).collect(),
        values: kept.iter().map(|(_, v)| *v).collect(),
    })
}

fn drop_long_zero_runs(points: &[(u32, f64)], max_run: usize) -> Vec<(u32, f64)> {
    let mut out = Vec::with_capacity(points.len());
    let mut i = 0;
    while i < points.len() {
        if points[i].1 == 0.0 {
            let start = i;
            while i < points.len() && points[i].1 == 0.0 {
                i += 1;
            }
            if i - start <= max_run {
                out.extend_from_slice(&points[start..i]);
            }
        } else {
            out.push(points[i]);
            i += 1;
        }
    }
    out
}

/// Centered moving mean. The window for position `i` covers
/// `[i - (w-1)/2, i + w/2]`, truncated at the ends (mean over available
/// samples).
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let n = values.len();
    let w = window.max(1);
    let left = (w - 1) / 2;
    let right = w / 2;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in values {
        acc += v;
        prefix.push(acc);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(left);
            let hi = (i + right + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Activity,
    Rest,
}

impl SegmentKind {
    pub fn flip(self) -> Self {
        match self {
            SegmentKind::Activity => SegmentKind::Rest,
            SegmentKind::Rest => SegmentKind::Activity,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SegmentKind::Activity => "activity",
            SegmentKind::Rest => "rest",
        }
    }
}

/// Half-open span `[start, end)` of the cleaned series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `threshold_factor * median(basis)`.
pub fn activity_threshold(basis: &[f64], cfg: &SegmentationConfig) -> f64 {
    cfg.threshold_factor * median(basis)
}

/// Labels each span between consecutive breakpoints: Activity iff its mean
/// smoothed value exceeds `threshold`.
pub fn classify_segments(smoothed: &[f64], breakpoints: &[usize], threshold: f64) -> Vec<Segment> {
    let mut out = Vec::with_capacity(breakpoints.len());
    let mut start = 0;
    for &end in breakpoints {
        if end <= start {
            continue;
        }
        let mean = smoothed[start..end].iter().sum::<f64>() / (end - start) as f64;
        let kind = if mean > threshold {
            SegmentKind::Activity
        } else {
            SegmentKind::Rest
        };
        out.push(Segment { kind, start, end });
        start = end;
    }
    out
}

fn coalesce(segs: &[Segment]) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::with_capacity(segs.len());
    for s in segs {
        match out.last_mut() {
            Some(prev) if prev.kind == s.kind => prev.end = s.end,
            _ => out.push(*s),
        }
    }
    out
}

/// Relabels every `kind` segment shorter than `min_len` as the opposite kind.
/// A lone segment has no neighbour to join and is left alone.
fn absorb(segs: &mut [Segment], kind: SegmentKind, min_len: usize) {
    if segs.len() <= 1 {
        return;
    }
    for s in segs.iter_mut() {
        if s.kind == kind && s.len() < min_len {
            s.kind = kind.flip();
        }
    }
}

/// Coalesces same-kind neighbours, absorbs short rests into activity, then
/// short activities into rest, repeating until nothing changes.
pub fn merge_segments(provisional: &[Segment], cfg: &SegmentationConfig) -> Vec<Segment> {
    let mut segs = coalesce(provisional);
    loop {
        let before = segs.clone();
        absorb(&mut segs, SegmentKind::Rest, cfg.min_rest);
        segs = coalesce(&segs);
        absorb(&mut segs, SegmentKind::Activity, cfg.min_activity);
        segs = coalesce(&segs);
        if segs == before {
            return segs;
        }
    }
}

/// Final segmentation of one participant, with the intermediate curves kept
/// for plotting.
#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation {
    pub participant_id: String,
    pub segments: Vec<Segment>,
    pub cleaned: CleanedSeries,
    pub smoothed: Vec<f64>,
    pub threshold: f64,
    pub breakpoints: Vec<usize>,
}

impl Segmentation {
    pub fn cleaned_length(&self) -> usize {
        self.cleaned.len()
    }

    pub fn values(&self, seg: &Segment) -> &[f64] {
        &self.cleaned.values[seg.start..seg.end]
    }

    pub fn of_kind(&self, kind: SegmentKind) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(move |s| s.kind == kind)
    }

    /// `(kind, first original minute, one past last original minute)`.
    pub fn original_span(&self, seg: &Segment) -> (u32, u32) {
        (
            self.cleaned.minutes[seg.start],
            self.cleaned.minutes[seg.end - 1] + 1,
        )
    }
}

pub fn segment_pipeline(series: &ActigramSeries, cfg: &SegmentationConfig) -> Result<Segmentation> {
    cfg.validate()?;
    let cleaned = clean_series(series, cfg)?;
    Ok(segment_cleaned(series.participant_id(), cleaned, cfg))
}

/// Steps 2 onward, for an already cleaned series.
pub fn segment_cleaned(participant_id: &str, cleaned: CleanedSeries, cfg: &SegmentationConfig) -> Segmentation {
    let smoothed = moving_average(&cleaned.values, cfg.smoothing_window);
    let breakpoints = detect_change_points(&smoothed, &cfg.cpd());
    let threshold = match cfg.threshold_basis {
        ThresholdBasis::Smoothed => activity_threshold(&smoothed, cfg),
        ThresholdBasis::Raw => activity_threshold(&cleaned.values, cfg),
    };
    let provisional = classify_segments(&smoothed, &breakpoints, threshold);
    let segments = merge_segments(&provisional, cfg);
    Segmentation {
        participant_id: participant_id.to_string(),
        segments,
        cleaned,
        smoothed,
        threshold,
        breakpoints,
    }
}

/// `participant_id,kind,start_minute,end_minute` with original minute
/// indices (end exclusive).
pub fn write_segments_csv<W: Write>(out: W, segmentations: &[Segmentation]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["participant_id", "kind", "start_minute", "end_minute"])?;
    for sg in segmentations {
        for seg in &sg.segments {
            let (a, b) = sg.original_span(seg);
            w.write_record([
                sg.participant_id.as_str(),
                seg.kind.as_str(),
                &a.to_string(),
                &b.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<segment writer>", e))?;
    Ok(())
}
