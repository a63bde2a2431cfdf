// SPDX-License-Identifier: MIT OR Apache-2.0

//! Raw accelerometer binning, actigram/subject CSV parsing and dataset assembly.
//!
//! Actigram CSV: `participant_id,timestamp_iso8601,count`, one row per
//! recorded minute. Missing minutes are absent rows and stay absent in
//! [`ActigramSeries`]; nothing is zero-filled here.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Duration, FixedOffset, NaiveDateTime, SecondsFormat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MINUTES_PER_DAY: u32 = 1440;
pub const MIN_DURATION_MINUTES: u32 = MINUTES_PER_DAY;
pub const MAX_DURATION_MINUTES: u32 = 14 * MINUTES_PER_DAY;

const ACTIGRAM_HEADER: [&str; 3] = ["participant_id", "timestamp_iso8601", "count"];
const RAW_HEADER: [&str; 4] = ["participant_id", "t_seconds", "x", "y"];

/// One 1 Hz reading of the two accelerometer axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawAccelSample {
    /// Seconds since recording start.
    pub t: u64,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinuteEpoch {
    pub minute_index: u32,
    pub count: f64,
}

/// Minute-resolution activity counts of one participant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActigramSeries {
    participant_id: String,
    start_time: DateTime<FixedOffset>,
    epochs: Vec<MinuteEpoch>,
}

/// A run of absent minutes inside a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gap {
    pub start_minute: u32,
    pub length: u32,
}

impl ActigramSeries {
    /// Validates ordering, uniqueness, non-negativity and the 1 to 14 day
    /// duration window.
    pub fn new(
        participant_id: impl Into<String>,
        start_time: DateTime<FixedOffset>,
        epochs: Vec<MinuteEpoch>,
    ) -> Result<Self> {
        let participant_id = participant_id.into();
        if epochs.is_empty() {
            return Err(Error::EmptySeries(participant_id));
        }
        for (i, e) in epochs.iter().enumerate() {
            if !(e.count >= 0.0) || !e.count.is_finite() {
                return Err(Error::NegativeCount {
                    row: i,
                    value: e.count,
                });
            }
            if i > 0 {
                let prev = epochs[i - 1].minute_index;
                if e.minute_index == prev {
                    return Err(Error::DuplicateMinute {
                        row: i,
                        minute: e.minute_index,
                    });
                }
                if e.minute_index < prev {
                    return Err(Error::format(i, "epochs are not sorted by minute"));
                }
            }
        }
        let series = Self {
            participant_id,
            start_time,
            epochs,
        };
        let duration = series.duration_minutes();
        if !(MIN_DURATION_MINUTES..=MAX_DURATION_MINUTES).contains(&duration) {
            return Err(Error::Schema(format!(
                "series `{}` spans {duration} minutes; expected between 1 and 14 days",
                series.participant_id
            )));
        }
        Ok(series)
    }

    pub fn participant_id(&self) -> &str {
        &self.participant_id
    }

    pub fn start_time(&self) -> DateTime<FixedOffset> {
        self.start_time
    }

    pub fn epochs(&self) -> &[MinuteEpoch] {
        &self.epochs
    }

    /// Minutes from the start to one past the last recorded epoch.
    pub fn duration_minutes(&self) -> u32 {
        self.epochs.last().map_or(0, |e| e.minute_index + 1)
    }

    pub fn gaps(&self) -> Vec<Gap> {
        let mut gaps = Vec::new();
        let mut expected = 0u32;
        for e in &self.epochs {
            if e.minute_index > expected {
                gaps.push(Gap {
                    start_minute: expected,
                    length: e.minute_index - expected,
                });
            }
            expected = e.minute_index + 1;
        }
        gaps
    }
}

/// Sums per-minute activity from 1 Hz two-axis readings.
///
/// Each minute's count is the sum of `|x_i - x_{i-1}| + |y_i - y_{i-1}|`
/// over its samples. A minute's first sample takes the last sample of the
/// previous minute as predecessor; the very first sample contributes 0.
/// Minutes with no samples produce no epoch.
pub fn bin_raw(samples: &[RawAccelSample]) -> Result<Vec<MinuteEpoch>> {
    let Some(first) = samples.first() else {
        return Err(Error::EmptySeries("raw sample list".into()));
    };
    let t0 = first.t;
    let mut epochs: Vec<MinuteEpoch> = Vec::with_capacity(samples.len().div_ceil(60));
    let mut prev = *first;
    for (i, s) in samples.iter().enumerate() {
        if i > 0 && s.t <= prev.t {
            return Err(Error::format(
                i,
                format!("timestamps not strictly increasing ({} after {})", s.t, prev.t),
            ));
        }
        let minute = u32::try_from((s.t - t0) / 60)
            .map_err(|_| Error::format(i, "timestamp too large"))?;
        let delta = (s.x - prev.x).abs() + (s.y - prev.y).abs();
        match epochs.last_mut() {
            Some(e) if e.minute_index == minute => e.count += delta,
            _ => epochs.push(MinuteEpoch {
                minute_index: minute,
                count: delta,
            }),
        }
        prev = *s;
    }
    let gaps = raw_gaps(samples);
    if !gaps.is_empty() {
        log::warn!("raw recording has {} sampling gap(s)", gaps.len());
    }
    Ok(epochs)
}

/// `(after_t, missing_seconds)` for every hole in the 1 Hz sample grid.
pub fn raw_gaps(samples: &[RawAccelSample]) -> Vec<(u64, u64)> {
    samples
        .windows(2)
        .filter(|w| w[1].t > w[0].t + 1)
        .map(|w| (w[0].t, w[1].t - w[0].t - 1))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    /// Minute-binned actigram CSV.
    #[default]
    Minute,
    /// Raw 1 Hz accelerometer CSV, binned on load.
    Raw,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses a CSV body, rejecting blank lines and checking the header.
/// Returns `(file_line, record)` pairs.
fn csv_records(text: &str, header: &[&str]) -> Result<(csv::StringRecord, Vec<(usize, csv::StringRecord)>)> {
    let body_lines: Vec<&str> = text.lines().collect();
    for (i, line) in body_lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            return Err(Error::format(i + 1, "blank row"));
        }
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found = rdr.headers()?.clone();
    for col in header {
        if !found.iter().any(|h| h == *col) {
            return Err(Error::Schema(format!("missing column `{col}`")));
        }
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        out.push((line, rec));
    }
    Ok((found, out))
}

fn column(headers: &csv::StringRecord, name: &str) -> usize {
    headers.iter().position(|h| h == name).expect("header checked")
}

fn parse_timestamp(s: &str) -> Option<DateTime<FixedOffset>> {
    DateTime::parse_from_rfc3339(s).ok().or_else(|| {
        NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S")
            .ok()
            .map(|n| n.and_utc().fixed_offset())
    })
}

fn parse_f64(line: usize, field: &str, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::format(line, format!("`{field}` is not a number: {s:?}")))
}

/// Reads an actigram file. A file may hold several participants; series are
/// returned in order of first appearance.
pub fn parse_actigram(path: &Path, format: InputFormat) -> Result<Vec<ActigramSeries>> {
    let text = read_text(path)?;
    match format {
        InputFormat::Minute => read_actigram_str(&text),
        InputFormat::Raw => {
            let start = DateTime::parse_from_rfc3339("1970-01-01T00:00:00Z").expect("literal");
            read_raw_str(&text)?
                .into_iter()
                .map(|(id, samples)| ActigramSeries::new(id, start, bin_raw(&samples)?))
                .collect()
        }
    }
}

pub fn read_actigram_str(text: &str) -> Result<Vec<ActigramSeries>> {
    let (headers, records) = csv_records(text, &ACTIGRAM_HEADER)?;
    let (c_id, c_ts, c_count) = (
        column(&headers, ACTIGRAM_HEADER[0]),
        column(&headers, ACTIGRAM_HEADER[1]),
        column(&headers, ACTIGRAM_HEADER[2]),
    );

    struct Pending {
        start: DateTime<FixedOffset>,
        epochs: Vec<MinuteEpoch>,
    }
    let mut order: Vec<String> = Vec::new();
    let mut pending: BTreeMap<String, Pending> = BTreeMap::new();

    for (line, rec) in records {
        let id = rec.get(c_id).unwrap_or_default();
        if id.is_empty() {
            return Err(Error::format(line, "empty participant_id"));
        }
        let ts_text = rec.get(c_ts).unwrap_or_default();
        let ts = parse_timestamp(ts_text)
            .ok_or_else(|| Error::format(line, format!("bad timestamp {ts_text:?}")))?;
        let count = parse_f64(line, "count", rec.get(c_count).unwrap_or_default())?;
        if !(count >= 0.0) || !count.is_finite() {
            return Err(Error::NegativeCount { row: line, value: count });
        }
        let entry = pending.entry(id.to_string()).or_insert_with(|| {
            order.push(id.to_string());
            Pending {
                start: ts,
                epochs: Vec::new(),
            }
        });
        let offset = (ts - entry.start).num_seconds();
        if offset < 0 || offset % 60 != 0 {
            return Err(Error::format(
                line,
                "timestamp is not a whole minute after the participant's first row",
            ));
        }
        let minute = u32::try_from(offset / 60).map_err(|_| Error::format(line, "timestamp too far from start"))?;
        if let Some(last) = entry.epochs.last() {
            if minute == last.minute_index {
                return Err(Error::DuplicateMinute { row: line, minute });
            }
            if minute < last.minute_index {
                return Err(Error::format(line, "timestamps out of order"));
            }
        }
        entry.epochs.push(MinuteEpoch {
            minute_index: minute,
            count,
        });
    }
    if order.is_empty() {
        return Err(Error::EmptySeries("actigram file has no rows".into()));
    }
    order
        .into_iter()
        .map(|id| {
            let p = pending.remove(&id).expect("registered");
            ActigramSeries::new(id, p.start, p.epochs)
        })
        .collect()
}

/// Raw samples grouped by participant, in order of first appearance.
pub fn read_raw_str(text: &str) -> Result<Vec<(String, Vec<RawAccelSample>)>> {
    let (headers, records) = csv_records(text, &RAW_HEADER)?;
    let cols: Vec<usize> = RAW_HEADER.iter().map(|c| column(&headers, c)).collect();
    let mut groups: Vec<(String, Vec<RawAccelSample>)> = Vec::new();
    for (line, rec) in records {
        let id = rec.get(cols[0]).unwrap_or_default();
        let t_text = rec.get(cols[1]).unwrap_or_default();
        let t = t_text
            .parse::<u64>()
            .map_err(|_| Error::format(line, format!("bad t_seconds {t_text:?}")))?;
        let x = parse_f64(line, "x", rec.get(cols[2]).unwrap_or_default())?;
        let y = parse_f64(line, "y", rec.get(cols[3]).unwrap_or_default())?;
        let idx = match groups.iter().position(|(g, _)| g == id) {
            Some(i) => i,
            None => {
                groups.push((id.to_string(), Vec::new()));
                groups.len() - 1
            }
        };
        let samples = &mut groups[idx].1;
        if samples.last().is_some_and(|p| p.t >= t) {
            return Err(Error::format(line, "t_seconds not strictly increasing"));
        }
        samples.push(RawAccelSample { t, x, y });
    }
    if groups.is_empty() {
        return Err(Error::EmptySeries("raw file has no rows".into()));
    }
    Ok(groups)
}

/// Writes series in actigram CSV form. Counts use the shortest
/// round-trip float representation, so parsing the output reproduces the
/// input bit-exactly.
pub fn write_actigram<W: Write>(out: W, series: &[ActigramSeries]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ACTIGRAM_HEADER)?;
    for s in series {
        for e in &s.epochs {
            let ts = s.start_time + Duration::minutes(i64::from(e.minute_index));
            w.write_record([
                s.participant_id.as_str(),
                &ts.to_rfc3339_opts(SecondsFormat::Secs, true),
                &e.count.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<actigram writer>", e))?;
    Ok(())
}

/// Subject-level questionnaire and demographic columns plus the two targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub participant_id: String,
    /// 1 female, 2 male.
    pub sex: u8,
    pub age: f64,
    pub bmi_pct: Option<f64>,
    pub bmi_cat: Option<u8>,
    pub ov_ob: Option<u8>,
    pub zsdsi: f64,
    pub zsdsi_cat: u8,
    pub debq_restr: f64,
    pub debq_extern: f64,
    pub debq_emo: f64,
    pub debq_restr_cat: u8,
    pub debq_extern_cat: u8,
    pub debq_emo_cat: u8,
    pub fa: u8,
    pub sc: u8,
}

pub const SUBJECT_HEADER: [&str; 16] = [
    "participant_id",
    "sex",
    "age",
    "bmi_pct",
    "bmi_cat",
    "ov_ob",
    "zsdsi",
    "zsdsi_cat",
    "debq_restr",
    "debq_extern",
    "debq_emo",
    "debq_restr_cat",
    "debq_extern_cat",
    "debq_emo_cat",
    "fa",
    "sc",
];

/// Names of the subjective (non-actimetric) predictor columns.
pub const SUBJECTIVE_FEATURES: [&str; 13] = [
    "sex",
    "age",
    "bmi_pct",
    "bmi_cat",
    "ov_ob",
    "zsdsi",
    "zsdsi_cat",
    "debq_restr",
    "debq_extern",
    "debq_emo",
    "debq_restr_cat",
    "debq_extern_cat",
    "debq_emo_cat",
];

impl SubjectRecord {
    /// Value of a subjective column by name (see [`SUBJECTIVE_FEATURES`]).
    pub fn subjective(&self, name: &str) -> Option<f64> {
        match name {
            "sex" => Some(f64::from(self.sex)),
            "age" => Some(self.age),
            "bmi_pct" => self.bmi_pct,
            "bmi_cat" => self.bmi_cat.map(f64::from),
            "ov_ob" => self.ov_ob.map(f64::from),
            "zsdsi" => Some(self.zsdsi),
            "zsdsi_cat" => Some(f64::from(self.zsdsi_cat)),
            "debq_restr" => Some(self.debq_restr),
            "debq_extern" => Some(self.debq_extern),
            "debq_emo" => Some(self.debq_emo),
            "debq_restr_cat" => Some(f64::from(self.debq_restr_cat)),
            "debq_extern_cat" => Some(f64::from(self.debq_extern_cat)),
            "debq_emo_cat" => Some(f64::from(self.debq_emo_cat)),
            _ => None,
        }
    }

    pub fn sc_class(&self) -> u8 {
        sc_to_class(self.sc).expect("validated on construction")
    }
}

struct Row<'a> {
    line: usize,
    rec: &'a csv::StringRecord,
    headers: &'a csv::StringRecord,
}

impl Row<'_> {
    fn cell(&self, field: &'static str) -> Option<&str> {
        let v = self.rec.get(column(self.headers, field)).unwrap_or_default();
        (!v.is_empty()).then_some(v)
    }

    fn real(&self, field: &'static str, lo: f64, hi: f64) -> Result<Option<f64>> {
        let Some(s) = self.cell(field) else {
            return Ok(None);
        };
        let v = parse_f64(self.line, field, s)?;
        if !(lo..=hi).contains(&v) {
            return Err(Error::OutOfRange {
                row: self.line,
                field,
                value: s.to_string(),
            });
        }
        Ok(Some(v))
    }

    fn code(&self, field: &'static str, lo: u8, hi: u8) -> Result<Option<u8>> {
        let Some(s) = self.cell(field) else {
            return Ok(None);
        };
        let v: i64 = s
            .parse::<f64>()
            .ok()
            .filter(|v| v.fract() == 0.0)
            .map(|v| v as i64)
            .ok_or_else(|| Error::format(self.line, format!("`{field}` is not an integer code: {s:?}")))?;
        if v < i64::from(lo) || v > i64::from(hi) {
            return Err(Error::OutOfRange {
                row: self.line,
                field,
                value: s.to_string(),
            });
        }
        Ok(Some(v as u8))
    }

    fn required<T>(&self, field: &'static str, v: Option<T>) -> Result<T> {
        v.ok_or(Error::MissingField {
            row: self.line,
            field,
        })
    }
}

pub fn parse_subjects(path: &Path) -> Result<Vec<SubjectRecord>> {
    read_subjects_str(&read_text(path)?)
}

pub fn read_subjects_str(text: &str) -> Result<Vec<SubjectRecord>> {
    let (headers, records) = csv_records(text, &SUBJECT_HEADER)?;
    let mut out = Vec::with_capacity(records.len());
    for (line, rec) in &records {
        let r = Row {
            line: *line,
            rec,
            headers: &headers,
        };
        let participant_id = r.required("participant_id", r.cell("participant_id"))?.to_string();
        let sex = r.code("sex", 1, 2)?;
        let age = r.real("age", 0.0, 120.0)?;
        let zsdsi = r.real("zsdsi", 25.0, 100.0)?;
        let zsdsi_cat = r.code("zsdsi_cat", 0, 1)?;
        let debq_restr = r.real("debq_restr", 1.0, 5.0)?;
        let debq_extern = r.real("debq_extern", 1.0, 5.0)?;
        let debq_emo = r.real("debq_emo", 1.0, 5.0)?;
        let debq_restr_cat = r.code("debq_restr_cat", 0, 1)?;
        let debq_extern_cat = r.code("debq_extern_cat", 0, 1)?;
        let debq_emo_cat = r.code("debq_emo_cat", 0, 1)?;
        let fa = r.code("fa", 0, 1)?;
        let sc = r.code("sc", 0, 7)?;
        out.push(SubjectRecord {
            sex: r.required("sex", sex)?,
            age: r.required("age", age)?,
            bmi_pct: r.real("bmi_pct", 0.0, 100.0)?,
            bmi_cat: r.code("bmi_cat", 1, 4)?,
            ov_ob: r.code("ov_ob", 0, 1)?,
            zsdsi: r.required("zsdsi", zsdsi)?,
            zsdsi_cat: r.required("zsdsi_cat", zsdsi_cat)?,
            debq_restr: r.required("debq_restr", debq_restr)?,
            debq_extern: r.required("debq_extern", debq_extern)?,
            debq_emo: r.required("debq_emo", debq_emo)?,
            debq_restr_cat: r.required("debq_restr_cat", debq_restr_cat)?,
            debq_extern_cat: r.required("debq_extern_cat", debq_extern_cat)?,
            debq_emo_cat: r.required("debq_emo_cat", debq_emo_cat)?,
            fa: r.required("fa", fa)?,
            sc: r.required("sc", sc)?,
            participant_id,
        });
    }
    Ok(out)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_subjects<W: Write>(out: W, subjects: &[SubjectRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUBJECT_HEADER)?;
    for s in subjects {
        w.write_record([
            s.participant_id.clone(),
            s.sex.to_string(),
            s.age.to_string(),
            opt(s.bmi_pct),
            opt(s.bmi_cat),
            opt(s.ov_ob),
            s.zsdsi.to_string(),
            s.zsdsi_cat.to_string(),
            s.debq_restr.to_string(),
            s.debq_extern.to_string(),
            s.debq_emo.to_string(),
            s.debq_restr_cat.to_string(),
            s.debq_extern_cat.to_string(),
            s.debq_emo_cat.to_string(),
            s.fa.to_string(),
            s.sc.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<subject writer>", e))?;
    Ok(())
}

/// Maps a confirmed-symptom count to its class: 0-1 → 1, 2 → 2, 3 → 3, 4-7 → 4.
pub fn sc_to_class(sc: u8) -> Result<u8> {
    match sc {
        0 | 1 => Ok(1),
        2 => Ok(2),
        3 => Ok(3),
        4..=7 => Ok(4),
        _ => Err(Error::OutOfRange {
            row: 0,
            field: "sc",
            value: sc.to_string(),
        }),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    /// `[FA=0, FA=1]`.
    pub fa: [usize; 2],
    /// SC classes 1..=4.
    pub sc: [usize; 4],
}

impl ClassCounts {
    pub fn of(subjects: &[SubjectRecord]) -> Self {
        let mut c = ClassCounts::default();
        for s in subjects {
            c.fa[usize::from(s.fa)] += 1;
            c.sc[usize::from(s.sc_class()) - 1] += 1;
        }
        c
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub subjects: Vec<SubjectRecord>,
    pub series: BTreeMap<String, ActigramSeries>,
}

impl Dataset {
    /// Pairs every subject with exactly one series.
    pub fn assemble(subjects: Vec<SubjectRecord>, series: Vec<ActigramSeries>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for s in series {
            let id = s.participant_id().to_string();
            if map.insert(id.clone(), s).is_some() {
                return Err(Error::Dataset(format!("participant `{id}` has more than one series")));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &subjects {
            if !seen.insert(s.participant_id.as_str()) {
                return Err(Error::Dataset(format!("duplicate subject `{}`", s.participant_id)));
            }
            if !map.contains_key(&s.participant_id) {
                return Err(Error::Dataset(format!("subject `{}` has no series", s.participant_id)));
            }
        }
        if let Some(extra) = map.keys().find(|k| !seen.contains(k.as_str())) {
            return Err(Error::Dataset(format!("series `{extra}` has no subject record")));
        }
        let ds = Dataset {
            subjects,
            series: map,
        };
        let c = ds.class_counts();
        log::info!(
            "dataset: {} subjects; FA 0/1 = {}/{}; SC classes = {}/{}/{}/{}",
            ds.subjects.len(),
            c.fa[0],
            c.fa[1],
            c.sc[0],
            c.sc[1],
            c.sc[2],
            c.sc[3]
        );
        Ok(ds)
    }

    pub fn class_counts(&self) -> ClassCounts {
        ClassCounts::of(&self.subjects)
    }
}
