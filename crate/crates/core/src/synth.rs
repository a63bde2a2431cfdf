// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic cohorts with a planted day/night square wave and
//! class-dependent day-to-day amplitude variability and fragmentation.
//!
//! Every subject draws from its own ChaCha8 stream: the generator is seeded
//! with `seed_from_u64(seed)` and subject `i` (0-based) uses stream `i + 1`.
//! Stream 0 drives cohort-level label assignment. Output therefore never
//! depends on generation order or thread count.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{DateTime, FixedOffset};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ActigramSeries, Dataset, MinuteEpoch, SubjectRecord};
use crate::segmentation::{Segment, SegmentKind};

const MINUTES_PER_DAY: usize = 1440;
const INVERSION_MIN: usize = 20;
const INVERSION_MAX: usize = 45;

/// Multipliers applied to the base amplitude variability and
/// fragmentation for one FA class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassEffect {
    pub amplitude_cv: f64,
    pub fragmentation: f64,
}

impl Default for ClassEffect {
    fn default() -> Self {
        Self {
            amplitude_cv: 1.0,
            fragmentation: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub days: usize,
    pub active_hours: usize,
    /// Midline level; activity sits `day_amplitude` above it, rest the
    /// same distance below (floored at 0).
    pub mesor: f64,
    pub day_amplitude: f64,
    /// Log-normal spread of each day's amplitude multiplier.
    pub amplitude_cv: f64,
    /// Per-minute additive Gaussian noise, clipped at 0.
    pub noise_sd: f64,
    /// Probability per hour of a brief activity/rest inversion.
    pub fragmentation: f64,
    /// Keyed by FA label; missing classes use unit multipliers.
    pub class_effect: BTreeMap<u8, ClassEffect>,
    pub fa_positive: usize,
    /// Relative SC class sizes (classes 1..=4).
    pub sc_weights: [f64; 4],
    /// Shift of subjective scores for FA=1, in units of each score's SD.
    pub subjective_effect: f64,
    /// Number of subjects with missing BMI columns.
    pub bmi_missing: usize,
    pub seed: u64,
    pub start_time: DateTime<FixedOffset>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_subjects: 78,
            days: 7,
            active_hours: 16,
            mesor: 100.0,
            day_amplitude: 80.0,
            amplitude_cv: 0.08,
            noise_sd: 25.0,
            fragmentation: 0.03,
            class_effect: BTreeMap::from([(
                1,
                ClassEffect {
                    amplitude_cv: 4.0,
                    fragmentation: 3.0,
                },
            )]),
            fa_positive: 10,
            sc_weights: [33.0, 16.0, 15.0, 14.0],
            subjective_effect: 0.5,
            bmi_missing: 3,
            seed: 42,
            start_time: DateTime::parse_from_rfc3339("2023-03-06T07:00:00+03:00").expect("valid literal"),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_subjects == 0 {
            return bad("n_subjects must be positive");
        }
        if !(1..=14).contains(&self.days) {
            return bad("days must lie in 1..=14");
        }
        if !(1..24).contains(&self.active_hours) {
            return bad("active_hours must lie in 1..=23");
        }
        if !(self.mesor >= 0.0 && self.day_amplitude >= 0.0 && self.amplitude_cv >= 0.0 && self.noise_sd >= 0.0) {
            return bad("levels, amplitude_cv and noise_sd must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.fragmentation) {
            return bad("fragmentation must be a probability");
        }
        for (class, e) in &self.class_effect {
            if *class > 1 {
                return bad("class_effect keys are FA labels 0 and 1");
            }
            if !(e.amplitude_cv >= 0.0 && e.fragmentation >= 0.0) {
                return bad("class_effect multipliers must be non-negative");
            }
        }
        if self.fa_positive > self.n_subjects {
            return bad("fa_positive exceeds n_subjects");
        }
        if self.sc_weights.iter().any(|w| !(*w >= 0.0)) || self.sc_weights.iter().sum::<f64>() <= 0.0 {
            return bad("sc_weights must be non-negative with a positive sum");
        }
        if self.bmi_missing > self.n_subjects {
            return bad("bmi_missing exceeds n_subjects");
        }
        Ok(())
    }

    pub fn effect(&self, fa: u8) -> ClassEffect {
        self.class_effect.get(&fa).copied().unwrap_or_default()
    }

    fn active_minutes(&self) -> usize {
        self.active_hours * 60
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSubject {
    pub series: ActigramSeries,
    /// Constant-state runs of the planted activity/rest pattern.
    pub truth: Vec<Segment>,
}

/// Per-minute activity state: the base square wave plus inversions.
fn planted_states(cfg: &SynthConfig, fragmentation: f64, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let total = cfg.days * MINUTES_PER_DAY;
    let active = cfg.active_minutes();
    let base: Vec<bool> = (0..total).map(|m| m % MINUTES_PER_DAY < active).collect();
    let mut states = base.clone();
    let p = fragmentation.clamp(0.0, 1.0);
    for hour in 0..total / 60 {
        let hit = rng.random::<f64>() < p;
        let len = rng.random_range(INVERSION_MIN..=INVERSION_MAX);
        let start = hour * 60 + rng.random_range(0..60);
        if !hit {
            continue;
        }
        let end = start + len;
        if start == 0 || end + 1 > total {
            continue;
        }
        let state = base[start];
        // strictly inside one base run and clear of earlier inversions
        if (start - 1..=end).all(|m| base[m] == state && states[m] == state) {
            for s in &mut states[start..end] {
                *s = !state;
            }
        }
    }
    states
}

fn runs(states: &[bool]) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for (m, &s) in states.iter().enumerate() {
        let kind = if s { SegmentKind::Activity } else { SegmentKind::Rest };
        match out.last_mut() {
            Some(last) if last.kind == kind => last.end = m + 1,
            _ => out.push(Segment {
                kind,
                start: m,
                end: m + 1,
            }),
        }
    }
    out
}

pub fn participant_id(index: usize) -> String {
    format!("S{:03}", index + 1)
}

fn subject_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Series and ground truth for subject `index` with the given FA label.
pub fn generate_subject(cfg: &SynthConfig, index: usize, fa: u8) -> Result<SynthSubject> {
    cfg.validate()?;
    let mut rng = subject_rng(cfg.seed, index as u64 + 1);
    let effect = cfg.effect(fa);
    let sigma = cfg.amplitude_cv * effect.amplitude_cv;
    let day_levels: Vec<f64> = (0..cfg.days)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            let mult = (sigma * z - sigma * sigma / 2.0).exp();
            cfg.mesor + cfg.day_amplitude * mult
        })
        .collect();
    let rest_level = (cfg.mesor - cfg.day_amplitude).max(0.0);
    let states = planted_states(cfg, cfg.fragmentation * effect.fragmentation, &mut rng);
    let epochs = states
        .iter()
        .enumerate()
        .map(|(m, &active)| {
            let level = if active { day_levels[m / MINUTES_PER_DAY] } else { rest_level };
            let noise = if cfg.noise_sd > 0.0 {
                let z: f64 = StandardNormal.sample(&mut rng);
                cfg.noise_sd * z
            } else {
                0.0
            };
            MinuteEpoch {
                minute_index: m as u32,
                count: (level + noise).max(0.0),
            }
        })
        .collect();
    Ok(SynthSubject {
        series: ActigramSeries::new(participant_id(index), cfg.start_time, epochs)?,
        truth: runs(&states),
    })
}

/// Largest-remainder allocation of `n` over `weights`.
fn allocate(n: usize, weights: &[f64; 4]) -> [usize; 4] {
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / total * n as f64).collect();
    let mut counts = [0usize; 4];
    for (c, e) in counts.iter_mut().zip(&exact) {
        *c = e.floor() as usize;
    }
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let short = n - counts.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        counts[i] += 1;
    }
    counts
}

/// FA label and symptom count per subject. FA positives are drawn among
/// subjects with at least three symptoms when there are enough of them.
pub fn assign_labels(cfg: &SynthConfig) -> Result<Vec<(u8, u8)>> {
    cfg.validate()?;
    let mut rng = subject_rng(cfg.seed, 0);
    let counts = allocate(cfg.n_subjects, &cfg.sc_weights);
    let mut sc: Vec<u8> = Vec::with_capacity(cfg.n_subjects);
    for (class, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            sc.push(match class {
                0 => rng.random_range(0..=1),
                1 => 2,
                2 => 3,
                _ => rng.random_range(4..=7),
            });
        }
    }
    sc.shuffle(&mut rng);
    let mut eligible: Vec<usize> = (0..sc.len()).filter(|&i| sc[i] >= 3).collect();
    if eligible.len() < cfg.fa_positive {
        eligible = (0..sc.len()).collect();
    }
    eligible.shuffle(&mut rng);
    let mut fa = vec![0u8; sc.len()];
    for &i in eligible.iter().take(cfg.fa_positive) {
        fa[i] = 1;
    }
    Ok(fa.into_iter().zip(sc).collect())
}

fn round_to(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

fn subjective_record(cfg: &SynthConfig, index: usize, fa: u8, sc: u8, bmi_missing: bool) -> SubjectRecord {
    // separate stream block so questionnaire draws never shift actigram draws
    let mut rng = subject_rng(cfg.seed, (1 << 32) + index as u64);
    let shift = cfg.subjective_effect * f64::from(fa);
    let mut score = |mean: f64, sd: f64, lo: f64, hi: f64, shift: f64| {
        let z: f64 = StandardNormal.sample(&mut rng);
        (mean + sd * (z + shift)).clamp(lo, hi)
    };
    let bmi = round_to(score(47.75, 25.2, 1.0, 99.0, shift), 1.0);
    let zsdsi = round_to(score(47.27, 12.24, 25.0, 100.0, shift), 1.0);
    let restr = round_to(score(2.2, 1.0, 1.0, 5.0, shift), 0.1);
    let extern_ = round_to(score(2.93, 0.58, 1.0, 5.0, shift), 0.1);
    let emo = round_to(score(1.96, 0.5, 1.0, 5.0, shift), 0.1);
    let age = round_to(score(21.65, 9.64, 15.0, 62.0, 0.0), 1.0);
    let sex = if rng.random::<f64>() < 0.75 { 1 } else { 2 };
    let bmi_cat = match bmi {
        b if b < 5.0 => 1,
        b if b < 85.0 => 2,
        b if b < 95.0 => 3,
        _ => 4,
    };
    SubjectRecord {
        participant_id: participant_id(index),
        sex,
        age,
        bmi_pct: (!bmi_missing).then_some(bmi),
        bmi_cat: (!bmi_missing).then_some(bmi_cat),
        ov_ob: (!bmi_missing).then_some(u8::from(bmi_cat >= 3)),
        zsdsi,
        zsdsi_cat: u8::from(zsdsi >= 60.0),
        debq_restr: restr,
        debq_extern: extern_,
        debq_emo: emo,
        debq_restr_cat: u8::from(restr > 2.5),
        debq_extern_cat: u8::from(extern_ > 2.8),
        debq_emo_cat: u8::from(emo > 2.0),
        fa,
        sc,
    }
}

#[derive(Clone, Debug)]
pub struct SynthCohort {
    pub dataset: Dataset,
    pub truth: BTreeMap<String, Vec<Segment>>,
}

pub fn generate_cohort(cfg: &SynthConfig) -> Result<SynthCohort> {
    let labels = assign_labels(cfg)?;
    let mut rng = subject_rng(cfg.seed, 1 << 33);
    let mut order: Vec<usize> = (0..cfg.n_subjects).collect();
    order.shuffle(&mut rng);
    let missing: Vec<usize> = order[..cfg.bmi_missing].to_vec();
    let subjects: Vec<SynthSubject> = labels
        .par_iter()
        .enumerate()
        .map(|(i, &(fa, _))| generate_subject(cfg, i, fa))
        .collect::<Result<_>>()?;
    let records: Vec<SubjectRecord> = labels
        .iter()
        .enumerate()
        .map(|(i, &(fa, sc))| subjective_record(cfg, i, fa, sc, missing.contains(&i)))
        .collect();
    let mut truth = BTreeMap::new();
    let mut series = Vec::with_capacity(subjects.len());
    for s in subjects {
        truth.insert(s.series.participant_id().to_string(), s.truth);
        series.push(s.series);
    }
    Ok(SynthCohort {
        dataset: Dataset::assemble(records, series)?,
        truth,
    })
}

/// Ground truth in the segment CSV schema (end minute exclusive).
pub fn write_truth_csv<W: Write>(out: W, truth: &BTreeMap<String, Vec<Segment>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["participant_id", "kind", "start_minute", "end_minute"])?;
    for (id, segs) in truth {
        for s in segs {
            w.write_record([id.as_str(), s.kind.as_str(), &s.start.to_string(), &s.end.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<truth writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean_cfg() -> SynthConfig {
        SynthConfig {
            noise_sd: 0.0,
            fragmentation: 0.0,
            amplitude_cv: 0.0,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn noise_free_is_square_wave() {
        let cfg = clean_cfg();
        let s = generate_subject(&cfg, 0, 0).unwrap();
        assert_eq!(s.truth.len(), 14);
        for (i, seg) in s.truth.iter().enumerate() {
            let day = i / 2;
            let (a, b) = if i % 2 == 0 {
                (day * 1440, day * 1440 + 960)
            } else {
                (day * 1440 + 960, (day + 1) * 1440)
            };
            assert_eq!((seg.start, seg.end), (a, b));
        }
        let counts: Vec<f64> = s.series.epochs().iter().map(|e| e.count).collect();
        assert!(counts[..960].iter().all(|&c| c == 180.0));
        assert!(counts[960..1440].iter().all(|&c| c == 20.0));
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig::default();
        assert_eq!(generate_subject(&cfg, 5, 1).unwrap(), generate_subject(&cfg, 5, 1).unwrap());
        assert_ne!(
            generate_subject(&cfg, 5, 1).unwrap().series,
            generate_subject(&cfg, 6, 1).unwrap().series
        );
    }

    #[test]
    fn fragmentation_adds_segments() {
        let base = clean_cfg();
        let frag = SynthConfig {
            fragmentation: 0.3,
            ..clean_cfg()
        };
        let a = generate_subject(&base, 0, 0).unwrap().truth.len();
        let b = generate_subject(&frag, 0, 0).unwrap().truth.len();
        assert!(b > a, "{b} vs {a}");
    }

    #[test]
    fn default_labels_mirror_cohort() {
        let labels = assign_labels(&SynthConfig::default()).unwrap();
        assert_eq!(labels.len(), 78);
        assert_eq!(labels.iter().filter(|l| l.0 == 1).count(), 10);
        assert!(labels.iter().filter(|l| l.0 == 1).all(|l| l.1 >= 3));
        let mut sc = [0; 4];
        for l in &labels {
            sc[usize::from(crate::ingest::sc_to_class(l.1).unwrap()) - 1] += 1;
        }
        assert_eq!(sc, [33, 16, 15, 14]);
    }

    #[test]
    fn allocation_sums() {
        assert_eq!(allocate(78, &[33.0, 16.0, 15.0, 14.0]), [33, 16, 15, 14]);
        assert_eq!(allocate(10, &[1.0, 1.0, 1.0, 1.0]).iter().sum::<usize>(), 10);
    }
}
