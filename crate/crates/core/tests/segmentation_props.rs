// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use actiscope::ingest::{ActigramSeries, MinuteEpoch};
use actiscope::segmentation::{
    classify_segments, detect_change_points, merge_segments, moving_average, segment_cleaned, segment_pipeline,
    Bandwidth, CleanedSeries, CpdConfig, CpdKernel, Segment, SegmentKind, SegmentationConfig,
};
use chrono::DateTime;
use proptest::prelude::*;

fn series(values: &[f64]) -> ActigramSeries {
    let epochs = values
        .iter()
        .enumerate()
        .map(|(m, &c)| MinuteEpoch {
            minute_index: m as u32,
            count: c,
        })
        .collect();
    ActigramSeries::new("T", DateTime::parse_from_rfc3339("2024-01-01T07:00:00Z").unwrap(), epochs).unwrap()
}

fn square_wave(days: usize, noise: f64, seed: u64) -> Vec<f64> {
    let mut rng = common::rng(seed);
    let z = common::gaussian(&mut rng, days * 1440);
    (0..days * 1440)
        .map(|m| {
            let level = if m % 1440 < 960 { 100.0 } else { 0.0 };
            (level + noise * z[m]).max(0.0)
        })
        .collect()
}

fn truth_boundaries(days: usize) -> Vec<i64> {
    (0..days)
        .flat_map(|d| [d as i64 * 1440 + 960, (d as i64 + 1) * 1440])
        .filter(|&b| b < days as i64 * 1440)
        .collect()
}

fn check_square_wave(noise: f64, tolerance: i64) {
    let x = square_wave(7, noise, 178);
    let sg = segment_pipeline(&series(&x), &SegmentationConfig::default()).unwrap();
    assert_eq!(sg.segments.len(), 14, "{:?}", sg.segments);
    for (i, s) in sg.segments.iter().enumerate() {
        let want = if i % 2 == 0 { SegmentKind::Activity } else { SegmentKind::Rest };
        assert_eq!(s.kind, want);
    }
    let truth = truth_boundaries(7);
    for (seg, b) in sg.segments.iter().skip(1).zip(&truth) {
        let (start, _) = sg.original_span(seg);
        assert!((i64::from(start) - b).abs() <= tolerance, "boundary {start} vs {b}");
    }
}

#[test]
fn noiseless_square_wave_gives_fourteen_segments() {
    check_square_wave(0.0, 30);
}

#[test]
fn noisy_square_wave_gives_fourteen_segments() {
    check_square_wave(10.0, 45);
}

#[test]
fn noiseless_square_wave_breakpoints_at_default_penalty() {
    let x = square_wave(7, 0.0, 0);
    let smoothed = moving_average(&x, 60);
    let bps = detect_change_points(&smoothed, &SegmentationConfig::default().cpd());
    assert_eq!(bps.len(), 14);
}

#[test]
fn moving_average_matches_naive_loop() {
    let mut rng = common::rng(144);
    let x = common::gaussian(&mut rng, 3000);
    for w in [1, 2, 59, 60, 61] {
        let got = moving_average(&x, w);
        for (i, g) in got.iter().enumerate() {
            let lo = i.saturating_sub((w - 1) / 2);
            let hi = (i + w / 2).min(x.len() - 1);
            let mut s = 0.0;
            for v in &x[lo..=hi] {
                s += v;
            }
            let want = s / (hi - lo + 1) as f64;
            assert!((g - want).abs() < 1e-9, "w={w} i={i}");
        }
    }
}

#[test]
fn linear_step_matches_dp_oracle() {
    let mut x = vec![0.0; 1000];
    x.extend(vec![100.0; 1000]);
    let cfg = CpdConfig {
        kernel: CpdKernel::Linear,
        penalty: 1000.0,
        bandwidth: Bandwidth::MedianHeuristic,
    };
    let got = detect_change_points(&x, &cfg);
    assert_eq!(got, common::cpd_dp(&x, None, 1000.0));
    assert_eq!(got.len(), 2);
    assert!((got[0] as i64 - 1000).abs() <= 5);
}

#[test]
fn staircase_matches_dp_oracle() {
    let mut rng = common::rng(153);
    let noise = common::gaussian(&mut rng, 1500);
    let x: Vec<f64> = (0..1500)
        .map(|i| (i / 500) as f64 * 10.0 + noise[i])
        .collect();
    for (kernel, h) in [(CpdKernel::Linear, None), (CpdKernel::Rbf, Some(2.0))] {
        let cfg = CpdConfig {
            kernel,
            penalty: 50.0,
            bandwidth: h.map_or(Bandwidth::MedianHeuristic, Bandwidth::Fixed),
        };
        let got = detect_change_points(&x, &cfg);
        assert_eq!(got, common::cpd_dp(&x, h, 50.0));
        assert_eq!(got.len(), 3, "{kernel:?}: {got:?}");
        assert!((got[0] as i64 - 500).abs() <= 5 && (got[1] as i64 - 1000).abs() <= 5);
    }
}

#[test]
fn planted_square_wave_labels() {
    let x = square_wave(3, 0.0, 0);
    let smoothed = moving_average(&x, 60);
    let bps = detect_change_points(&smoothed, &SegmentationConfig::default().cpd());
    let segs = classify_segments(&smoothed, &bps, 75.0 * 0.75);
    let kinds: Vec<SegmentKind> = segs.iter().map(|s| s.kind).collect();
    let want: Vec<SegmentKind> = (0..6)
        .map(|i| if i % 2 == 0 { SegmentKind::Activity } else { SegmentKind::Rest })
        .collect();
    assert_eq!(kinds, want);
}

fn random_segments(lengths: &[usize], first_active: bool) -> Vec<Segment> {
    let mut start = 0;
    let mut kind = if first_active { SegmentKind::Activity } else { SegmentKind::Rest };
    lengths
        .iter()
        .map(|&len| {
            let s = Segment {
                kind,
                start,
                end: start + len,
            };
            start += len;
            kind = kind.flip();
            s
        })
        .collect()
}

fn assert_partition(segs: &[Segment], n: usize) {
    assert_eq!(segs.first().map(|s| s.start), Some(0));
    assert_eq!(segs.last().map(|s| s.end), Some(n));
    for w in segs.windows(2) {
        assert_eq!(w[0].end, w[1].start);
        assert_ne!(w[0].kind, w[1].kind);
    }
    assert!(segs.iter().all(|s| s.end > s.start));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn merge_is_idempotent_and_partitions(
        lengths in prop::collection::vec(1usize..700, 1..40),
        first_active in any::<bool>(),
    ) {
        let cfg = SegmentationConfig::default();
        let once = merge_segments(&random_segments(&lengths, first_active), &cfg);
        let total: usize = lengths.iter().sum();
        assert_partition(&once, total);
        prop_assert_eq!(merge_segments(&once, &cfg), once);
    }

    #[test]
    fn pipeline_partitions_cleaned_series(
        blocks in prop::collection::vec((30usize..600, 0.0f64..300.0), 3..12),
        seed in 0u64..1000,
    ) {
        let mut rng = common::rng(seed);
        let mut values = Vec::new();
        for &(len, level) in &blocks {
            for z in common::gaussian(&mut rng, len) {
                values.push((level + 20.0 * z).max(0.0));
            }
        }
        let n = values.len();
        let cleaned = CleanedSeries { minutes: (0..n as u32).collect(), values };
        let sg = segment_cleaned("P", cleaned, &SegmentationConfig::default());
        assert_partition(&sg.segments, n);
    }

    #[test]
    fn labeling_is_scale_invariant(
        blocks in prop::collection::vec((60usize..500, 1.0f64..300.0), 3..10),
        exponent in -3i32..4,
        seed in 0u64..1000,
    ) {
        let mut rng = common::rng(seed);
        let mut values = Vec::new();
        for &(len, level) in &blocks {
            for z in common::gaussian(&mut rng, len) {
                values.push((level + 15.0 * z).max(0.0));
            }
        }
        let c = 2f64.powi(exponent);
        let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
        let n = values.len();
        let cfg = SegmentationConfig::default();
        let a = segment_cleaned("P", CleanedSeries { minutes: (0..n as u32).collect(), values }, &cfg);
        let b = segment_cleaned("P", CleanedSeries { minutes: (0..n as u32).collect(), values: scaled }, &cfg);
        prop_assert_eq!(&a.breakpoints, &b.breakpoints);
        prop_assert_eq!(&a.segments, &b.segments);
    }

    #[test]
    fn pelt_equals_dp_on_short_sequences(
        x in prop::collection::vec(-5.0f64..5.0, 2..150),
        penalty in 0.5f64..10.0,
        h in 0.3f64..3.0,
    ) {
        let rbf = CpdConfig { kernel: CpdKernel::Rbf, penalty, bandwidth: Bandwidth::Fixed(h) };
        prop_assert_eq!(detect_change_points(&x, &rbf), common::cpd_dp(&x, Some(h), penalty));
        let lin = CpdConfig { kernel: CpdKernel::Linear, penalty: penalty * 10.0, bandwidth: Bandwidth::MedianHeuristic };
        prop_assert_eq!(detect_change_points(&x, &lin), common::cpd_dp(&x, None, penalty * 10.0));
    }
}
