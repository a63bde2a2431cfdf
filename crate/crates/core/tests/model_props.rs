// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use actiscope::features::{FeatureMatrix, GroupFilter};
use actiscope::model::{
    exhaustive_select, forward_select, forward_select_holdout, impute_mean, knn_predict, loocv, mcc_binary,
    mcc_multiclass, minmax_scale, ConfusionMatrix, ImputerParams, LeakageMode, ModelConfig, Row, ScalerParams,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn brute_knn(train: &[Vec<f64>], y: &[u32], q: &[f64], k: usize) -> u32 {
    // all pairwise distances, ranked by (distance, row)
    let mut d: Vec<(f64, usize)> = Vec::new();
    for (i, row) in train.iter().enumerate() {
        let mut s = 0.0;
        for (a, b) in row.iter().zip(q) {
            s += (a - b) * (a - b);
        }
        d.push((s.sqrt(), i));
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best = (u32::MAX, 0);
    for label in 0..=*y.iter().max().unwrap() {
        let votes = d[..k].iter().filter(|(_, i)| y[*i] == label).count();
        if votes > best.1 {
            best = (label, votes);
        }
    }
    best.0
}

#[test]
fn six_point_planar_fixture() {
    let train = vec![
        vec![0.0, 0.0],
        vec![1.0, 0.2],
        vec![0.3, 1.1],
        vec![3.0, 3.0],
        vec![2.6, 3.4],
        vec![3.5, 2.2],
    ];
    let y = [0, 0, 0, 1, 1, 1];
    let mut rng = common::rng(377);
    for _ in 0..200 {
        let q = [rng.random_range(-1.0..4.5), rng.random_range(-1.0..4.5)];
        assert_eq!(knn_predict(&train, &y, &q, 3).unwrap(), brute_knn(&train, &y, &q, 3));
    }
}

#[test]
fn global_imputation_of_missing_bmi() {
    let bmi = [Some(40.0), None, Some(70.0), Some(10.0), None, Some(55.0), None, Some(25.0)];
    let rows: Vec<Row> = bmi.iter().map(|v| vec![*v]).collect();
    let (filled, _, params) = impute_mean(&rows, &[]);
    let hand = (40.0 + 70.0 + 10.0 + 55.0 + 25.0) / 5.0;
    assert_eq!(params.means, vec![Some(hand)]);
    for i in [1, 4, 6] {
        assert_eq!(filled[i], vec![hand]);
    }
}

fn matrix(names: Vec<String>, rows: Vec<Row>) -> FeatureMatrix {
    FeatureMatrix {
        ids: (0..rows.len()).map(|i| format!("S{i:03}")).collect(),
        names,
        rows,
    }
}

#[test]
fn shuffled_labels_are_near_null() {
    let mut rng = common::rng(385);
    let rows: Vec<Row> = (0..78)
        .map(|_| (0..6).map(|_| Some(rng.random::<f64>())).collect())
        .collect();
    let mut y: Vec<u32> = (0..78).map(|i| u32::from(i < 10)).collect();
    y.shuffle(&mut rng);
    let r = loocv(&rows, &y, &ModelConfig::default()).unwrap();
    assert!(r.mcc.abs() < 0.3, "{}", r.mcc);
}

#[test]
fn perfect_feature_among_noise_is_picked_first() {
    let mut rng = common::rng(420);
    let y: Vec<u32> = (0..40).map(|i| u32::from(i % 3 == 0)).collect();
    let mut names: Vec<String> = (0..20).map(|j| format!("activity.mean.noise{j:02}")).collect();
    names.push("activity.std.signal".into());
    let rows: Vec<Row> = y
        .iter()
        .map(|&c| {
            let mut r: Row = (0..20).map(|_| Some(rng.random::<f64>())).collect();
            r.push(Some(f64::from(c) + 0.01 * rng.random::<f64>()));
            r
        })
        .collect();
    let m = matrix(names, rows);
    let sel = forward_select(&m, &y, GroupFilter::All, &ModelConfig::default()).unwrap();
    assert_eq!(sel.chosen_features, vec!["activity.std.signal".to_string()]);
    assert_eq!(sel.trajectory.len(), 1);
    assert_eq!(sel.final_report.mcc, 1.0);
    let again = forward_select(&m, &y, GroupFilter::All, &ModelConfig::default()).unwrap();
    assert_eq!(sel, again);
}

fn xor_fixture() -> (FeatureMatrix, Vec<u32>) {
    let mut rng = common::rng(421);
    let n = 120;
    let mut names = vec!["f1".to_string(), "f2".to_string()];
    names.extend((0..18).map(|j| format!("noise{j:02}")));
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for _ in 0..n {
        let row: Row = (0..20).map(|_| Some(rng.random::<f64>())).collect();
        let (a, b) = (row[0].unwrap() > 0.5, row[1].unwrap() > 0.7);
        y.push(u32::from(a ^ b));
        rows.push(row);
    }
    (matrix(names, rows), y)
}

#[test]
fn xor_interaction_recovered_by_forward_selection() {
    let (m, y) = xor_fixture();
    let sel = forward_select(&m, &y, GroupFilter::All, &ModelConfig::default()).unwrap();
    assert!(sel.chosen_features.contains(&"f1".to_string()), "{:?}", sel.chosen_features);
    assert!(sel.chosen_features.contains(&"f2".to_string()), "{:?}", sel.chosen_features);
    assert!(sel.final_report.mcc >= 0.8, "{}", sel.final_report.mcc);
    assert!(sel.trajectory.windows(2).all(|w| w[1].1 > w[0].1));
}

#[test]
fn exhaustive_search_agrees_on_small_pool() {
    let (m, y) = xor_fixture();
    let small = FeatureMatrix {
        ids: m.ids.clone(),
        names: m.names[..6].to_vec(),
        rows: m.rows.iter().map(|r| r[..6].to_vec()).collect(),
    };
    let cfg = ModelConfig::default();
    let ex = exhaustive_select(&small, &y, GroupFilter::All, &cfg).unwrap();
    let greedy = forward_select(&small, &y, GroupFilter::All, &cfg).unwrap();
    assert!(ex.chosen_features.contains(&"f1".to_string()) && ex.chosen_features.contains(&"f2".to_string()));
    assert!(ex.final_report.mcc >= greedy.final_report.mcc - 1e-12 || greedy.chosen_features.len() > 3);
}

#[test]
fn holdout_variant_scores_unseen_rows() {
    let (m, y) = xor_fixture();
    let h = forward_select_holdout(&m, &y, GroupFilter::All, &ModelConfig::default(), 0.25, 1).unwrap();
    assert_eq!(h.holdout_report.confusion.total() as usize, h.holdout_ids.len());
    assert!(!h.holdout_report.pooled);
    assert!(h.holdout_ids.len() >= 25 && h.holdout_ids.len() <= 35);
}

fn confusion(k: usize, counts: &[u64]) -> ConfusionMatrix {
    ConfusionMatrix::new(
        (0..k as u32).collect(),
        counts.chunks(k).map(|c| c.to_vec()).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binary_and_multiclass_mcc_agree(c in prop::collection::vec(0u64..60, 4)) {
        let m = confusion(2, &c);
        prop_assert!((mcc_binary(&m).unwrap() - mcc_multiclass(&m)).abs() <= 1e-12);
    }

    #[test]
    fn mcc_invariant_under_relabeling(c in prop::collection::vec(0u64..30, 16), perm in Just([0usize, 1, 2, 3]).prop_shuffle()) {
        let m = confusion(4, &c);
        let mut p = vec![0u64; 16];
        for i in 0..4 {
            for j in 0..4 {
                p[perm[i] * 4 + perm[j]] = c[i * 4 + j];
            }
        }
        let a = mcc_multiclass(&m);
        let b = mcc_multiclass(&confusion(4, &p));
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&a));
    }

    #[test]
    fn loocv_row_sums_are_class_counts(
        data in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0u32..3), 8..40),
        k in 1usize..6,
    ) {
        let rows: Vec<Row> = data.iter().map(|&(a, b, _)| vec![Some(a), Some(b)]).collect();
        let y: Vec<u32> = data.iter().map(|d| d.2).collect();
        prop_assume!(k < rows.len());
        let cfg = ModelConfig { k_neighbors: k, ..ModelConfig::default() };
        let r = loocv(&rows, &y, &cfg).unwrap();
        for (label, sum) in r.confusion.labels.iter().zip(r.confusion.row_sums()) {
            prop_assert_eq!(sum as usize, y.iter().filter(|&&l| l == *label).count());
        }
        prop_assert_eq!(r.confusion.total() as usize, rows.len());
        prop_assert!((r.accuracy - r.confusion.trace() as f64 / rows.len() as f64).abs() < 1e-15);
        prop_assert_eq!(&r, &loocv(&rows, &y, &cfg).unwrap());
    }

    #[test]
    fn knn_invariant_under_positive_rescaling(
        pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0, 0u32..3), 5..30),
        q in (-10.0f64..10.0, -10.0f64..10.0),
        exponent in -4i32..5,
        k in 1usize..5,
    ) {
        let c = 2f64.powi(exponent);
        let train: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.0, p.1]).collect();
        let scaled: Vec<Vec<f64>> = train.iter().map(|r| r.iter().map(|v| v * c).collect()).collect();
        let y: Vec<u32> = pts.iter().map(|p| p.2).collect();
        prop_assume!(k <= train.len());
        prop_assert_eq!(
            knn_predict(&train, &y, &[q.0, q.1], k).unwrap(),
            knn_predict(&scaled, &y, &[q.0 * c, q.1 * c], k).unwrap()
        );
    }

    #[test]
    fn fold_safe_params_ignore_test_row(
        data in prop::collection::vec(prop::option::of(-50.0f64..50.0), 4..30),
        test in prop::option::of(-1000.0f64..1000.0),
    ) {
        prop_assume!(data.iter().any(Option::is_some));
        let train: Vec<Row> = data.iter().map(|v| vec![*v]).collect();
        let (tx, _, imp) = impute_mean(&train, &[vec![test]]);
        prop_assert_eq!(&imp, &ImputerParams::fit(&train));
        let (_, _, sc) = minmax_scale(&tx, &[vec![test.unwrap_or(0.0)]]);
        prop_assert_eq!(sc, ScalerParams::fit(&tx));
    }
}

#[test]
fn global_mode_differs_only_in_preprocessing() {
    let rows: Vec<Row> = (0..20).map(|i| vec![Some(f64::from(i)), if i % 5 == 0 { None } else { Some(1.0) }]).collect();
    let y: Vec<u32> = (0..20).map(|i| u32::from(i >= 10)).collect();
    let fold = loocv(&rows, &y, &ModelConfig::default()).unwrap();
    let global = loocv(
        &rows,
        &y,
        &ModelConfig {
            leakage_mode: LeakageMode::Global,
            ..ModelConfig::default()
        },
    )
    .unwrap();
    assert_eq!(fold.confusion.total(), global.confusion.total());
    assert!(fold.mcc > 0.8 && global.mcc > 0.8);
}
