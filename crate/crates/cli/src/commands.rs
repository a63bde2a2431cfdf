// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use actiscope::correlate::correlation_table;
use actiscope::features::{extract_dataset, FeatureMatrix, GroupFilter, SUBJECTIVE_PREFIX};
use actiscope::ingest::{parse_actigram, parse_subjects, write_actigram, write_subjects, ActigramSeries, Dataset, SubjectRecord};
use actiscope::model::{
    check_labels, exhaustive_select, forward_select, forward_select_holdout, labels_for, loocv, loocv_with_k,
    select_columns, sweep_k, ConfusionMatrix, EvalReport, ModelConfig, SelectionResult, Target,
};
use actiscope::segmentation::{segment_pipeline, write_segments_csv, Segmentation};
use actiscope::synth::{generate_cohort, write_truth_csv};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{existing, RunConfig, SelectionMode};
use crate::{svg, AppError};

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, AppError> {
    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| AppError::Internal(format!("{}: {e}", cfg.out_dir.display())))?;
    Ok(cfg.out_dir.clone())
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> actiscope::Result<()>) -> Result<(), AppError> {
    let io = |e: std::io::Error| AppError::Internal(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
    f(&mut w)?;
    w.flush().map_err(io)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), AppError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| AppError::Internal(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| AppError::Internal(format!("{}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// Series sorted by participant id.
fn load_series(cfg: &RunConfig) -> Result<Vec<ActigramSeries>, AppError> {
    let path = existing(cfg.inputs.actigram.as_ref(), "actigram")?;
    let mut series = parse_actigram(&path, cfg.inputs.format)?;
    series.sort_by(|a, b| a.participant_id().cmp(b.participant_id()));
    Ok(series)
}

fn load_subjects(cfg: &RunConfig) -> Result<Option<Vec<SubjectRecord>>, AppError> {
    match &cfg.inputs.subjects {
        None => Ok(None),
        Some(p) => Ok(Some(parse_subjects(&existing(Some(p), "subjects")?)?)),
    }
}

fn require_subjects(cfg: &RunConfig) -> Result<Vec<SubjectRecord>, AppError> {
    load_subjects(cfg)?.ok_or_else(|| AppError::Usage("a subject table is required (--subjects)".into()))
}

fn segment_all(cfg: &RunConfig, series: &[ActigramSeries]) -> Result<Vec<Segmentation>, AppError> {
    Ok(series
        .par_iter()
        .map(|s| segment_pipeline(s, &cfg.segmentation))
        .collect::<actiscope::Result<Vec<_>>>()?)
}

fn has_subjective(m: &FeatureMatrix) -> bool {
    m.names.iter().any(|n| n.starts_with(SUBJECTIVE_PREFIX))
}

/// Actimetric matrix from `inputs.features` when given, otherwise computed
/// from the actigram.
fn actimetric_matrix(cfg: &RunConfig) -> Result<FeatureMatrix, AppError> {
    if let Some(p) = &cfg.inputs.features {
        let path = existing(Some(p), "features")?;
        let file = fs::File::open(&path).map_err(|e| AppError::Internal(format!("{}: {e}", path.display())))?;
        return Ok(FeatureMatrix::read_csv(std::io::BufReader::new(file))?);
    }
    let series = load_series(cfg)?;
    let segs = segment_all(cfg, &series)?;
    Ok(FeatureMatrix::from_vectors(&extract_dataset(&segs, &cfg.features))?)
}

/// Matrix with subjective columns, its subjects, and target labels.
fn labeled(cfg: &RunConfig) -> Result<(FeatureMatrix, Vec<u32>), AppError> {
    let subjects = require_subjects(cfg)?;
    let mut matrix = actimetric_matrix(cfg)?;
    if matrix.n_rows() == 0 {
        return Err(actiscope::Error::InsufficientData("feature matrix has no rows".into()).into());
    }
    if !has_subjective(&matrix) {
        matrix = matrix.with_subjective(&subjects)?;
    }
    let y = labels_for(&matrix, &subjects, cfg.model.target)?;
    check_labels(&y)?;
    Ok((matrix, y))
}

pub fn synth(cfg: &RunConfig) -> Result<(), AppError> {
    let cohort = generate_cohort(&cfg.synth)?;
    let dir = out_dir(cfg)?;
    let series: Vec<ActigramSeries> = cohort.dataset.series.values().cloned().collect();
    write_with(&dir.join("actigram.csv"), |w| write_actigram(w, &series))?;
    write_with(&dir.join("subjects.csv"), |w| write_subjects(w, &cohort.dataset.subjects))?;
    write_with(&dir.join("truth_segments.csv"), |w| write_truth_csv(w, &cohort.truth))?;
    let c = cohort.dataset.class_counts();
    println!(
        "synthesized {} subjects x {} days (seed {}); FA 0/1 = {}/{}; SC classes = {}/{}/{}/{}",
        cfg.synth.n_subjects, cfg.synth.days, cfg.synth.seed, c.fa[0], c.fa[1], c.sc[0], c.sc[1], c.sc[2], c.sc[3]
    );
    Ok(())
}

pub fn ingest(cfg: &RunConfig) -> Result<(), AppError> {
    let series = load_series(cfg)?;
    let subjects = load_subjects(cfg)?;
    let dir = out_dir(cfg)?;
    for s in &series {
        println!(
            "{}: {} minutes recorded, {} gaps, span {} minutes",
            s.participant_id(),
            s.epochs().len(),
            s.gaps().len(),
            s.duration_minutes()
        );
    }
    write_with(&dir.join("actigram.csv"), |w| write_actigram(w, &series))?;
    if let Some(subjects) = subjects {
        let ds = Dataset::assemble(subjects, series)?;
        write_with(&dir.join("subjects.csv"), |w| write_subjects(w, &ds.subjects))?;
        let c = ds.class_counts();
        println!(
            "{} subjects; FA 0/1 = {}/{}; SC classes = {}/{}/{}/{}",
            ds.subjects.len(),
            c.fa[0],
            c.fa[1],
            c.sc[0],
            c.sc[1],
            c.sc[2],
            c.sc[3]
        );
    }
    Ok(())
}

pub fn segment(cfg: &RunConfig, with_svg: bool) -> Result<(), AppError> {
    let series = load_series(cfg)?;
    let segs = segment_all(cfg, &series)?;
    let dir = out_dir(cfg)?;
    write_with(&dir.join("segments.csv"), |w| write_segments_csv(w, &segs))?;
    if with_svg {
        let svg_dir = dir.join("svg");
        fs::create_dir_all(&svg_dir).map_err(|e| AppError::Internal(format!("{}: {e}", svg_dir.display())))?;
        for sg in &segs {
            let path = svg_dir.join(format!("{}.svg", sg.participant_id));
            fs::write(&path, svg::render(sg)).map_err(|e| AppError::Internal(format!("{}: {e}", path.display())))?;
        }
    }
    for sg in &segs {
        println!(
            "{}: {} activity / {} rest segments",
            sg.participant_id,
            sg.of_kind(actiscope::segmentation::SegmentKind::Activity).count(),
            sg.of_kind(actiscope::segmentation::SegmentKind::Rest).count()
        );
    }
    Ok(())
}

pub fn features(cfg: &RunConfig) -> Result<(), AppError> {
    let mut matrix = actimetric_matrix(cfg)?;
    if let Some(subjects) = load_subjects(cfg)? {
        if !has_subjective(&matrix) {
            matrix = matrix.with_subjective(&subjects)?;
        }
    }
    let dir = out_dir(cfg)?;
    write_with(&dir.join("features.csv"), |w| matrix.write_csv(w))?;
    if cfg.inputs.features.is_none() {
        write_json(&dir.join("feature_grids.json"), &cfg.features)?;
    }
    println!("{} participants x {} features", matrix.n_rows(), matrix.names.len());
    Ok(())
}

#[derive(Serialize)]
struct EvaluateOutput<'a> {
    target: Target,
    group: GroupFilter,
    n_subjects: usize,
    k_neighbors: usize,
    features: Vec<String>,
    #[serde(flatten)]
    report: EvalReport,
    trajectory: Vec<(String, f64)>,
    k_sweep: Option<Vec<(usize, f64)>>,
    config: &'a ModelConfig,
}

fn run_selection(cfg: &RunConfig, matrix: &FeatureMatrix, y: &[u32]) -> Result<SelectionResult, AppError> {
    let group = cfg.selection.group;
    Ok(match cfg.selection.mode {
        SelectionMode::Forward => forward_select(matrix, y, group, &cfg.model)?,
        SelectionMode::Exhaustive => exhaustive_select(matrix, y, group, &cfg.model)?,
        SelectionMode::Holdout => {
            return Err(AppError::Usage(
                "holdout selection reports a separate score; run `select` instead".into(),
            ))
        }
    })
}

pub fn evaluate(cfg: &RunConfig, select: bool, sweep: bool) -> Result<(), AppError> {
    let (matrix, y) = labeled(cfg)?;
    let (features, trajectory) = if select {
        let sel = run_selection(cfg, &matrix, &y)?;
        (sel.chosen_features, sel.trajectory)
    } else {
        let cols = matrix.columns_matching(cfg.selection.group);
        (cols.iter().map(|&j| matrix.names[j].clone()).collect(), Vec::new())
    };
    if features.is_empty() {
        return Err(actiscope::Error::InsufficientData(format!("no features in group {:?}", cfg.selection.group)).into());
    }
    let cols: Vec<usize> = features
        .iter()
        .map(|f| matrix.column_index(f).expect("known column"))
        .collect();
    let rows = select_columns(&matrix.rows, &cols);
    let (k, report, k_sweep) = if sweep {
        let (k, grid) = sweep_k(&rows, &y, &cfg.model)?;
        (k, loocv_with_k(&rows, &y, k, cfg.model.leakage_mode)?, Some(grid))
    } else {
        (cfg.model.k_neighbors, loocv(&rows, &y, &cfg.model)?, None)
    };
    println!(
        "MCC {:.4} accuracy {:.4} (target {:?}, group {:?}, k {k}, {} features, {} subjects)",
        report.mcc,
        report.accuracy,
        cfg.model.target,
        cfg.selection.group,
        features.len(),
        y.len()
    );
    let out = EvaluateOutput {
        target: cfg.model.target,
        group: cfg.selection.group,
        n_subjects: y.len(),
        k_neighbors: k,
        features,
        report,
        trajectory,
        k_sweep,
        config: &cfg.model,
    };
    write_json(&out_dir(cfg)?.join("report.json"), &out)
}

fn print_trajectory(traj: &[(String, f64)]) {
    for (i, (name, mcc)) in traj.iter().enumerate() {
        println!("{:>2}. {name}  MCC {mcc:.4}", i + 1);
    }
}

pub fn select(cfg: &RunConfig) -> Result<(), AppError> {
    let (matrix, y) = labeled(cfg)?;
    let path = out_dir(cfg)?.join("selection.json");
    if cfg.selection.mode == SelectionMode::Holdout {
        let h = forward_select_holdout(
            &matrix,
            &y,
            cfg.selection.group,
            &cfg.model,
            cfg.selection.holdout_fraction,
            cfg.selection.seed,
        )?;
        print_trajectory(&h.selection.trajectory);
        println!(
            "selection MCC {:.4}; holdout MCC {:.4} on {} subjects",
            h.selection.final_report.mcc,
            h.holdout_report.mcc,
            h.holdout_ids.len()
        );
        return write_json(&path, &h);
    }
    let sel = run_selection(cfg, &matrix, &y)?;
    print_trajectory(&sel.trajectory);
    println!(
        "final MCC {:.4} with {} features",
        sel.final_report.mcc,
        sel.chosen_features.len()
    );
    write_json(&path, &sel)
}

pub fn correlate(cfg: &RunConfig) -> Result<(), AppError> {
    let subjects = require_subjects(cfg)?;
    let mut matrix = actimetric_matrix(cfg)?;
    if !has_subjective(&matrix) {
        matrix = matrix.with_subjective(&subjects)?;
    }
    let selected: Vec<String> = if cfg.correlate.features.is_empty() {
        matrix
            .columns_matching(cfg.selection.group)
            .into_iter()
            .map(|j| matrix.names[j].clone())
            .filter(|n| !n.starts_with(SUBJECTIVE_PREFIX))
            .collect()
    } else {
        cfg.correlate.features.clone()
    };
    let subjective: Vec<&str> = cfg.correlate.subjective.iter().map(String::as_str).collect();
    let table = correlation_table(&matrix, &subjective, &selected)?;
    let dir = out_dir(cfg)?;
    write_with(&dir.join("correlations.csv"), |w| table.write_csv(w))?;
    write_with(&dir.join("correlations_long.csv"), |w| table.write_long_csv(w))?;
    let cells = table.cells.iter().flatten();
    let significant = cells.clone().filter(|c| c.is_some_and(|c| c.p < 0.05)).count();
    println!(
        "{} features x {} scores; {significant} correlations with p < 0.05",
        table.features.len(),
        table.subjective.len()
    );
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfusionInput {
    labels: Option<Vec<u32>>,
    counts: Vec<Vec<u64>>,
}

pub fn metrics(cfg: &RunConfig, input: &Path) -> Result<(), AppError> {
    let text = fs::read_to_string(input).map_err(|e| AppError::Usage(format!("{}: {e}", input.display())))?;
    let parsed: ConfusionInput = serde_json::from_str(&text).map_err(actiscope::Error::from)?;
    let labels = parsed
        .labels
        .unwrap_or_else(|| (0..parsed.counts.len() as u32).collect());
    let cm = ConfusionMatrix::new(labels, parsed.counts)?;
    let report = EvalReport::from_confusion(cm, false);
    println!("MCC {:.4} accuracy {:.4}", report.mcc, report.accuracy);
    for c in &report.per_class {
        println!(
            "class {}: sensitivity {:.3} specificity {:.3} precision {:.3} F1 {:.3}",
            c.label, c.sensitivity, c.specificity, c.precision, c.f1
        );
    }
    write_json(&out_dir(cfg)?.join("metrics.json"), &report)
}
