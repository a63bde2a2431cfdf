// SPDX-License-Identifier: MIT OR Apache-2.0

//! Python bindings: metrics, segmentation, feature extraction, entropies,
//! LOOCV and correlation on plain lists.

use actiscope::correlate::pearson_r;
use actiscope::features::entropy;
use actiscope::features::{extract_all, EntropyGrids};
use actiscope::ingest::{ActigramSeries, MinuteEpoch};
use actiscope::model::{loocv, ConfusionMatrix, EvalReport, LeakageMode, ModelConfig};
use actiscope::segmentation::{segment_pipeline, SegmentationConfig};
use actiscope::synth::{generate_cohort, SynthConfig};
use chrono::DateTime;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: actiscope::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn series(counts: Vec<f64>, start: &str) -> PyResult<ActigramSeries> {
    let start = DateTime::parse_from_rfc3339(start)
        .map_err(|e| PyValueError::new_err(format!("start time {start:?}: {e}")))?;
    let epochs = counts
        .into_iter()
        .enumerate()
        .map(|(m, count)| MinuteEpoch {
            minute_index: m as u32,
            count,
        })
        .collect();
    ActigramSeries::new("py", start, epochs).map_err(py_err)
}

fn report_dict<'py>(py: Python<'py>, r: &EvalReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("mcc", r.mcc)?;
    d.set_item("accuracy", r.accuracy)?;
    d.set_item("labels", r.confusion.labels.clone())?;
    d.set_item("confusion", r.confusion.counts.clone())?;
    d.set_item("degenerate", r.degenerate)?;
    let per_class = PyDict::new(py);
    for c in &r.per_class {
        let m = PyDict::new(py);
        m.set_item("sensitivity", c.sensitivity)?;
        m.set_item("specificity", c.specificity)?;
        m.set_item("precision", c.precision)?;
        m.set_item("f1", c.f1)?;
        per_class.set_item(c.label, m)?;
    }
    d.set_item("per_class", per_class)?;
    Ok(d)
}

/// Metrics of a confusion matrix (rows actual, columns predicted).
#[pyfunction]
#[pyo3(signature = (counts, labels=None))]
fn confusion_metrics<'py>(
    py: Python<'py>,
    counts: Vec<Vec<u64>>,
    labels: Option<Vec<u32>>,
) -> PyResult<Bound<'py, PyDict>> {
    let labels = labels.unwrap_or_else(|| (0..counts.len() as u32).collect());
    let cm = ConfusionMatrix::new(labels, counts).map_err(py_err)?;
    report_dict(py, &EvalReport::from_confusion(cm, false))
}

/// Segments contiguous minute counts; returns `(kind, start, end)` with
/// end exclusive.
#[pyfunction]
#[pyo3(signature = (counts, start="1970-01-01T00:00:00Z"))]
fn segment(counts: Vec<f64>, start: &str) -> PyResult<Vec<(String, u32, u32)>> {
    let s = series(counts, start)?;
    let sg = segment_pipeline(&s, &SegmentationConfig::default()).map_err(py_err)?;
    Ok(sg
        .segments
        .iter()
        .map(|seg| {
            let (a, b) = sg.original_span(seg);
            (seg.kind.as_str().to_string(), a, b)
        })
        .collect())
}

/// The 256 actimetric features of one recording, `None` where undefined.
#[pyfunction]
#[pyo3(signature = (counts, start="1970-01-01T00:00:00Z"))]
fn extract_features(counts: Vec<f64>, start: &str) -> PyResult<Vec<(String, Option<f64>)>> {
    let s = series(counts, start)?;
    let sg = segment_pipeline(&s, &SegmentationConfig::default()).map_err(py_err)?;
    Ok(extract_all(&sg, &EntropyGrids::default()).entries)
}

#[pyfunction]
#[pyo3(signature = (x, m=3, tau=1))]
fn perm_entropy(x: Vec<f64>, m: usize, tau: usize) -> Option<f64> {
    entropy::perm_entropy(&x, m, tau)
}

#[pyfunction]
#[pyo3(signature = (x, m=2, r=0.2, n=2.0, tau=1))]
fn fuzzy_entropy(x: Vec<f64>, m: usize, r: f64, n: f64, tau: usize) -> Option<f64> {
    entropy::fuzzy_entropy(&x, m, r, n, tau)
}

#[pyfunction]
#[pyo3(signature = (x, m=2, bins=128))]
fn dist_entropy(x: Vec<f64>, m: usize, bins: usize) -> Option<f64> {
    entropy::dist_entropy(&x, m, bins)
}

#[pyfunction]
#[pyo3(signature = (x, m=3, tau=1))]
fn svd_entropy(x: Vec<f64>, m: usize, tau: usize) -> Option<f64> {
    entropy::svd_entropy(&x, m, tau)
}

#[pyfunction]
#[pyo3(signature = (x, sectors=4, tau=1))]
fn phase_entropy(x: Vec<f64>, sectors: usize, tau: usize) -> Option<f64> {
    entropy::phase_entropy(&x, sectors, tau)
}

/// Pooled leave-one-out KNN; `None` cells are imputed inside each fold.
#[pyfunction]
#[pyo3(signature = (rows, y, k=5, fold_safe=true))]
fn loocv_knn<'py>(
    py: Python<'py>,
    rows: Vec<Vec<Option<f64>>>,
    y: Vec<u32>,
    k: usize,
    fold_safe: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = ModelConfig {
        k_neighbors: k,
        leakage_mode: if fold_safe { LeakageMode::FoldSafe } else { LeakageMode::Global },
        ..ModelConfig::default()
    };
    let r = loocv(&rows, &y, &cfg).map_err(py_err)?;
    report_dict(py, &r)
}

/// `(r, p, n)` with pairwise deletion of missing values.
#[pyfunction]
fn pearson(x: Vec<Option<f64>>, y: Vec<Option<f64>>) -> PyResult<(f64, f64, usize)> {
    let c = pearson_r(&x, &y).map_err(py_err)?;
    Ok((c.r, c.p, c.n))
}

/// Synthetic cohort as `(actigram_csv, subjects_csv)` text.
#[pyfunction]
#[pyo3(signature = (seed=42, n_subjects=78, days=7, fa_positive=10))]
fn synth_cohort(seed: u64, n_subjects: usize, days: usize, fa_positive: usize) -> PyResult<(String, String)> {
    let cfg = SynthConfig {
        seed,
        n_subjects,
        days,
        fa_positive,
        bmi_missing: SynthConfig::default().bmi_missing.min(n_subjects),
        ..SynthConfig::default()
    };
    let cohort = generate_cohort(&cfg).map_err(py_err)?;
    let series: Vec<ActigramSeries> = cohort.dataset.series.values().cloned().collect();
    let (mut a, mut s) = (Vec::new(), Vec::new());
    actiscope::ingest::write_actigram(&mut a, &series).map_err(py_err)?;
    actiscope::ingest::write_subjects(&mut s, &cohort.dataset.subjects).map_err(py_err)?;
    Ok((
        String::from_utf8(a).expect("utf-8 csv"),
        String::from_utf8(s).expect("utf-8 csv"),
    ))
}

#[pymodule]
fn actiscope_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(confusion_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(segment, m)?)?;
    m.add_function(wrap_pyfunction!(extract_features, m)?)?;
    m.add_function(wrap_pyfunction!(perm_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(fuzzy_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(dist_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(svd_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(phase_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(loocv_knn, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(synth_cohort, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
