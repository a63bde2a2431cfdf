// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};

use actiscope::correlate::CORRELATION_SUBJECTIVE;
use actiscope::features::{EntropyGrids, GroupFilter};
use actiscope::ingest::InputFormat;
use actiscope::model::ModelConfig;
use actiscope::segmentation::SegmentationConfig;
use actiscope::synth::SynthConfig;
use serde::{Deserialize, Serialize};

use crate::AppError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    /// Actigram CSV, minute-binned or raw depending on `format`.
    pub actigram: Option<PathBuf>,
    pub format: InputFormat,
    /// Subject table with questionnaire columns and targets.
    pub subjects: Option<PathBuf>,
    /// Precomputed feature CSV; skips segmentation and extraction.
    pub features: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    #[default]
    Forward,
    Exhaustive,
    Holdout,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub mode: SelectionMode,
    pub group: GroupFilter,
    /// Share of subjects kept out of the search in holdout mode.
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            mode: SelectionMode::Forward,
            group: GroupFilter::All,
            holdout_fraction: 0.25,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelateConfig {
    /// Feature columns to correlate; empty means every actimetric column
    /// accepted by the group filter.
    pub features: Vec<String>,
    pub subjective: Vec<String>,
}

impl Default for CorrelateConfig {
    fn default() -> Self {
        Self {
            features: Vec::new(),
            subjective: CORRELATION_SUBJECTIVE.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Inputs,
    pub out_dir: PathBuf,
    pub segmentation: SegmentationConfig,
    pub features: EntropyGrids,
    pub model: ModelConfig,
    pub selection: SelectionConfig,
    pub correlate: CorrelateConfig,
    pub synth: SynthConfig,
    /// `env_logger` filter string, e.g. `info` or `actiscope=debug`.
    pub log_level: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            inputs: Inputs::default(),
            out_dir: PathBuf::from("out"),
            segmentation: SegmentationConfig::default(),
            features: EntropyGrids::default(),
            model: ModelConfig::default(),
            selection: SelectionConfig::default(),
            correlate: CorrelateConfig::default(),
            synth: SynthConfig::default(),
            log_level: "warn".into(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = fs::read_to_string(path).map_err(|e| AppError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| AppError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), AppError> {
        self.segmentation.validate()?;
        self.features.validate()?;
        self.model.validate()?;
        self.synth.validate()?;
        if !(self.selection.holdout_fraction > 0.0 && self.selection.holdout_fraction < 1.0) {
            return Err(AppError::Usage("selection.holdout_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Returns the configured path after checking that it exists.
pub fn existing(path: Option<&PathBuf>, what: &str) -> Result<PathBuf, AppError> {
    let p = path.ok_or_else(|| AppError::Usage(format!("no {what} input given (config `inputs` or flag)")))?;
    if !p.exists() {
        return Err(AppError::Usage(format!("{what} input {} does not exist", p.display())));
    }
    Ok(p.clone())
}
