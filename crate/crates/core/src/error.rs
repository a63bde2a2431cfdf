// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty series: {0}")]
    EmptySeries(String),

    #[error("format error at row {row}: {message}")]
    Format { row: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("duplicate minute {minute} at row {row}")]
    DuplicateMinute { row: usize, minute: u32 },

    #[error("negative count {value} at row {row}")]
    NegativeCount { row: usize, value: f64 },

    #[error("row {row}: field `{field}` out of range: {value}")]
    OutOfRange {
        row: usize,
        field: &'static str,
        value: String,
    },

    #[error("row {row}: required field `{field}` is missing")]
    MissingField { row: usize, field: &'static str },

    #[error("series for `{0}` is empty after cleaning")]
    EmptyAfterCleaning(String),

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dataset mismatch: {0}")]
    Dataset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(row: usize, message: impl Into<String>) -> Self {
        Error::Format {
            row,
            message: message.into(),
        }
    }

    /// Process exit code for this error: 2 input format, 3 empty data,
    /// 4 degenerate labels, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Format { .. }
            | Error::Schema(_)
            | Error::DuplicateMinute { .. }
            | Error::NegativeCount { .. }
            | Error::OutOfRange { .. }
            | Error::MissingField { .. }
            | Error::Dataset(_)
            | Error::Csv(_)
            | Error::Json(_) => 2,
            Error::EmptySeries(_) | Error::EmptyAfterCleaning(_) => 3,
            Error::DegenerateLabels(_) => 4,
            _ => 1,
        }
    }
}
