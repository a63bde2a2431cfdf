// SPDX-License-Identifier: MIT OR Apache-2.0

//! Wrist-actigraphy analysis: minute binning, activity/rest segmentation,
//! per-segment statistical and entropy features, and KNN classification
//! evaluated by leave-one-out cross-validation and Matthews correlation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlate;
pub mod error;
pub mod ingest;
pub mod features;
pub mod model;
pub mod segmentation;
pub mod synth;

pub use error::{Error, Result};
