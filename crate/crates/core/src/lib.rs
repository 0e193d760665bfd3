//! Categorical voltage-excursion prediction.
//!
//! Voltage series are labelled against operator bounds, turned into per-bus
//! supervised sets (a lagged window predicting the label `h` steps ahead),
//! scored by one of seven probabilistic classifiers, thresholded at the
//! G-means optimal `beta` and evaluated with confusion-matrix metrics.

pub mod calibration;
pub mod cli;
pub mod config;
pub mod error;
pub mod features;
pub mod ingest;
pub mod labeling;
pub mod metrics;
pub mod models;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
