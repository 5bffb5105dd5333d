//! Experiment harness for the hybrid Ising classifier: dataset lookup, run
//! configuration, sweeps, baselines and CSV output.

pub mod baseline;
pub mod config;
pub mod datasets;
pub mod error;
pub mod fixtures;
pub mod pca;
pub mod results;
pub mod runs;

pub use error::{ExperimentError, Result};
