//! Experiment driver for `jmgt-core`: flat key=value configuration, CSV and
//! gnuplot output, run manifests, parallel sweeps and the acceptance suite.

pub mod acceptance;
pub mod commands;
pub mod config;
mod error;
pub mod output;
pub mod parallel;

pub use error::{LabError, LabResult};
