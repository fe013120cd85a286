//! Experiment runner for `nlsim-core`: configuration, dispatch, and the
//! results table format.

pub mod app;
pub mod config;
pub mod error;
pub mod experiment;
pub mod results;

pub use config::{Experiment, ExperimentConfig, Opponent, Settings, StatePreset};
pub use error::{CliError, Result};
pub use experiment::{run, sweep, Artifact, Report, SweepParam};
pub use results::{Metrics, ResultRow, ResultTable};
