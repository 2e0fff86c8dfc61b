//! Batch runner: config loading, experiment dispatch and report output.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, Mode};
pub use error::{CliError, Result};
pub use report::{emit_report, Format};
pub use run::{run_experiment, ReportBundle};
