//! Experiment engine, CSV output and validation suites behind the CLI.

pub mod config;
pub mod experiment;
pub mod output;
pub mod validate;

pub use config::{ExperimentConfig, Scenario, Settings};
pub use experiment::{run_experiment, AggregateRow, CellInfo, ExperimentOutput, TrialRow};
pub use output::{emit_aggregates, emit_csv, write_outputs};
pub use validate::{validate, Report, Suite};
