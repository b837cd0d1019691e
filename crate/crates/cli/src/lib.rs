//! Benchmark harness library behind the `asap-bench` binary: experiment
//! configuration, single-cell runs and the full preset × kernel grid, all
//! emitting CSV artifacts (per-run traces, a summary log, a median/IQR table).

pub mod config;
pub mod runner;

pub use config::{Algorithm, Experiment, ExperimentConfig, ScheduleOverride};
pub use runner::{execute, run_experiment, run_grid, RunOutput, SummaryRow, TableRow};
