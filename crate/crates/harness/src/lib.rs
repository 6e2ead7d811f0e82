//! Experiment runner and oracle suites for the `diagfim` library.

pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod instances;
pub mod report;
pub mod trace;
pub mod train;
pub mod verify;

pub use config::{DatasetSpec, ExperimentConfig, Task};
pub use error::HarnessError;
pub use experiment::{run_experiment, run_in_memory, GroupStats};
pub use trace::{ExperimentTrace, Quantity, TraceRow};
