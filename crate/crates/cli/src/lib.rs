//! Experiment harness for the `qramsim` simulator: configuration files, dataset
//! generation, fidelity sweeps, oracle validation, scaling fits and report commands.
//!
//! The `qramsim` binary is a thin argument parser over this library.

pub mod commands;
pub mod config;
pub mod error;
pub mod fitting;
pub mod output;
pub mod sweep;
pub mod validation;

pub use config::{ExperimentConfig, Overrides, VariantName};
pub use error::{CliError, EXIT_CONFIG, EXIT_OK, EXIT_VALIDATION};
pub use sweep::{gen_dataset, run_sweep, SweepPoint, SweepResult, SweepRow};
