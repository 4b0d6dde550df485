//! Declarative experiment runner: TOML configs, presets, CSV/JSON artifacts
//! and a pass/fail summary per run.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod experiments;
pub mod presets;
pub mod runner;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use presets::Preset;
pub use runner::{run_experiment, RunOptions, Summary};
