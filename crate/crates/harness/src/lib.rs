//! Experiment harness for stochkit: JSON configs in, per-solver CSV records,
//! a JSON summary and SVG plots out.

pub mod config;
pub mod dataset_io;
pub mod error;
pub mod experiment;
pub mod plot;
pub mod records;

pub use config::{ExperimentConfig, ProblemKind};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, Outcome, Overrides, Summary};

/// The bundled demo: SGD and SVRG on a small generated logistic regression.
pub const DEMO_CONFIG: &str = include_str!("../configs/demo.json");

pub fn demo_config() -> ExperimentConfig {
    ExperimentConfig::from_json(DEMO_CONFIG).expect("bundled demo config is valid")
}
