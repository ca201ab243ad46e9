//! Configuration and orchestration of the experiments, shared by the `sos`
//! binary and the acceptance tests.

pub mod config;
pub mod experiments;
pub mod runner;
pub mod table;

pub use config::{
    resolve_h, ConfigError, ConfigOverrides, Experiment, ExperimentConfig, HMode, Initial,
};
pub use runner::{run, RunOutcome, CODE_VERSION};
