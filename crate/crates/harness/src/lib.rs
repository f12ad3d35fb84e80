//! Experiment harness for `safe-rl-core`: model and config files, seeded
//! multi-replication runs with CSV logs, environment reports and the
//! invariant suite.

pub mod config;
pub mod describe;
pub mod envs;
mod error;
pub mod format;
pub mod output;
pub mod runner;
pub mod verify;

pub use config::{Agent, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use runner::{run_experiment, Manifest};
