//! Config-driven Monte Carlo experiments on top of `perturb-lloyd`.

pub mod config;
pub mod error;
pub mod runner;
pub mod sweep;

pub use config::{ExperimentConfig, ExperimentKind, Params};
pub use error::{SimError, SimResult};
pub use runner::{run_experiment, ExperimentOutput, ReplicateRecord, Summary};
pub use sweep::{sweep, SweepOutput};
