//! Simulation harness: configuration, the per-run protocol, Monte Carlo
//! aggregation and result files.

pub mod config;
pub mod montecarlo;
pub mod output;
pub mod protocol;

pub use config::{ExperimentConfig, Profile, Scheme, SweepAxis};
pub use montecarlo::{evaluate, run_sweep, MetricsRow};
pub use protocol::{run_protocol, scheme_design, CycleOutcome, RunStreams, Scenario};
