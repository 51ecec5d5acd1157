//! Experiment harness: configs, trials, batches, sweeps, drift checks and
//! result export.

pub mod batch;
pub mod config;
pub mod drift;
pub mod experiment;
pub mod export;
pub mod stats;
pub mod sweep;
pub mod trial;

pub use batch::{run_batch, summarize, with_workers, BatchResult, BatchSummary};
pub use config::{ExperimentConfig, GraphKind, GraphSpec, InitialCondition, Placement, TheoryParams};
pub use drift::{drift_check, DriftCheckConfig, DriftReport, DriftRow, DriftTally};
pub use experiment::{Experiment, Predictions, FALLBACK_MAX_STEPS, MAX_STEPS_FACTOR};
pub use stats::StepStats;
pub use sweep::{scaling_study, sweep_initial_fraction, ScalingResult, ScalingRow, SweepPoint, SweepResult};
pub use trial::{run_trial, DriftSummary, RunRecord, Winner};
