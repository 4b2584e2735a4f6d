//! Monte Carlo estimation of miss and blame probabilities.

pub mod calibrate;
pub mod config;
pub mod runner;
pub mod wilson;

pub use calibrate::{calibrate_thresholds, CalibrationConfig, CalibrationReport};
pub use config::{BlameConfig, BuiltGoal, ExperimentConfig, GoalConfig, GoalKind, ThresholdSource};
pub use runner::{run_experiment, EstimateReport, EventCounts, REPORT_SCHEMA_VERSION};
pub use wilson::{wilson_interval, Estimate};
