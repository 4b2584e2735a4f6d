use std::path::Path;

use devlab_core::likelihood::lemma_bound;
use devlab_core::montecarlo::{
    calibrate_thresholds, run_experiment, CalibrationReport, EstimateReport, GoalConfig, ThresholdSource,
    REPORT_SCHEMA_VERSION,
};
use devlab_core::oracle::{verify_blame_bounds, BoundsReport, DEFAULT_BUDGET};
use serde::Serialize;

use crate::config::{load_calibration, load_enumerate, load_experiments, EnumerateConfig, Overrides};
use crate::error::{CliError, CliResult};
use crate::output::{
    out_path, prepare_dir, write_aggregate, write_jsonl, write_pretty_json, AGGREGATE_FILE, BOUNDS_FILE,
    CALIBRATION_FILE, REPORT_FILE, THRESHOLDS_FILE,
};

pub fn simulate(config: &Path, overrides: Overrides, threads: usize, out: &Path) -> CliResult<Vec<EstimateReport>> {
    let experiments = load_experiments(config, overrides)?;
    let mut reports = Vec::with_capacity(experiments.len());
    for (i, experiment) in experiments.iter().enumerate() {
        let label = experiment.name.clone().unwrap_or_else(|| format!("experiment {i}"));
        log::info!("{label}: {} trials on {threads} threads", experiment.trials);
        let report = run_experiment(experiment, threads)?;
        log::info!(
            "{label}: {} of {} missed, blamed {:?} ({:.1}s)",
            report.counts.missed,
            report.attempts,
            report.counts.blamed,
            report.runtime_secs
        );
        reports.push(report);
    }
    prepare_dir(out)?;
    write_jsonl(&out_path(out, REPORT_FILE), &reports)?;
    write_aggregate(&out_path(out, AGGREGATE_FILE), &reports)?;
    Ok(reports)
}

/// One row of `bounds.jsonl`.
#[derive(Debug, Serialize)]
pub struct EnumerateReport {
    pub schema_version: u32,
    #[serde(flatten)]
    pub config: EnumerateConfig,
    /// `sqrt((|I| - 1) P*(D_n^c))`, the bound on innocent blame.
    pub lemma_bound: f64,
    pub bounds: BoundsReport,
}

pub fn enumerate(config: &Path, overrides: Overrides, out: &Path) -> CliResult<EnumerateReport> {
    let config = load_enumerate(config, overrides)?;
    let goal = config.goal.build()?;
    let hypothesis = goal.profile_with(&config.hypothesis)?;
    let budget = config.budget.unwrap_or(DEFAULT_BUDGET);
    let bounds = verify_blame_bounds(&goal.spec, &hypothesis, config.horizon, budget)?;
    let report = EnumerateReport {
        schema_version: REPORT_SCHEMA_VERSION,
        lemma_bound: lemma_bound(goal.spec.num_players(), bounds.epsilon),
        config,
        bounds,
    };
    prepare_dir(out)?;
    write_jsonl(&out_path(out, BOUNDS_FILE), std::slice::from_ref(&report))?;
    if !report.bounds.passed {
        return Err(CliError::Assertion(format!(
            "{} bound violation(s), details in {}:\n{}",
            report.bounds.violations.len(),
            out_path(out, BOUNDS_FILE).display(),
            report.bounds.violations.join("\n")
        )));
    }
    log::info!(
        "all bounds hold over {} rejecting prefixes; P(miss) = {}",
        report.bounds.num_rejecting_prefixes,
        report.bounds.epsilon
    );
    Ok(report)
}

/// Writes the thresholds as a goal fragment `simulate` can load by path.
pub fn calibrate(config: &Path, overrides: Overrides, threads: usize, out: &Path) -> CliResult<CalibrationReport> {
    let config = load_calibration(config, overrides)?;
    let report = calibrate_thresholds(&config, threads)?;
    let fragment =
        GoalConfig::RandomWalk { start: config.start, thresholds: Some(ThresholdSource::Inline(report.thresholds)) };
    prepare_dir(out)?;
    write_pretty_json(&out_path(out, THRESHOLDS_FILE), &fragment)?;
    write_pretty_json(&out_path(out, CALIBRATION_FILE), &report)?;
    Ok(report)
}
