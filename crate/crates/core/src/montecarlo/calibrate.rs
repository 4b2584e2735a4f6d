use serde::{Deserialize, Serialize};

use super::runner::{sample_trials, thread_pool};
use crate::error::{Error, Result};
use crate::model::{play_episode, trial_rng};
use crate::random_walk::{
    self, SurrogateThresholds, WalkGeometry, WalkStatistics, WalkTrace, DEFAULT_N0, DEFAULT_START,
};

/// Fewest honest missed episodes a quantile is estimated from.
pub const MIN_CONDITIONED: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    #[serde(default = "default_start")]
    pub start: i64,
    pub horizon: usize,
    pub alpha: f64,
    /// Honest episodes simulated; only those missing the origin are used.
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n0")]
    pub n0: usize,
}

fn default_start() -> i64 {
    DEFAULT_START
}

fn default_n0() -> usize {
    DEFAULT_N0
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::Config(format!("alpha must lie in (0, 0.5), got {}", self.alpha)));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.start < 1 {
            return Err(Error::Config(format!("start must be at least 1, got {}", self.start)));
        }
        if self.n0 < 3 {
            return Err(Error::Config(format!("n0 must be at least 3, got {}", self.n0)));
        }
        if !self.horizon.is_multiple_of(2) || self.horizon < 2 * self.n0 {
            return Err(Error::Config(format!(
                "horizon must be even and at least 2 n0 = {}, got {}",
                2 * self.n0,
                self.horizon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub thresholds: SurrogateThresholds,
    pub alpha: f64,
    pub horizon: usize,
    pub seed: u64,
    pub trials: u64,
    /// Honest episodes that never reached the origin.
    pub conditioned: usize,
}

/// Empirical `q` quantile: the `ceil(q m)`-th smallest of `m` values.
pub fn empirical_quantile(values: &mut [f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of nothing");
    values.sort_by(f64::total_cmp);
    let m = values.len();
    let rank = ((q * m as f64).ceil() as usize).clamp(1, m);
    values[rank - 1]
}

/// Calibrates the walk thresholds on honest episodes that miss the origin.
///
/// Each threshold is the `1 - alpha` quantile of the per-episode larger of
/// the two statistics its step compares, so a step wrongly fires on a
/// conditioned honest episode with probability about `alpha`.
pub fn calibrate_thresholds(config: &CalibrationConfig, threads: usize) -> Result<CalibrationReport> {
    config.validate()?;
    let goal = random_walk::goal(config.start)?;
    let geometry = WalkGeometry::standard(config.start);
    let pool = thread_pool(threads)?;
    let n0 = config.n0;

    let trial = |index: u64| -> Result<Option<WalkStatistics>> {
        let mut rng = trial_rng(config.seed, index);
        let episode = play_episode(&goal, &goal.profile, config.horizon, &mut rng)?;
        if !episode.status.misses_target(goal.polarity()) {
            return Ok(None);
        }
        let trace = WalkTrace::from_history(&episode.history, &geometry)?;
        WalkStatistics::compute(&trace, n0).map(Some)
    };
    let sampled = sample_trials(&pool, "calibrate", config.trials, config.trials, trial, |_| true)?;
    let stats: Vec<WalkStatistics> = sampled.kept.into_iter().flatten().collect();
    if stats.len() < MIN_CONDITIONED {
        return Err(Error::Calibration(format!(
            "only {} of {} honest episodes avoided the origin by horizon {}; at least {MIN_CONDITIONED} are needed, \
             so raise trials or lower the horizon",
            stats.len(),
            config.trials,
            config.horizon
        )));
    }

    let q = 1.0 - config.alpha;
    let mut step1: Vec<f64> = stats.iter().map(|s| s.step1[0].max(s.step1[1])).collect();
    let mut step2: Vec<f64> = stats.iter().map(|s| s.step2[0].max(s.step2[1])).collect();
    let mut step3: Vec<f64> = stats.iter().map(|s| s.t_odd.max(s.t_even)).collect();
    let thresholds = SurrogateThresholds {
        theta1: empirical_quantile(&mut step1, q),
        theta2: empirical_quantile(&mut step2, q),
        theta3: empirical_quantile(&mut step3, q),
        n0,
    };
    thresholds.validate().map_err(|e| Error::Calibration(format!("calibrated thresholds are unusable: {e}")))?;
    log::info!(
        "calibrated on {} conditioned episodes: theta1 {:.4}, theta2 {:.4}, theta3 {:.4}",
        stats.len(),
        thresholds.theta1,
        thresholds.theta2,
        thresholds.theta3
    );
    Ok(CalibrationReport {
        thresholds,
        alpha: config.alpha,
        horizon: config.horizon,
        seed: config.seed,
        trials: config.trials,
        conditioned: stats.len(),
    })
}
