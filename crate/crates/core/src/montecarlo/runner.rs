use std::time::Instant;

use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;

use super::config::{as_config, BlameConfig, BuiltGoal, ExperimentConfig, GoalKind};
use super::wilson::Estimate;
use crate::adjacent_ones::{self, SumVariant};
use crate::deviations::DeviationSpec;
use crate::error::{Error, Result};
use crate::likelihood::max_likelihood_blame;
use crate::model::{play_episode_with, trial_rng, EpisodeResult, PlayOptions, PlayerId, Polarity, StrategyProfile};
use crate::random_walk::{decide, BlameStep, SurrogateThresholds, WalkGeometry, WalkStatistics, WalkTrace};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub(crate) fn thread_pool(threads: usize) -> Result<ThreadPool> {
    if threads == 0 {
        return Err(Error::Config("threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start {threads} worker threads: {e}")))
}

pub(crate) struct Sampled<T> {
    pub kept: Vec<T>,
    pub attempts: u64,
}

/// Runs `trial` on indices `0, 1, ...` and keeps outcomes passing `keep` in
/// index order until `target` are kept or `max_attempts` indices are used.
///
/// The kept set depends only on the indices, never on scheduling.
pub(crate) fn sample_trials<T, F, K>(
    pool: &ThreadPool,
    label: &str,
    target: u64,
    max_attempts: u64,
    trial: F,
    keep: K,
) -> Result<Sampled<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
    K: Fn(&T) -> bool,
{
    let chunk = target.div_ceil(10).max(256);
    let mut kept = Vec::with_capacity(target.min(1 << 20) as usize);
    let mut next = 0u64;
    let mut logged_tenths = 0;
    while (kept.len() as u64) < target && next < max_attempts {
        let end = (next + chunk).min(max_attempts);
        let batch: Vec<Result<T>> = pool.install(|| (next..end).into_par_iter().map(&trial).collect());
        for (offset, outcome) in batch.into_iter().enumerate() {
            let outcome = outcome?;
            if keep(&outcome) {
                kept.push(outcome);
                if kept.len() as u64 == target {
                    next += offset as u64 + 1;
                    break;
                }
            }
        }
        if (kept.len() as u64) < target {
            next = end;
        }
        let tenths = kept.len() as u64 * 10 / target;
        if tenths > logged_tenths {
            logged_tenths = tenths;
            log::info!("{label}: {}% ({} of {target} kept, {next} simulated)", tenths * 10, kept.len());
        }
    }
    if (kept.len() as u64) < target {
        return Err(Error::Resource(format!(
            "{label}: only {} of {target} episodes qualified within {max_attempts} attempts",
            kept.len()
        )));
    }
    Ok(Sampled { kept, attempts: next })
}

/// How one missed episode is judged.
#[derive(Debug)]
pub(crate) enum Blamer {
    Threshold { mu: f64, variant: SumVariant },
    Likelihood { hypothesis: StrategyProfile, baseline: StrategyProfile },
    Walk { geometry: WalkGeometry, thresholds: SurrogateThresholds, order: Vec<BlameStep> },
}

impl Blamer {
    pub(crate) fn build(
        config: &BlameConfig,
        goal: &BuiltGoal,
        actual: &StrategyProfile,
        horizon: usize,
    ) -> Result<Self> {
        match (config, goal.kind) {
            (BlameConfig::AdjacentOnesThreshold { variant }, GoalKind::AdjacentOnes { mu }) => {
                Ok(Blamer::Threshold { mu, variant: *variant })
            }
            (BlameConfig::Likelihood { hypothesis }, _) => {
                let hypothesis = match hypothesis {
                    Some(specs) => goal.profile_with(specs)?,
                    None => actual.clone(),
                };
                Ok(Blamer::Likelihood { hypothesis, baseline: goal.spec.profile.clone() })
            }
            (BlameConfig::RandomWalkSteps { order }, GoalKind::RandomWalk { geometry, thresholds }) => {
                let thresholds =
                    thresholds.ok_or_else(|| Error::Config("random_walk_steps blame needs goal.thresholds".into()))?;
                if horizon < 2 * thresholds.n0 {
                    return Err(Error::Config(format!(
                        "horizon {horizon} gives each player fewer than n0 = {} moves",
                        thresholds.n0
                    )));
                }
                let order = order.clone().unwrap_or_else(|| BlameStep::DEFAULT_ORDER.to_vec());
                Ok(Blamer::Walk { geometry, thresholds, order })
            }
            (blame, _) => Err(Error::Config(format!("blame {} does not apply to goal {}", blame.id(), goal.id()))),
        }
    }

    pub(crate) fn play_options(&self) -> PlayOptions {
        PlayOptions {
            continue_after_firing: matches!(self, Blamer::Threshold { variant: SumVariant::FullHorizon, .. }),
        }
    }

    /// The blamed player and, for the walk rule, the deciding step.
    pub(crate) fn blame(&self, episode: &EpisodeResult) -> Result<(PlayerId, Option<u8>)> {
        match self {
            Blamer::Threshold { mu, variant } => {
                let bits = adjacent_ones::decode_bits(&episode.history);
                Ok((adjacent_ones::blame(&bits, *mu, *variant)?, None))
            }
            Blamer::Likelihood { hypothesis, baseline } => {
                let upto = episode.status.fired_at().unwrap_or(episode.history.len());
                let verdict = max_likelihood_blame(hypothesis, baseline, &episode.history.prefix(upto))?;
                Ok((verdict.blamed, None))
            }
            Blamer::Walk { geometry, thresholds, order } => {
                let trace = WalkTrace::from_history(&episode.history, geometry)?;
                if trace.reached_origin() {
                    return Err(Error::Contract("walk blame needs a trace that never reached the origin".into()));
                }
                let stats = WalkStatistics::compute(&trace, thresholds.n0)?;
                let d = decide(&stats, thresholds, order);
                Ok((d.blamed, Some(d.decided_at_step)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Outcome {
    missed: bool,
    blamed: Option<PlayerId>,
    step: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventCounts {
    /// Episodes that stayed inside the target.
    pub reached: u64,
    /// Episodes that missed it (rejected, or truncated on the open side).
    pub missed: u64,
    /// Missed episodes blamed on each player.
    pub blamed: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub goal: String,
    pub blame: String,
    pub deviations: Vec<DeviationSpec>,
    pub horizon: usize,
    pub seed: u64,
    pub confidence: f64,
    pub conditioned: bool,
    /// Episodes simulated; with conditioning, more than `trials`.
    pub attempts: u64,
    pub trials: u64,
    pub counts: EventCounts,
    /// `P(D^c)` over all attempts.
    pub p_miss: Estimate,
    /// `P(D^c and f = j)` over all attempts.
    pub p_miss_and_blamed: Vec<Estimate>,
    /// `P(f = j | D^c)`; absent when nothing was missed.
    pub blamed_given_miss: Option<Vec<Estimate>>,
    /// For the walk rule: how many blames each step (1 to 4) decided.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decided_at_step: Option<[u64; 4]>,
    /// Wall-clock seconds; kept out of serialized output so files are
    /// reproducible.
    #[serde(skip)]
    pub runtime_secs: f64,
}

/// Runs the experiment on `threads` workers. The report depends only on the
/// config, never on the thread count.
pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> Result<EstimateReport> {
    let started = Instant::now();
    config.validate()?;
    let goal = config.goal.build()?;
    let actual = goal.profile_with(&config.deviations)?;
    let blamer = Blamer::build(&config.blame, &goal, &actual, config.horizon)?;
    let polarity: Polarity = goal.spec.polarity();
    let options = blamer.play_options();
    let pool = thread_pool(threads)?;

    let trial = |index: u64| -> Result<Outcome> {
        let mut rng = trial_rng(config.seed, index);
        let episode = play_episode_with(&goal.spec, &actual, config.horizon, &mut rng, options).map_err(as_config)?;
        if !episode.status.misses_target(polarity) {
            return Ok(Outcome { missed: false, blamed: None, step: None });
        }
        let (blamed, step) = blamer.blame(&episode)?;
        Ok(Outcome { missed: true, blamed: Some(blamed), step })
    };
    let label = config.name.as_deref().unwrap_or("simulate");
    let sampled = if config.condition_on_miss {
        sample_trials(&pool, label, config.trials, config.max_attempts(), trial, |o| o.missed)?
    } else {
        sample_trials(&pool, label, config.trials, config.trials, trial, |_| true)?
    };

    let n = goal.spec.num_players();
    let attempts = sampled.attempts;
    let missed = sampled.kept.iter().filter(|o| o.missed).count() as u64;
    let reached = attempts - missed;
    let mut blamed = vec![0u64; n];
    let mut steps = [0u64; 4];
    for o in &sampled.kept {
        if let Some(p) = o.blamed {
            blamed[p.0] += 1;
        }
        if let Some(s) = o.step {
            steps[usize::from(s) - 1] += 1;
        }
    }
    let c = config.confidence;
    let p_miss_and_blamed = blamed.iter().map(|&b| Estimate::new(b, attempts, c)).collect::<Result<_>>()?;
    let blamed_given_miss = if missed > 0 {
        Some(blamed.iter().map(|&b| Estimate::new(b, missed, c)).collect::<Result<_>>()?)
    } else {
        None
    };
    Ok(EstimateReport {
        schema_version: REPORT_SCHEMA_VERSION,
        name: config.name.clone(),
        goal: goal.id().to_string(),
        blame: config.blame.id().to_string(),
        deviations: config.deviations.clone(),
        horizon: config.horizon,
        seed: config.seed,
        confidence: c,
        conditioned: config.condition_on_miss,
        attempts,
        trials: config.trials,
        counts: EventCounts { reached, missed, blamed },
        p_miss: Estimate::new(missed, attempts, c)?,
        p_miss_and_blamed,
        blamed_given_miss,
        decided_at_step: matches!(blamer, Blamer::Walk { .. }).then_some(steps),
        runtime_secs: started.elapsed().as_secs_f64(),
    })
}
