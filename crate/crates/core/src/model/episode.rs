use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::goal::{Classification, EpisodeResult, EpisodeStatus, GoalSpec};
use super::history::{Action, History, PlayerId};
use super::strategy::{validate_distribution, StrategyProfile};
use crate::error::{input, Result};

/// Generator for trial `index` under `master_seed`.
///
/// ChaCha is counter based: the master seed fixes the key and the trial
/// index selects an independent stream, so trials can run in any order.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Options for [`play_episode_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct PlayOptions {
    /// Keep sampling up to the horizon after the detector fires. The status
    /// still records the first firing.
    pub continue_after_firing: bool,
}

/// Simulates `actual` period by period until the goal's detector fires or
/// `horizon` periods have been played.
pub fn play_episode<R: Rng + ?Sized>(
    goal: &GoalSpec,
    actual: &StrategyProfile,
    horizon: usize,
    rng: &mut R,
) -> Result<EpisodeResult> {
    play_episode_with(goal, actual, horizon, rng, PlayOptions::default())
}

pub fn play_episode_with<R: Rng + ?Sized>(
    goal: &GoalSpec,
    actual: &StrategyProfile,
    horizon: usize,
    rng: &mut R,
    options: PlayOptions,
) -> Result<EpisodeResult> {
    if horizon == 0 {
        return input("horizon must be at least 1");
    }
    actual.check_space(&goal.space)?;

    let num_players = goal.num_players();
    let mut history = History::with_capacity(&goal.space, horizon);
    let mut bufs: Vec<Vec<f64>> = goal.space.players().map(|p| vec![0.0; goal.space.alphabet_size(p)]).collect();
    let mut profile: Vec<Action> = vec![0; num_players];
    let mut status = None;

    while history.len() < horizon {
        let period = history.next_period();
        for (p, strategy) in actual.iter().enumerate() {
            let player = PlayerId(p);
            let buf = &mut bufs[p];
            strategy.fill_distribution(player, &history, buf);
            validate_distribution(buf, player, period)?;
            profile[p] = sample(buf, rng);
        }
        history.push_trusted(&profile);

        if status.is_none() {
            match goal.detector.step(&history) {
                Classification::Undetermined => {}
                Classification::RejectedHere => status = Some(EpisodeStatus::Rejected { at: history.len() }),
                Classification::AcceptedHere => status = Some(EpisodeStatus::Accepted { at: history.len() }),
            }
            if status.is_some() && !options.continue_after_firing {
                break;
            }
        }
    }

    let status = status.unwrap_or(EpisodeStatus::Undetermined { horizon });
    Ok(EpisodeResult { history, status })
}

/// Samples an index from a validated distribution. Point masses consume no
/// randomness.
fn sample<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> Action {
    let mut support = dist.iter().enumerate().filter(|(_, &p)| p > 0.0);
    let first = support.next().map(|(i, _)| i).unwrap_or(0);
    if support.next().is_none() {
        return first as Action;
    }
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last = 0;
    for (i, &p) in dist.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cum += p;
        last = i;
        if u < cum {
            return i as Action;
        }
    }
    last as Action
}
