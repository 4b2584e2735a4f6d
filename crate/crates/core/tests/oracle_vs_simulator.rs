use std::sync::Arc;

use devlab_core::adjacent_ones::{self, decode_bits, SumVariant};
use devlab_core::deviations::{build_deviation, DeviationKind, DeviationSpec};
use devlab_core::model::{
    play_episode_with, trial_rng, EpisodeStatus, GoalSpec, History, PlayOptions, PlayerId, StrategyProfile,
};
use devlab_core::montecarlo::wilson_interval;
use devlab_core::oracle::{exact_event_probability, DEFAULT_BUDGET};
use devlab_core::random_walk::{self, WalkGeometry};
use devlab_core::single_bit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRIALS: u64 = 100_000;
const CONFIDENCE: f64 = 0.999;

type Event = Box<dyn Fn(&History, &EpisodeStatus) -> bool>;

struct Case {
    label: String,
    goal: GoalSpec,
    actual: StrategyProfile,
    horizon: usize,
    event: Event,
}

fn deviate(
    goal: &GoalSpec,
    actual: &StrategyProfile,
    player: PlayerId,
    kind: DeviationKind,
    walk: Option<&WalkGeometry>,
) -> StrategyProfile {
    let spec = DeviationSpec::new(player, kind);
    let strategy = build_deviation(&spec, Arc::clone(goal.profile.get(player)), &goal.space, walk).unwrap();
    actual.with_strategy(player, strategy)
}

fn adjacent_case(rng: &mut ChaCha8Rng, i: usize) -> Case {
    let mu = [0.3, 0.6, 1.0][rng.random_range(0..3)];
    let goal = adjacent_ones::goal(mu).unwrap();
    let mut actual = goal.profile.clone();
    for player in [PlayerId::A, PlayerId::B] {
        if rng.random_bool(0.5) {
            let p = (rng.random_range(0.0..1.0f64) * 100.0).round() / 100.0;
            actual = deviate(&goal, &actual, player, DeviationKind::Biased { p }, None);
        }
    }
    let horizon = 2 * rng.random_range(2..=5);
    let (name, event): (&str, Event) = match i % 4 {
        0 => ("rejected", Box::new(|_, s| matches!(s, EpisodeStatus::Rejected { .. }))),
        1 => (
            "rejected and A blamed",
            Box::new(move |h, s| {
                matches!(s, EpisodeStatus::Rejected { .. })
                    && adjacent_ones::blame(&decode_bits(h), mu, SumVariant::FullHorizon).unwrap() == PlayerId::A
            }),
        ),
        2 => ("first bit set", Box::new(|h, _| decode_bits(h)[0] == 1)),
        _ => ("at least two ones", Box::new(|h, _| decode_bits(h).iter().filter(|&&b| b == 1).count() >= 2)),
    };
    Case { label: format!("adjacent mu={mu} horizon={horizon}: {name}"), goal, actual, horizon, event }
}

fn walk_case(rng: &mut ChaCha8Rng, i: usize) -> Case {
    let start = rng.random_range(1..=3);
    let goal = random_walk::goal(start).unwrap();
    let geometry = WalkGeometry::standard(start);
    let actual = if rng.random_bool(0.5) {
        let p = (rng.random_range(0.0..1.0f64) * 100.0).round() / 100.0;
        deviate(&goal, &goal.profile, PlayerId::B, DeviationKind::DriftUp { p }, Some(&geometry))
    } else {
        goal.profile.clone()
    };
    let horizon = 2 * rng.random_range(2..=4);
    let (name, event): (&str, Event) = match i % 2 {
        0 => ("reached origin", Box::new(|_, s| matches!(s, EpisodeStatus::Accepted { .. }))),
        _ => ("ends above start", Box::new(move |h, _| geometry.position(h) > start)),
    };
    Case { label: format!("walk start={start} horizon={horizon}: {name}"), goal, actual, horizon, event }
}

fn single_bit_case(rng: &mut ChaCha8Rng) -> Case {
    let mu = [0.2, 0.5][rng.random_range(0..2)];
    let goal = single_bit::goal(mu).unwrap();
    let actual = deviate(&goal, &goal.profile, PlayerId::A, DeviationKind::AlwaysAction { action: "1".into() }, None);
    Case {
        label: format!("single bit mu={mu}: rejected"),
        goal,
        actual,
        horizon: 1,
        event: Box::new(|_, s| matches!(s, EpisodeStatus::Rejected { .. })),
    }
}

#[test]
fn monte_carlo_lands_in_wilson_interval_of_exact_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut cases: Vec<Case> = (0..12).map(|i| adjacent_case(&mut rng, i)).collect();
    cases.extend((0..6).map(|i| walk_case(&mut rng, i)));
    cases.extend((0..2).map(|_| single_bit_case(&mut rng)));
    assert_eq!(cases.len(), 20);

    let options = PlayOptions { continue_after_firing: true };
    for (c, case) in cases.iter().enumerate() {
        let exact =
            exact_event_probability(&case.goal, &case.actual, case.horizon, DEFAULT_BUDGET, &case.event).unwrap();
        let hits = (0..TRIALS)
            .filter(|&t| {
                let mut rng = trial_rng(c as u64, t);
                let ep = play_episode_with(&case.goal, &case.actual, case.horizon, &mut rng, options).unwrap();
                (case.event)(&ep.history, &ep.status)
            })
            .count() as u64;
        let (lo, hi) = wilson_interval(hits, TRIALS, CONFIDENCE).unwrap();
        assert!(lo <= exact && exact <= hi, "{}: exact {exact}, estimate {hits}/{TRIALS} in [{lo}, {hi}]", case.label);
    }
}
