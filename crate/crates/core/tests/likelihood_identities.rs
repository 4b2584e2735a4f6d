use std::sync::Arc;

use devlab_core::adjacent_ones;
use devlab_core::deviations::{build_deviation, DeviationKind, DeviationSpec};
use devlab_core::likelihood::{log_likelihood_ratio, LogLikelihoodRatio};
use devlab_core::model::{
    prefix_probability, ActionSpace, BehaviorStrategy, Bernoulli, History, PlayerId, SharedStrategy, StrategyProfile,
};

const MAX_LEN: usize = 8;

/// Repeats its own previous action with probability `stay`.
#[derive(Debug)]
struct Sticky {
    stay: f64,
}

impl BehaviorStrategy for Sticky {
    fn fill_distribution(&self, player: PlayerId, history: &History, out: &mut [f64]) {
        match history.last() {
            None => out.copy_from_slice(&[0.5, 0.5]),
            Some(last) => {
                let prev = usize::from(last[player.0]);
                out[prev] = self.stay;
                out[1 - prev] = 1.0 - self.stay;
            }
        }
    }
}

fn all_histories(space: &ActionSpace, max_len: usize) -> Vec<History> {
    let sizes: Vec<usize> = space.players().map(|p| space.alphabet_size(p)).collect();
    let profiles: Vec<Vec<u16>> = (0..sizes.iter().product::<usize>())
        .map(|mut code| {
            sizes
                .iter()
                .rev()
                .map(|&s| {
                    let a = (code % s) as u16;
                    code /= s;
                    a
                })
                .collect::<Vec<_>>()
                .into_iter()
                .rev()
                .collect()
        })
        .collect();
    let mut out = vec![History::new(space)];
    let mut frontier = out.clone();
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * profiles.len());
        for h in &frontier {
            for p in &profiles {
                let mut child = h.clone();
                child.push(p).unwrap();
                next.push(child);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

fn check_factorization(space: &ActionSpace, baseline: &StrategyProfile, deviations: &[(PlayerId, SharedStrategy)]) {
    let histories = all_histories(space, MAX_LEN);
    let mut finite_positive = 0;
    for (player, deviation) in deviations {
        let joint = baseline.with_strategy(*player, Arc::clone(deviation));
        for z in &histories {
            let llr = log_likelihood_ratio(deviation.as_ref(), baseline.get(*player).as_ref(), *player, z).unwrap();
            let p_dev = prefix_probability(&joint, z).unwrap();
            let p_base = prefix_probability(baseline, z).unwrap();
            match llr {
                LogLikelihoodRatio::Finite(l) => {
                    assert!(close(p_dev, l.exp() * p_base), "player {player} on {z:?}: {p_dev} vs e^{l} * {p_base}");
                    if p_base > 0.0 {
                        finite_positive += 1;
                    }
                }
                LogLikelihoodRatio::NegInfinity => assert_eq!(p_dev, 0.0, "{z:?}"),
                LogLikelihoodRatio::PosInfinity => assert_eq!(p_base, 0.0, "{z:?}"),
            }
        }
    }
    assert!(finite_positive > 500, "{finite_positive}");

    if let [(i, di), (j, dj), ..] = deviations {
        let both = baseline.with_strategy(*i, Arc::clone(di)).with_strategy(*j, Arc::clone(dj));
        for z in &histories {
            let li = log_likelihood_ratio(di.as_ref(), baseline.get(*i).as_ref(), *i, z).unwrap();
            let lj = log_likelihood_ratio(dj.as_ref(), baseline.get(*j).as_ref(), *j, z).unwrap();
            if let (LogLikelihoodRatio::Finite(li), LogLikelihoodRatio::Finite(lj)) = (li, lj) {
                let p = prefix_probability(&both, z).unwrap();
                let p_base = prefix_probability(baseline, z).unwrap();
                assert!(close(p, (li + lj).exp() * p_base), "{z:?}");
            }
        }
    }
}

#[test]
fn factorization_on_simultaneous_binary_game() {
    let space = ActionSpace::uniform(2, &["0", "1"]).unwrap();
    let fair: SharedStrategy = Arc::new(Bernoulli::fair_coin());
    let baseline = StrategyProfile::new(vec![Arc::clone(&fair), fair]).unwrap();
    let deviations: Vec<(PlayerId, SharedStrategy)> =
        vec![(PlayerId::A, Arc::new(Sticky { stay: 0.8 })), (PlayerId::B, Arc::new(Bernoulli::binary(0.9)))];
    check_factorization(&space, &baseline, &deviations);
}

#[test]
fn factorization_on_adjacent_ones_goal() {
    let goal = adjacent_ones::goal(0.2).unwrap();
    let build = |player, kind| {
        let spec = DeviationSpec::new(player, kind);
        build_deviation(&spec, Arc::clone(goal.profile.get(player)), &goal.space, None).unwrap()
    };
    let deviations = vec![
        (PlayerId::A, build(PlayerId::A, DeviationKind::Biased { p: 0.7 })),
        (PlayerId::B, build(PlayerId::B, DeviationKind::FirstMoveThenHonest { action: "1".into() })),
        (PlayerId::B, build(PlayerId::B, DeviationKind::AlwaysAction { action: "1".into() })),
    ];
    check_factorization(&goal.space, &goal.profile, &deviations);
}
