//! Exact enumeration of small instances.
//!
//! The tree of histories is walked depth first in lexicographic order of
//! action profiles (player 0 most significant), pruning branches of
//! probability zero. The budget caps the number of visited histories with
//! positive probability; exceeding it is a resource error.

use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::likelihood::{lemma_bound, max_likelihood_blame};
use crate::model::{
    prefix_probability, validate_distribution, Action, ActionSpace, Classification, EpisodeStatus, GoalSpec, History,
    PlayerId, Polarity, StrategyProfile,
};

pub const DEFAULT_BUDGET: u64 = 1 << 24;
pub const BOUND_TOLERANCE: f64 = 1e-10;

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl std::iter::Sum<f64> for KahanSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::default();
        iter.for_each(|x| k.add(x));
        k
    }
}

/// What the walker reports for each leaf.
struct Leaf<'a> {
    history: &'a History,
    status: EpisodeStatus,
    /// Path probability under each walked profile.
    probs: &'a [f64],
}

/// Depth-first walk over the union of the supports of `profiles`.
///
/// A node is a leaf when it reaches `horizon`, or when `stop_on_firing` is
/// set and the detector fired on it.
struct TreeWalk<'a> {
    space: &'a ActionSpace,
    goal: Option<&'a GoalSpec>,
    profiles: &'a [&'a StrategyProfile],
    horizon: usize,
    budget: u64,
    stop_on_firing: bool,
    visited: u64,
}

impl<'a> TreeWalk<'a> {
    fn run(mut self, visit: &mut dyn FnMut(Leaf<'_>)) -> Result<u64> {
        for profile in self.profiles {
            profile.check_space(self.space)?;
        }
        let mut history = History::with_capacity(self.space, self.horizon);
        let ones = vec![1.0; self.profiles.len()];
        self.descend(&mut history, &ones, None, visit)?;
        Ok(self.visited)
    }

    fn descend(
        &mut self,
        history: &mut History,
        probs: &[f64],
        fired: Option<EpisodeStatus>,
        visit: &mut dyn FnMut(Leaf<'_>),
    ) -> Result<()> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::Resource(format!(
                "enumeration exceeded the budget of {} histories at horizon {}",
                self.budget, self.horizon
            )));
        }
        let stop = fired.is_some() && self.stop_on_firing;
        if history.len() == self.horizon || stop {
            let status = fired.unwrap_or(EpisodeStatus::Undetermined { horizon: history.len() });
            visit(Leaf { history, status, probs });
            return Ok(());
        }

        // dists[k][p] is profile k's distribution for player p
        let period = history.next_period();
        let num_players = self.space.num_players();
        let mut dists = Vec::with_capacity(self.profiles.len());
        for profile in self.profiles {
            let mut per_player = Vec::with_capacity(num_players);
            for player in self.space.players() {
                let mut d = vec![0.0; self.space.alphabet_size(player)];
                profile.get(player).fill_distribution(player, history, &mut d);
                validate_distribution(&mut d, player, period)?;
                per_player.push(d);
            }
            dists.push(per_player);
        }
        let support: Vec<Vec<Action>> = self
            .space
            .players()
            .map(|player| {
                (0..self.space.alphabet_size(player))
                    .filter(|&a| dists.iter().any(|d| d[player.0][a] > 0.0))
                    .map(|a| a as Action)
                    .collect()
            })
            .collect();

        let mut choice = vec![0usize; num_players];
        let mut profile_actions = vec![0 as Action; num_players];
        let mut child_probs = vec![0.0; self.profiles.len()];
        'product: loop {
            for p in 0..num_players {
                profile_actions[p] = support[p][choice[p]];
            }
            for (k, d) in dists.iter().enumerate() {
                child_probs[k] = (0..num_players).fold(probs[k], |acc, p| acc * d[p][usize::from(profile_actions[p])]);
            }
            if child_probs.iter().any(|&x| x > 0.0) {
                history.push_trusted(&profile_actions);
                let child_fired = fired.or_else(|| self.fire(history));
                self.descend(history, &child_probs, child_fired, visit)?;
                history.pop();
            }
            // odometer, last player fastest
            for p in (0..num_players).rev() {
                choice[p] += 1;
                if choice[p] < support[p].len() {
                    continue 'product;
                }
                choice[p] = 0;
            }
            break;
        }
        Ok(())
    }

    fn fire(&self, history: &History) -> Option<EpisodeStatus> {
        let goal = self.goal?;
        match goal.detector.step(history) {
            Classification::Undetermined => None,
            Classification::RejectedHere => Some(EpisodeStatus::Rejected { at: history.len() }),
            Classification::AcceptedHere => Some(EpisodeStatus::Accepted { at: history.len() }),
        }
    }
}

/// Every length-`horizon` history with positive probability under
/// `profile`, in lexicographic order. Histories not listed have probability 0.
pub fn enumerate_measure(
    space: &ActionSpace,
    profile: &StrategyProfile,
    horizon: usize,
    budget: u64,
) -> Result<Vec<(History, f64)>> {
    let mut out = Vec::new();
    visit_measure(space, profile, horizon, budget, |h, p| out.push((h.clone(), p)))?;
    Ok(out)
}

/// Calls `visit` on each length-`horizon` history with positive probability,
/// without materializing the measure.
pub fn visit_measure(
    space: &ActionSpace,
    profile: &StrategyProfile,
    horizon: usize,
    budget: u64,
    mut visit: impl FnMut(&History, f64),
) -> Result<()> {
    let profiles = [profile];
    let walk = TreeWalk { space, goal: None, profiles: &profiles, horizon, budget, stop_on_firing: false, visited: 0 };
    walk.run(&mut |leaf| visit(leaf.history, leaf.probs[0]))?;
    Ok(())
}

/// Probability under `actual` that a length-`horizon` history satisfies
/// `event`. The status passed to `event` is the goal's classification of
/// the whole history, undetermined at the horizon if nothing fired.
pub fn exact_event_probability(
    goal: &GoalSpec,
    actual: &StrategyProfile,
    horizon: usize,
    budget: u64,
    mut event: impl FnMut(&History, &EpisodeStatus) -> bool,
) -> Result<f64> {
    let profiles = [actual];
    let walk = TreeWalk {
        space: &goal.space,
        goal: Some(goal),
        profiles: &profiles,
        horizon,
        budget,
        stop_on_firing: false,
        visited: 0,
    };
    let mut total = KahanSum::default();
    walk.run(&mut |leaf| {
        if event(leaf.history, &leaf.status) {
            total.add(leaf.probs[0]);
        }
    })?;
    Ok(total.value())
}

/// `P(D_n^c)`: the probability of missing the target by `horizon`, with
/// undetermined histories placed by the goal's polarity.
pub fn exact_miss_probability(goal: &GoalSpec, actual: &StrategyProfile, horizon: usize, budget: u64) -> Result<f64> {
    let polarity = goal.polarity();
    exact_event_probability(goal, actual, horizon, budget, |_, status| status.misses_target(polarity))
}

/// One rejecting prefix `z` with its baseline probability and blame.
#[derive(Debug, Clone)]
pub struct RejectingPrefix {
    pub history: History,
    pub baseline_probability: f64,
    /// `ℓ_i(z)` for each player.
    pub ratios: Vec<f64>,
    pub blamed: PlayerId,
}

/// The minimal prefixes of length at most `horizon` that miss the target,
/// reachable under `baseline` or `hypothesis`, blamed by maximum likelihood.
pub fn rejecting_prefixes(
    goal: &GoalSpec,
    hypothesis: &StrategyProfile,
    horizon: usize,
    budget: u64,
) -> Result<Vec<RejectingPrefix>> {
    let polarity = goal.polarity();
    let profiles = [&goal.profile, hypothesis];
    let walk = TreeWalk {
        space: &goal.space,
        goal: Some(goal),
        profiles: &profiles,
        horizon,
        budget,
        stop_on_firing: true,
        visited: 0,
    };
    let mut leaves = Vec::new();
    walk.run(&mut |leaf| {
        if leaf.status.misses_target(polarity) {
            leaves.push((leaf.history.clone(), leaf.probs[0]));
        }
    })?;
    leaves
        .into_iter()
        .map(|(history, baseline_probability)| {
            let verdict = max_likelihood_blame(hypothesis, &goal.profile, &history)?;
            Ok(RejectingPrefix {
                ratios: verdict.per_player_llr.iter().map(|l| l.ratio()).collect(),
                blamed: verdict.blamed,
                history,
                baseline_probability,
            })
        })
        .collect()
}

/// No element of `set` is a proper prefix of another (or repeated).
pub fn is_prefix_free(set: &[History]) -> bool {
    let mut flat: Vec<Vec<Action>> = set.iter().map(|h| h.profiles().flatten().copied().collect()).collect();
    flat.sort();
    // in sorted order a prefix of y is followed by another prefix-sharer, so
    // neighbours suffice
    flat.windows(2).all(|w| !w[1].starts_with(&w[0]))
}

/// Terms of the Cauchy-Schwarz chain for a deviator `i` and blamed `j`.
#[derive(Debug, Clone, Serialize)]
pub struct PairBound {
    pub deviator: PlayerId,
    pub blamed: PlayerId,
    /// `P_{σ_i,σ*_{-i}}(E_j)`, summed from per-prefix probabilities.
    pub p_deviation: f64,
    /// `(sum ℓ_i² P*) (sum P*)` over `E_j`.
    pub cauchy_schwarz: f64,
    /// `(sum ℓ_i ℓ_j P*) (sum P*)` over `E_j`.
    pub ratio_product: f64,
    /// `P_{σ_i,σ_j,σ*}(E_j)` from per-prefix probabilities.
    pub p_joint: f64,
    pub p_baseline: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlayerBound {
    pub deviator: PlayerId,
    /// `sum over j != i of P_{σ_i,σ*_{-i}}(E_j)`.
    pub innocent_blamed: f64,
    /// `sqrt((|I| - 1) P*(D_n^c))`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub horizon: usize,
    pub num_rejecting_prefixes: usize,
    pub prefix_free: bool,
    /// `P*(D_n^c)`.
    pub epsilon: f64,
    /// `P*(D_n)` summed over the rejecting prefixes.
    pub p_target: f64,
    /// `1 - (1/(|I|-1)) sum_i P*(D_n^c and f != i)`.
    pub p_target_from_blame: f64,
    pub identity_holds: bool,
    pub pairs: Vec<PairBound>,
    pub players: Vec<PlayerBound>,
    pub violations: Vec<String>,
    pub passed: bool,
}

/// Checks the likelihood blame's guarantees exactly on a small instance:
///
/// (a) `P_i(E_j)² <= P*(E_j)` through the Cauchy-Schwarz chain, for all `j != i`;
/// (b) `sum_{j != i} P_i(E_j) <= sqrt((|I|-1) P*(D_n^c))`;
/// (c) `P*(D_n) = 1 - (1/(|I|-1)) sum_i P*(D_n^c and f != i)`.
///
/// Products with a zero baseline probability count as zero in the chain
/// terms. The left-hand sides are computed from per-prefix probabilities
/// under the mixed profiles, independently of the likelihood ratios.
pub fn verify_blame_bounds(
    goal: &GoalSpec,
    hypothesis: &StrategyProfile,
    horizon: usize,
    budget: u64,
) -> Result<BoundsReport> {
    let n = goal.num_players();
    if hypothesis.len() != n {
        return input(format!("hypothesis has {} strategies for {n} players", hypothesis.len()));
    }
    let baseline = &goal.profile;
    let z = rejecting_prefixes(goal, hypothesis, horizon, budget)?;
    let histories: Vec<History> = z.iter().map(|r| r.history.clone()).collect();
    let prefix_free = is_prefix_free(&histories);

    let unilateral: Vec<StrategyProfile> =
        (0..n).map(|i| baseline.with_strategy(PlayerId(i), hypothesis.get(PlayerId(i)).clone())).collect();
    // per-prefix probabilities under each unilateral deviation
    let p_uni: Vec<Vec<f64>> = unilateral
        .iter()
        .map(|profile| histories.iter().map(|h| prefix_probability(profile, h)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let p_star_prefix: Vec<f64> = histories.iter().map(|h| prefix_probability(baseline, h)).collect::<Result<_>>()?;

    let epsilon: f64 = z.iter().map(|r| r.baseline_probability).sum::<KahanSum>().value();
    let in_e = |j: usize| z.iter().enumerate().filter(move |(_, r)| r.blamed.0 == j).map(|(k, _)| k);
    let weighted = |k: usize, w: f64| if z[k].baseline_probability > 0.0 { w * z[k].baseline_probability } else { 0.0 };

    let mut violations = Vec::new();
    if !prefix_free {
        violations.push("rejecting prefixes are not prefix-free".to_string());
    }
    for (k, r) in z.iter().enumerate() {
        if (r.baseline_probability - p_star_prefix[k]).abs() > BOUND_TOLERANCE {
            violations.push(format!(
                "baseline probability of {:?} is {} by enumeration and {} by prefix",
                r.history, r.baseline_probability, p_star_prefix[k]
            ));
        }
    }

    let mut pairs = Vec::new();
    let mut players = Vec::new();
    for i in 0..n {
        let mut innocent = KahanSum::default();
        for j in (0..n).filter(|&j| j != i) {
            let joint_profile = unilateral[i].with_strategy(PlayerId(j), hypothesis.get(PlayerId(j)).clone());
            let p_deviation = in_e(j).map(|k| p_uni[i][k]).sum::<KahanSum>().value();
            let p_baseline = in_e(j).map(|k| z[k].baseline_probability).sum::<KahanSum>().value();
            let sq = in_e(j).map(|k| weighted(k, z[k].ratios[i] * z[k].ratios[i])).sum::<KahanSum>().value();
            let cross = in_e(j).map(|k| weighted(k, z[k].ratios[i] * z[k].ratios[j])).sum::<KahanSum>().value();
            let mut p_joint = KahanSum::default();
            for k in in_e(j) {
                p_joint.add(prefix_probability(&joint_profile, &z[k].history)?);
            }
            let cauchy_schwarz = sq * p_baseline;
            let ratio_product = cross * p_baseline;
            let chain =
                [p_deviation * p_deviation, cauchy_schwarz, ratio_product, p_joint.value() * p_baseline, p_baseline];
            let holds = chain.windows(2).all(|w| w[0] <= w[1] + BOUND_TOLERANCE);
            if !holds {
                violations.push(format!(
                    "chain fails for deviator {i}, blamed {j}: P_i(E_j)^2 = {}, Cauchy-Schwarz = {cauchy_schwarz}, \
                     ratio product = {ratio_product}, joint = {}, P*(E_j) = {p_baseline}; E_j = {:?}",
                    chain[0],
                    p_joint.value(),
                    in_e(j).map(|k| &z[k].history).collect::<Vec<_>>()
                ));
            }
            innocent.add(p_deviation);
            pairs.push(PairBound {
                deviator: PlayerId(i),
                blamed: PlayerId(j),
                p_deviation,
                cauchy_schwarz,
                ratio_product,
                p_joint: p_joint.value(),
                p_baseline,
                holds,
            });
        }
        let bound = lemma_bound(n, epsilon);
        let holds = innocent.value() <= bound + BOUND_TOLERANCE;
        if !holds {
            violations.push(format!("innocent blamed with {} > {bound} when {i} deviates", innocent.value()));
        }
        players.push(PlayerBound { deviator: PlayerId(i), innocent_blamed: innocent.value(), bound, holds });
    }

    let p_target = 1.0 - epsilon;
    let blame_sum: KahanSum = (0..n)
        .flat_map(|i| z.iter().enumerate().filter(move |(_, r)| r.blamed.0 != i).map(|(k, _)| k))
        .map(|k| p_star_prefix[k])
        .sum();
    let p_target_from_blame = 1.0 - blame_sum.value() / (n - 1) as f64;
    let identity_holds = (p_target - p_target_from_blame).abs() <= BOUND_TOLERANCE;
    if !identity_holds {
        violations.push(format!("P*(D) is {p_target} directly and {p_target_from_blame} from the blame split"));
    }

    let passed = violations.is_empty();
    Ok(BoundsReport {
        horizon,
        num_rejecting_prefixes: z.len(),
        prefix_free,
        epsilon,
        p_target,
        p_target_from_blame,
        identity_holds,
        pairs,
        players,
        violations,
        passed,
    })
}

/// Polarity-aware name of the miss event, for reports.
pub fn miss_event_name(polarity: Polarity) -> &'static str {
    match polarity {
        Polarity::RejectionOpen => "rejected_by_horizon",
        Polarity::AcceptanceOpen => "not_accepted_by_horizon",
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::adjacent_ones::{self, miss_probability_partial};
    use crate::deviations::{build_deviation, DeviationKind, DeviationSpec};
    use crate::model::{Bernoulli, PointMass, SharedStrategy};
    use crate::single_bit;

    fn fair_fair() -> (ActionSpace, StrategyProfile) {
        let space = ActionSpace::uniform(2, &["0", "1"]).unwrap();
        let profile =
            StrategyProfile::new(vec![Arc::new(Bernoulli::fair_coin()), Arc::new(Bernoulli::fair_coin())]).unwrap();
        (space, profile)
    }

    #[test]
    fn fair_pair_single_period() {
        let (space, profile) = fair_fair();
        let m = enumerate_measure(&space, &profile, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(m.len(), 4);
        assert!(m.iter().all(|(_, p)| *p == 0.25));
        let order: Vec<_> = m.iter().map(|(h, _)| h.profile(0).to_vec()).collect();
        assert_eq!(order, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn deterministic_a_fair_b() {
        let (space, _) = fair_fair();
        let profile =
            StrategyProfile::new(vec![Arc::new(PointMass { action: 1 }), Arc::new(Bernoulli::fair_coin())]).unwrap();
        let m = enumerate_measure(&space, &profile, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(m.len(), 4);
        assert!(m.iter().all(|(h, p)| *p == 0.25 && h.action(0, PlayerId::A) == 1));
    }

    #[test]
    fn adjacent_ones_two_periods() {
        let g = adjacent_ones::goal(0.1).unwrap();
        let m = enumerate_measure(&g.space, &g.profile, 2, DEFAULT_BUDGET).unwrap();
        let total: f64 = m.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let both = m.iter().find(|(h, _)| adjacent_ones::decode_bits(h) == vec![1, 1]).unwrap().1;
        assert!((both - 0.005).abs() < 1e-15);
    }

    #[test]
    fn rejection_matches_series_partial_sum() {
        let g = adjacent_ones::goal(0.1).unwrap();
        let p = exact_miss_probability(&g, &g.profile, 4, DEFAULT_BUDGET).unwrap();
        assert!((p - miss_probability_partial(0.1, 2)).abs() < 1e-15);
        let all = exact_event_probability(&g, &g.profile, 4, DEFAULT_BUDGET, |_, _| true).unwrap();
        assert!((all - 1.0).abs() < 1e-12);
    }

    #[test]
    fn always_zero_never_rejects() {
        let g = adjacent_ones::goal(0.1).unwrap();
        let zeros =
            StrategyProfile::new(vec![Arc::new(PointMass { action: 0 }), Arc::new(PointMass { action: 0 })]).unwrap();
        assert_eq!(exact_miss_probability(&g, &zeros, 6, DEFAULT_BUDGET).unwrap(), 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let (space, profile) = fair_fair();
        let err = enumerate_measure(&space, &profile, 12, 1000).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn prefix_free_check() {
        let space = ActionSpace::uniform(2, &["0", "1"]).unwrap();
        let a = History::from_profiles(&space, &[[1, 1]]).unwrap();
        let b = History::from_profiles(&space, &[[1, 1], [0, 0]]).unwrap();
        let c = History::from_profiles(&space, &[[0, 1], [0, 0]]).unwrap();
        assert!(is_prefix_free(&[a.clone(), c.clone()]));
        assert!(!is_prefix_free(&[b, a.clone(), c]));
        assert!(!is_prefix_free(&[a.clone(), a]));
    }

    fn biased(baseline: &StrategyProfile, space: &ActionSpace, p: f64) -> StrategyProfile {
        let strategies: Vec<SharedStrategy> = space
            .players()
            .map(|player| {
                let spec = DeviationSpec::new(player, DeviationKind::Biased { p });
                build_deviation(&spec, baseline.get(player).clone(), space, None).unwrap()
            })
            .collect();
        StrategyProfile::new(strategies).unwrap()
    }

    #[test]
    fn hypothesis_equal_to_baseline() {
        let g = adjacent_ones::goal(0.2).unwrap();
        let r = verify_blame_bounds(&g, &g.profile, 8, DEFAULT_BUDGET).unwrap();
        assert!(r.passed, "{:?}", r.violations);
        assert!(r.prefix_free);
        // all ratios are 1, so everything is blamed on A
        assert!(r.pairs.iter().filter(|p| p.blamed == PlayerId::B).all(|p| p.p_deviation == 0.0));
        let eps = r.epsilon;
        assert!((eps - miss_probability_partial(0.2, 4)).abs() < 1e-15);
    }

    #[test]
    fn always_one_hypothesis_on_adjacent_ones() {
        let g = adjacent_ones::goal(0.2).unwrap();
        let hyp = biased(&g.profile, &g.space, 1.0);
        let r = verify_blame_bounds(&g, &hyp, 8, DEFAULT_BUDGET).unwrap();
        assert!(r.passed, "{:?}", r.violations);
        assert!(r.identity_holds);
    }

    #[test]
    fn single_bit_game() {
        let mu = 0.3;
        let g = single_bit::goal(mu).unwrap();
        let eps = exact_miss_probability(&g, &g.profile, 1, DEFAULT_BUDGET).unwrap();
        assert!((eps - mu * mu).abs() < 1e-15);
        for player in g.space.players() {
            let spec = DeviationSpec::new(player, DeviationKind::AlwaysAction { action: "1".into() });
            let dev = build_deviation(&spec, g.profile.get(player).clone(), &g.space, None).unwrap();
            let actual = g.profile.with_strategy(player, dev);
            let p = exact_miss_probability(&g, &actual, 1, DEFAULT_BUDGET).unwrap();
            assert!((p - mu).abs() < 1e-15);
        }
        let r = verify_blame_bounds(&g, &biased(&g.profile, &g.space, 1.0), 1, DEFAULT_BUDGET).unwrap();
        assert!(r.passed, "{:?}", r.violations);
    }
}
