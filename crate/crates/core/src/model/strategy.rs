use std::fmt::Debug;
use std::sync::Arc;

use super::history::{Action, ActionSpace, History, PlayerId};
use crate::error::{input, Error, Result};

/// Tolerance for a strategy output to count as a probability vector.
pub const PROB_TOLERANCE: f64 = 1e-12;

/// A behavior strategy: maps a finite history to a distribution over one
/// player's actions for the next period.
///
/// Implementations must be deterministic in their inputs.
pub trait BehaviorStrategy: Debug + Send + Sync {
    /// Writes the distribution for `player` in period `history.next_period()`
    /// into `out`, which has one slot per action of the player's alphabet.
    fn fill_distribution(&self, player: PlayerId, history: &History, out: &mut [f64]);

    /// Whether `player` is on turn in the 1-based `period`. Off-turn periods
    /// are expected to put a point mass on a null action.
    fn is_active(&self, _player: PlayerId, _period: usize) -> bool {
        true
    }
}

pub type SharedStrategy = Arc<dyn BehaviorStrategy>;

/// Checks `dist` is a probability vector within [`PROB_TOLERANCE`] and
/// renormalizes it in place.
#[inline]
pub(crate) fn validate_distribution(dist: &mut [f64], player: PlayerId, period: usize) -> Result<()> {
    let mut sum = 0.0;
    let mut entries_ok = true;
    for &p in dist.iter() {
        entries_ok &= (0.0..=f64::MAX).contains(&p);
        sum += p;
    }
    if entries_ok && sum == 1.0 {
        return Ok(());
    }
    normalize_or_reject(dist, player, period)
}

#[cold]
fn normalize_or_reject(dist: &mut [f64], player: PlayerId, period: usize) -> Result<()> {
    let mut sum = 0.0;
    for &p in dist.iter() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution {
                player: player.0,
                period,
                reason: format!("entry {p} is not a non-negative finite number"),
            });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(Error::InvalidDistribution { player: player.0, period, reason: format!("entries sum to {sum}") });
    }
    dist.iter_mut().for_each(|p| *p /= sum);
    Ok(())
}

/// The validated distribution that `strategy` assigns to `player`'s next action.
pub fn action_distribution(strategy: &dyn BehaviorStrategy, player: PlayerId, history: &History) -> Result<Vec<f64>> {
    if player.0 >= history.num_players() {
        return input(format!("player {} not in a {}-player history", player, history.num_players()));
    }
    let mut out = vec![0.0; history.alphabet_size(player)];
    strategy.fill_distribution(player, history, &mut out);
    validate_distribution(&mut out, player, history.next_period())?;
    Ok(out)
}

/// One behavior strategy per player.
#[derive(Debug, Clone)]
pub struct StrategyProfile {
    strategies: Vec<SharedStrategy>,
}

impl StrategyProfile {
    pub fn new(strategies: Vec<SharedStrategy>) -> Result<Self> {
        if strategies.len() < 2 {
            return input(format!("a profile needs at least 2 players, got {}", strategies.len()));
        }
        Ok(Self { strategies })
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    pub fn get(&self, player: PlayerId) -> &SharedStrategy {
        &self.strategies[player.0]
    }

    pub fn get_checked(&self, player: PlayerId) -> Result<&SharedStrategy> {
        self.strategies
            .get(player.0)
            .ok_or_else(|| Error::Input(format!("player {player} not in a {}-player profile", self.len())))
    }

    pub fn iter(&self) -> impl Iterator<Item = &SharedStrategy> {
        self.strategies.iter()
    }

    /// The profile with `player`'s strategy replaced, e.g. `(σ_i, σ*_{-i})`.
    pub fn with_strategy(&self, player: PlayerId, strategy: SharedStrategy) -> Self {
        let mut strategies = self.strategies.clone();
        strategies[player.0] = strategy;
        Self { strategies }
    }

    pub(crate) fn check_space(&self, space: &ActionSpace) -> Result<()> {
        if self.len() != space.num_players() {
            return input(format!("profile has {} strategies for {} players", self.len(), space.num_players()));
        }
        Ok(())
    }
}

/// Probability that `profile` generates exactly `prefix` as its first periods.
pub fn prefix_probability(profile: &StrategyProfile, prefix: &History) -> Result<f64> {
    if profile.len() != prefix.num_players() {
        return input(format!(
            "profile has {} strategies, history has {} players",
            profile.len(),
            prefix.num_players()
        ));
    }
    let mut scratch = prefix.empty_like();
    let mut buf = Vec::new();
    let mut prob = 1.0;
    for profile_actions in prefix.profiles() {
        for (p, strategy) in profile.iter().enumerate() {
            let player = PlayerId(p);
            buf.clear();
            buf.resize(scratch.alphabet_size(player), 0.0);
            strategy.fill_distribution(player, &scratch, &mut buf);
            validate_distribution(&mut buf, player, scratch.next_period())?;
            prob *= buf[usize::from(profile_actions[p])];
        }
        scratch.push_trusted(profile_actions);
    }
    Ok(prob)
}

/// Point mass on one action in every period.
#[derive(Debug, Clone)]
pub struct PointMass {
    pub action: Action,
}

impl BehaviorStrategy for PointMass {
    fn fill_distribution(&self, _player: PlayerId, _history: &History, out: &mut [f64]) {
        out.fill(0.0);
        out[usize::from(self.action)] = 1.0;
    }
}

/// A fixed distribution, the same in every period.
#[derive(Debug, Clone)]
pub struct Stationary {
    pub probabilities: Vec<f64>,
}

impl BehaviorStrategy for Stationary {
    fn fill_distribution(&self, _player: PlayerId, _history: &History, out: &mut [f64]) {
        out.copy_from_slice(&self.probabilities);
    }
}

/// Plays `up` with probability `p` and `down` otherwise.
#[derive(Debug, Clone)]
pub struct Bernoulli {
    pub p: f64,
    pub up: Action,
    pub down: Action,
}

impl Bernoulli {
    /// Binary alphabet `{0, 1}`, playing 1 with probability `p`.
    pub fn binary(p: f64) -> Self {
        Self { p, up: 1, down: 0 }
    }

    pub fn fair_coin() -> Self {
        Self::binary(0.5)
    }
}

impl BehaviorStrategy for Bernoulli {
    fn fill_distribution(&self, _player: PlayerId, _history: &History, out: &mut [f64]) {
        out.fill(0.0);
        out[usize::from(self.down)] += 1.0 - self.p;
        out[usize::from(self.up)] += self.p;
    }
}

/// Alternating-play encoding: in period `n` only player `(n - 1) mod k` is
/// on turn and follows `inner`; everyone else puts a point mass on `null`.
#[derive(Debug, Clone)]
pub struct Alternating {
    pub inner: SharedStrategy,
    pub null: Action,
    pub num_players: usize,
}

pub(crate) fn alternating_turn(period: usize, num_players: usize) -> PlayerId {
    if num_players == 2 {
        PlayerId((period - 1) & 1)
    } else {
        PlayerId((period - 1) % num_players)
    }
}

impl BehaviorStrategy for Alternating {
    fn fill_distribution(&self, player: PlayerId, history: &History, out: &mut [f64]) {
        if self.is_active(player, history.next_period()) {
            self.inner.fill_distribution(player, history, out);
        } else {
            out.fill(0.0);
            out[usize::from(self.null)] = 1.0;
        }
    }

    fn is_active(&self, player: PlayerId, period: usize) -> bool {
        alternating_turn(period, self.num_players) == player
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary() -> ActionSpace {
        ActionSpace::uniform(2, &["0", "1"]).unwrap()
    }

    #[derive(Debug)]
    struct Broken(Vec<f64>);
    impl BehaviorStrategy for Broken {
        fn fill_distribution(&self, _: PlayerId, _: &History, out: &mut [f64]) {
            out.copy_from_slice(&self.0);
        }
    }

    #[test]
    fn fair_coin_is_uniform() {
        let h = History::from_profiles(&binary(), &[[0, 1], [1, 1]]).unwrap();
        let d = action_distribution(&Bernoulli::fair_coin(), PlayerId::A, &h).unwrap();
        assert_eq!(d, vec![0.5, 0.5]);
    }

    #[test]
    fn point_mass_on_one() {
        let h = History::new(&binary());
        let d = action_distribution(&PointMass { action: 1 }, PlayerId::B, &h).unwrap();
        assert_eq!(d, vec![0.0, 1.0]);
    }

    #[test]
    fn distributions_outside_tolerance_are_rejected() {
        let h = History::new(&binary());
        assert!(action_distribution(&Broken(vec![0.5, 0.6]), PlayerId::A, &h).is_err());
        assert!(action_distribution(&Broken(vec![-0.1, 1.1]), PlayerId::A, &h).is_err());
        assert!(action_distribution(&Broken(vec![f64::NAN, 1.0]), PlayerId::A, &h).is_err());
        let d = action_distribution(&Broken(vec![0.5, 0.5 + 1e-13]), PlayerId::A, &h).unwrap();
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn prefix_probability_examples() {
        let space = binary();
        let fair: SharedStrategy = Arc::new(Bernoulli::fair_coin());
        let both_fair = StrategyProfile::new(vec![fair.clone(), fair.clone()]).unwrap();
        let one = History::from_profiles(&space, &[[1, 0]]).unwrap();
        assert_eq!(prefix_probability(&both_fair, &one).unwrap(), 0.25);
        assert_eq!(prefix_probability(&both_fair, &History::new(&space)).unwrap(), 1.0);

        let forced = StrategyProfile::new(vec![Arc::new(PointMass { action: 1 }), fair]).unwrap();
        let consistent = History::from_profiles(&space, &[[1, 0], [1, 1]]).unwrap();
        let inconsistent = History::from_profiles(&space, &[[1, 0], [0, 1]]).unwrap();
        assert_eq!(prefix_probability(&forced, &consistent).unwrap(), 0.25);
        assert_eq!(prefix_probability(&forced, &inconsistent).unwrap(), 0.0);
    }

    #[test]
    fn alternation_puts_off_turn_mass_on_null() {
        let space = binary();
        let alt = Alternating { inner: Arc::new(Bernoulli::binary(0.3)), null: 0, num_players: 2 };
        let mut h = History::new(&space);
        assert_eq!(action_distribution(&alt, PlayerId::A, &h).unwrap(), vec![0.7, 0.3]);
        assert_eq!(action_distribution(&alt, PlayerId::B, &h).unwrap(), vec![1.0, 0.0]);
        h.push(&[1, 0]).unwrap();
        assert_eq!(action_distribution(&alt, PlayerId::A, &h).unwrap(), vec![1.0, 0.0]);
        assert!(alt.is_active(PlayerId::B, 2));
    }
}
