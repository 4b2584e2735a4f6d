//! Likelihood ratios of a candidate deviation against the prescribed
//! strategy, and the blame rule that names the player whose ratio is largest.
//!
//! Ratios are kept in the log domain. A factor `c/0` with `c > 0` makes the
//! ratio `+inf`, a factor `0/c` makes it `-inf`, and `0/0` counts as 1.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{input, Result};
use crate::model::{validate_distribution, BehaviorStrategy, History, PlayerId, StrategyProfile};

/// Log of a likelihood ratio, on the extended real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogLikelihoodRatio {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl LogLikelihoodRatio {
    pub fn is_finite(self) -> bool {
        matches!(self, LogLikelihoodRatio::Finite(_))
    }

    /// The value as an `f64`, using the float infinities for the sentinels.
    pub fn to_f64(self) -> f64 {
        match self {
            LogLikelihoodRatio::NegInfinity => f64::NEG_INFINITY,
            LogLikelihoodRatio::Finite(v) => v,
            LogLikelihoodRatio::PosInfinity => f64::INFINITY,
        }
    }

    /// `exp` of the log ratio, i.e. the ratio itself.
    pub fn ratio(self) -> f64 {
        self.to_f64().exp()
    }

    /// Shifts finite values by `c`; sentinels are unchanged.
    pub fn shifted(self, c: f64) -> Self {
        match self {
            LogLikelihoodRatio::Finite(v) => LogLikelihoodRatio::Finite(v + c),
            other => other,
        }
    }
}

impl Eq for LogLikelihoodRatio {}

impl PartialOrd for LogLikelihoodRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LogLikelihoodRatio {
    fn cmp(&self, other: &Self) -> Ordering {
        use LogLikelihoodRatio::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.total_cmp(b),
            (NegInfinity, NegInfinity) | (PosInfinity, PosInfinity) => Ordering::Equal,
            (NegInfinity, _) | (_, PosInfinity) => Ordering::Less,
            (PosInfinity, _) | (_, NegInfinity) => Ordering::Greater,
        }
    }
}

impl fmt::Display for LogLikelihoodRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogLikelihoodRatio::NegInfinity => f.write_str("-inf"),
            LogLikelihoodRatio::Finite(v) => write!(f, "{v}"),
            LogLikelihoodRatio::PosInfinity => f.write_str("+inf"),
        }
    }
}

impl Serialize for LogLikelihoodRatio {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            LogLikelihoodRatio::Finite(v) => serializer.serialize_f64(*v),
            LogLikelihoodRatio::NegInfinity => serializer.serialize_str("-inf"),
            LogLikelihoodRatio::PosInfinity => serializer.serialize_str("+inf"),
        }
    }
}

/// Streaming accumulator for a log likelihood ratio.
///
/// If a prefix contains both a `c/0` and a `0/c` factor it is impossible
/// under the deviation, and the ratio is reported as `-inf`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LlrAccumulator {
    log_sum: f64,
    saw_pos_inf: bool,
    saw_neg_inf: bool,
}

impl LlrAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds in one period: the deviation's and the baseline's probability of
    /// the action actually played.
    pub fn push(&mut self, deviation_p: f64, baseline_p: f64) {
        match (deviation_p > 0.0, baseline_p > 0.0) {
            (false, false) => {}
            (true, false) => self.saw_pos_inf = true,
            (false, true) => self.saw_neg_inf = true,
            (true, true) => self.log_sum += deviation_p.ln() - baseline_p.ln(),
        }
    }

    pub fn value(&self) -> LogLikelihoodRatio {
        if self.saw_neg_inf {
            LogLikelihoodRatio::NegInfinity
        } else if self.saw_pos_inf {
            LogLikelihoodRatio::PosInfinity
        } else {
            LogLikelihoodRatio::Finite(self.log_sum)
        }
    }
}

/// Log likelihood ratio of `deviation` over `baseline` for `player`'s
/// realized actions along `prefix`.
pub fn log_likelihood_ratio(
    deviation: &dyn BehaviorStrategy,
    baseline: &dyn BehaviorStrategy,
    player: PlayerId,
    prefix: &History,
) -> Result<LogLikelihoodRatio> {
    if player.0 >= prefix.num_players() {
        return input(format!("player {player} not in a {}-player history", prefix.num_players()));
    }
    let size = prefix.alphabet_size(player);
    let mut dev = vec![0.0; size];
    let mut base = vec![0.0; size];
    let mut acc = LlrAccumulator::new();
    let mut scratch = prefix.empty_like();
    for profile in prefix.profiles() {
        let period = scratch.next_period();
        deviation.fill_distribution(player, &scratch, &mut dev);
        validate_distribution(&mut dev, player, period)?;
        baseline.fill_distribution(player, &scratch, &mut base);
        validate_distribution(&mut base, player, period)?;
        let a = usize::from(profile[player.0]);
        acc.push(dev[a], base[a]);
        scratch.push_trusted(profile);
    }
    Ok(acc.value())
}

/// Outcome of the likelihood blame rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlameVerdict {
    pub blamed: PlayerId,
    pub per_player_llr: Vec<LogLikelihoodRatio>,
    /// More than one player attains the maximum.
    pub tie: bool,
    /// Every player's ratio is `+inf`; the lowest index is blamed.
    pub all_infinite: bool,
}

/// Blames the player with the largest log likelihood ratio, lowest index
/// first among ties.
pub fn blame_from_llrs(llrs: &[LogLikelihoodRatio]) -> BlameVerdict {
    assert!(!llrs.is_empty(), "blame needs at least one player");
    let max = *llrs.iter().max().expect("non-empty");
    let blamed = llrs.iter().position(|&l| l == max).expect("max is attained");
    let maximizers = llrs.iter().filter(|&&l| l == max).count();
    BlameVerdict {
        blamed: PlayerId(blamed),
        per_player_llr: llrs.to_vec(),
        tie: maximizers > 1,
        all_infinite: llrs.iter().all(|&l| l == LogLikelihoodRatio::PosInfinity),
    }
}

/// Computes each player's ratio of `hypothesis` over `baseline` on a
/// rejected prefix and blames the maximizer.
pub fn max_likelihood_blame(
    hypothesis: &StrategyProfile,
    baseline: &StrategyProfile,
    rejected_prefix: &History,
) -> Result<BlameVerdict> {
    if hypothesis.len() != baseline.len() || baseline.len() != rejected_prefix.num_players() {
        return input("hypothesis, baseline and history disagree on the number of players");
    }
    let llrs = (0..baseline.len())
        .map(|p| {
            let player = PlayerId(p);
            log_likelihood_ratio(
                hypothesis.get(player).as_ref(),
                baseline.get(player).as_ref(),
                player,
                rejected_prefix,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(blame_from_llrs(&llrs))
}

/// Testability guarantee `2 sqrt((|I| - 1) eps)` of the likelihood blame.
pub fn testability_bound(num_players: usize, epsilon: f64) -> f64 {
    2.0 * lemma_bound(num_players, epsilon)
}

/// Bound `sqrt((|I| - 1) eps)` on the probability that the maximum-likelihood
/// response blames an innocent player.
pub fn lemma_bound(num_players: usize, epsilon: f64) -> f64 {
    debug_assert!(num_players >= 2);
    debug_assert!((0.0..=1.0).contains(&epsilon));
    ((num_players - 1) as f64 * epsilon).sqrt()
}
