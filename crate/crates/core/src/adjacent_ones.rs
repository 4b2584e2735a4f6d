//! The adjacent-ones goal.
//!
//! Two players write a bit sequence, A in odd periods and B in even ones.
//! On turn in period `n` a player should write 1 with probability `mu / n`.
//! A realization misses the target once some odd period `n` and the period
//! after it both carry a 1. The explicit blame rule blames A when A's
//! weighted count of ones, `sum over odd 2k+1 with s_{2k+1} = 1 of mu/(2k+2)`,
//! exceeds `mu`, and B otherwise.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::model::{
    alternating_turn, ActionSpace, BehaviorStrategy, Classification, Detector, GoalSpec, History, PlayerId, Polarity,
    SharedStrategy, StrategyProfile,
};

pub const BIT_LABELS: [&str; 2] = ["0", "1"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjacentOnesParams {
    pub mu: f64,
    pub horizon: usize,
}

impl AdjacentOnesParams {
    pub fn new(mu: f64, horizon: usize) -> Result<Self> {
        validate_mu(mu)?;
        if horizon == 0 {
            return input("horizon must be at least 1");
        }
        Ok(Self { mu, horizon })
    }
}

fn validate_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu <= 1.0) {
        return input(format!("mu must lie in (0, 1], got {mu}"));
    }
    Ok(())
}

/// The prescribed strategy: on turn in period `n`, play 1 with probability
/// `mu / n`; off turn, play 0.
#[derive(Debug, Clone)]
pub struct AdjacentOnesHonest {
    pub mu: f64,
}

impl BehaviorStrategy for AdjacentOnesHonest {
    fn fill_distribution(&self, player: PlayerId, history: &History, out: &mut [f64]) {
        let n = history.next_period();
        if self.is_active(player, n) {
            let p = self.mu / n as f64;
            out[0] = 1.0 - p;
            out[1] = p;
        } else {
            out[0] = 1.0;
            out[1] = 0.0;
        }
    }

    fn is_active(&self, player: PlayerId, period: usize) -> bool {
        alternating_turn(period, 2) == player
    }
}

pub fn action_space() -> ActionSpace {
    ActionSpace::uniform(2, &BIT_LABELS).expect("two binary players")
}

pub fn honest_profile(mu: f64) -> Result<StrategyProfile> {
    validate_mu(mu)?;
    let s: SharedStrategy = Arc::new(AdjacentOnesHonest { mu });
    StrategyProfile::new(vec![s.clone(), s])
}

pub fn goal(mu: f64) -> Result<GoalSpec> {
    GoalSpec::new(action_space(), honest_profile(mu)?, Arc::new(AdjacentOnesDetector))
}

/// The bit sequence: in each period, the bit of the player on turn.
pub fn decode_bits(history: &History) -> Vec<u8> {
    history.profiles().enumerate().map(|(i, p)| p[alternating_turn(i + 1, 2).0] as u8).collect()
}

/// Rejection detector. Fires at the first even period `2k+2` whose bit and
/// the bit before it are both 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct AdjacentOnesDetector;

impl Detector for AdjacentOnesDetector {
    fn polarity(&self) -> Polarity {
        Polarity::RejectionOpen
    }

    fn step(&self, history: &History) -> Classification {
        let n = history.len();
        if n >= 2 && n.is_multiple_of(2) && history.action(n - 2, PlayerId::A) == 1 && history.action(n - 1, PlayerId::B) == 1 {
            Classification::RejectedHere
        } else {
            Classification::Undetermined
        }
    }
}

/// First rejection point of a decoded bit sequence (a 1-based period).
pub fn rejection_point(bits: &[u8]) -> Option<usize> {
    bits.chunks_exact(2).position(|pair| pair == [1, 1]).map(|k| 2 * k + 2)
}

/// Classification of `bits` as a prefix.
pub fn classify_bits(bits: &[u8]) -> Classification {
    match rejection_point(bits) {
        Some(at) if at == bits.len() => Classification::RejectedHere,
        _ => Classification::Undetermined,
    }
}

/// `sum over k with 2k+1 <= upto and s_{2k+1} = 1 of mu / (2k+2)`.
pub fn weighted_sum(bits: &[u8], mu: f64, upto: usize) -> f64 {
    bits.iter().take(upto).step_by(2).enumerate().filter(|(_, &b)| b == 1).map(|(k, _)| mu / (2 * k + 2) as f64).sum()
}

/// Which odd-period ones the threshold blame counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumVariant {
    /// Only odd periods up to the rejection point.
    PrefixOnly,
    /// Every odd period of the observed sequence, including those after the
    /// rejection point.
    #[default]
    FullHorizon,
}

/// Threshold blame: A if the weighted sum strictly exceeds `mu`, else B.
pub fn blame(bits: &[u8], mu: f64, variant: SumVariant) -> Result<PlayerId> {
    let at = rejection_point(bits)
        .ok_or_else(|| Error::Contract("threshold blame called on a sequence that was never rejected".into()))?;
    let upto = match variant {
        SumVariant::PrefixOnly => at,
        SumVariant::FullHorizon => bits.len(),
    };
    Ok(if weighted_sum(bits, mu, upto) > mu { PlayerId::A } else { PlayerId::B })
}

fn round_hazard(mu: f64, k: usize) -> f64 {
    let k = k as f64;
    mu * mu / ((2.0 * k + 1.0) * (2.0 * k + 2.0))
}

/// Partial sum over rounds `k < rounds` of the miss-probability series:
/// the exact probability of rejection within `2 * rounds` periods.
pub fn miss_probability_partial(mu: f64, rounds: usize) -> f64 {
    let mut survive = 1.0;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in 0..rounds {
        let q = round_hazard(mu, k);
        // Kahan step
        let y = survive * q - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        survive -= survive * q;
    }
    sum
}

/// Number of rounds after which `sum_{k >= K} mu^2/((2k+1)(2k+2))`, bounded
/// by `mu^2 / (4K)`, drops below `tolerance`.
pub fn rounds_for_tolerance(mu: f64, tolerance: f64) -> usize {
    let k = (mu * mu / (4.0 * tolerance)).floor() + 1.0;
    k.max(1.0) as usize
}

/// The miss probability `eps` of the honest profile, truncated once the tail
/// bound falls below `tolerance`.
pub fn miss_probability(mu: f64, tolerance: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mu) {
        return input(format!("mu must lie in [0, 1], got {mu}"));
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return input(format!("tolerance must be positive, got {tolerance}"));
    }
    if mu == 0.0 {
        return Ok(0.0);
    }
    Ok(miss_probability_partial(mu, rounds_for_tolerance(mu, tolerance)))
}

/// `sum over k < rounds of mu^2 / ((2k+1)(2k+2))`: the honest expectation of
/// the weighted sum over the first `2 * rounds` periods.
pub fn expected_weighted_sum(mu: f64, rounds: usize) -> f64 {
    (0..rounds).map(|k| round_hazard(mu, k)).sum()
}
