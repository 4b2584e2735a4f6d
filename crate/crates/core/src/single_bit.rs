//! The single-bit game: each player writes one bit at once, 1 with
//! probability `mu`. The target is missed when both bits are 1, so honest
//! play misses it with probability `mu²` while either player alone can push
//! that to `mu` by always writing 1.

use std::sync::Arc;

use crate::error::{input, Result};
use crate::model::{
    ActionSpace, BehaviorStrategy, Classification, Detector, GoalSpec, History, PlayerId, Polarity, StrategyProfile,
};

pub const BIT_LABELS: [&str; 2] = ["0", "1"];

pub fn action_space() -> ActionSpace {
    ActionSpace::uniform(2, &BIT_LABELS).expect("static alphabet")
}

/// Writes 1 with probability `mu` in period 1 and 0 afterwards.
#[derive(Debug, Clone, Copy)]
pub struct SingleBitHonest {
    pub mu: f64,
}

impl BehaviorStrategy for SingleBitHonest {
    fn fill_distribution(&self, _player: PlayerId, history: &History, out: &mut [f64]) {
        if history.is_empty() {
            out.copy_from_slice(&[1.0 - self.mu, self.mu]);
        } else {
            out.copy_from_slice(&[1.0, 0.0]);
        }
    }

    fn is_active(&self, _player: PlayerId, period: usize) -> bool {
        period == 1
    }
}

/// Rejects a first period in which every player wrote 1.
#[derive(Debug, Clone, Copy)]
pub struct SingleBitDetector;

impl Detector for SingleBitDetector {
    fn polarity(&self) -> Polarity {
        Polarity::RejectionOpen
    }

    fn step(&self, history: &History) -> Classification {
        if history.len() == 1 && history.profile(0).iter().all(|&a| a == 1) {
            Classification::RejectedHere
        } else {
            Classification::Undetermined
        }
    }
}

pub fn goal(mu: f64) -> Result<GoalSpec> {
    if !(0.0..=1.0).contains(&mu) {
        return input(format!("mu must lie in [0, 1], got {mu}"));
    }
    let honest = Arc::new(SingleBitHonest { mu });
    let profile = StrategyProfile::new(vec![honest.clone(), honest])?;
    GoalSpec::new(action_space(), profile, Arc::new(SingleBitDetector))
}
