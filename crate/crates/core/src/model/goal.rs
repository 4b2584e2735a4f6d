use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::history::{ActionSpace, History};
use super::strategy::StrategyProfile;
use crate::error::Result;

/// Three-valued classification of a prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// This prefix is the minimal one all of whose continuations miss the target.
    RejectedHere,
    /// This prefix is the minimal one all of whose continuations hit the target.
    AcceptedHere,
    Undetermined,
}

/// Which side of the target set is detectable on finite prefixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// The complement of the target is open: misses are caught on prefixes,
    /// and a history still undetermined at the horizon counts as a hit.
    RejectionOpen,
    /// The target is open: hits are caught on prefixes, and a history still
    /// undetermined at the horizon counts as a miss.
    AcceptanceOpen,
}

/// Prefix classifier for a target set.
pub trait Detector: Debug + Send + Sync {
    fn polarity(&self) -> Polarity;

    /// Classifies `history` given that no proper prefix of it fired.
    ///
    /// Only the newest period needs to be inspected; callers stop feeding a
    /// path once it has fired.
    fn step(&self, history: &History) -> Classification;
}

/// The first prefix length at which `detector` fires along `history`.
pub fn first_firing(detector: &dyn Detector, history: &History) -> Option<(usize, Classification)> {
    let mut scratch = history.empty_like();
    for profile in history.profiles() {
        scratch.push_trusted(profile);
        match detector.step(&scratch) {
            Classification::Undetermined => {}
            fired => return Some((scratch.len(), fired)),
        }
    }
    None
}

/// Classification of the whole of `history` as a prefix: it is
/// `RejectedHere`/`AcceptedHere` only if the detector first fires at exactly
/// this length.
pub fn classify(detector: &dyn Detector, history: &History) -> Classification {
    match first_firing(detector, history) {
        Some((len, c)) if len == history.len() => c,
        _ => Classification::Undetermined,
    }
}

/// How an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EpisodeStatus {
    Rejected { at: usize },
    Accepted { at: usize },
    Undetermined { horizon: usize },
}

impl EpisodeStatus {
    /// Whether the realization counts as outside the target set, applying
    /// the truncation rule of `polarity` to undetermined episodes.
    pub fn misses_target(&self, polarity: Polarity) -> bool {
        match self {
            EpisodeStatus::Rejected { .. } => true,
            EpisodeStatus::Accepted { .. } => false,
            EpisodeStatus::Undetermined { .. } => polarity == Polarity::AcceptanceOpen,
        }
    }

    pub fn fired_at(&self) -> Option<usize> {
        match *self {
            EpisodeStatus::Rejected { at } | EpisodeStatus::Accepted { at } => Some(at),
            EpisodeStatus::Undetermined { .. } => None,
        }
    }
}

/// A realized finite history together with its classification.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub history: History,
    pub status: EpisodeStatus,
}

/// A prescribed profile together with a prefix-detectable target set.
#[derive(Debug, Clone)]
pub struct GoalSpec {
    pub space: Arc<ActionSpace>,
    pub profile: StrategyProfile,
    pub detector: Arc<dyn Detector>,
}

impl GoalSpec {
    pub fn new(space: ActionSpace, profile: StrategyProfile, detector: Arc<dyn Detector>) -> Result<Self> {
        profile.check_space(&space)?;
        Ok(Self { space: Arc::new(space), profile, detector })
    }

    pub fn polarity(&self) -> Polarity {
        self.detector.polarity()
    }

    pub fn num_players(&self) -> usize {
        self.space.num_players()
    }

    pub fn status_of(&self, history: &History) -> EpisodeStatus {
        match first_firing(self.detector.as_ref(), history) {
            Some((at, Classification::RejectedHere)) => EpisodeStatus::Rejected { at },
            Some((at, _)) => EpisodeStatus::Accepted { at },
            None => EpisodeStatus::Undetermined { horizon: history.len() },
        }
    }
}
