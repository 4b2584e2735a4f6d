use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adjacent_ones::{self, SumVariant};
use crate::deviations::{build_deviation, DeviationSpec};
use crate::error::{Error, Result};
use crate::model::{GoalSpec, PlayerId, SharedStrategy, StrategyProfile};
use crate::random_walk::{self, BlameStep, SurrogateThresholds, WalkGeometry, DEFAULT_START};
use crate::single_bit;

pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// Goal id and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum GoalConfig {
    AdjacentOnes {
        mu: f64,
    },
    RandomWalk {
        #[serde(default = "default_start")]
        start: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thresholds: Option<ThresholdSource>,
    },
    SingleBit {
        mu: f64,
    },
}

fn default_start() -> i64 {
    DEFAULT_START
}

/// Thresholds given inline or as a path to a calibrated fragment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThresholdSource {
    Inline(SurrogateThresholds),
    File(PathBuf),
}

/// Which blame function judges missed episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum BlameConfig {
    /// The weighted-ones threshold rule of the adjacent-ones goal.
    AdjacentOnesThreshold {
        #[serde(default)]
        variant: SumVariant,
    },
    /// Maximum likelihood against `hypothesis`; the played deviations when absent.
    Likelihood {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hypothesis: Option<Vec<DeviationSpec>>,
    },
    /// The four-step walk rule.
    RandomWalkSteps {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order: Option<Vec<BlameStep>>,
    },
}

impl BlameConfig {
    pub fn id(&self) -> &'static str {
        match self {
            BlameConfig::AdjacentOnesThreshold { .. } => "adjacent_ones_threshold",
            BlameConfig::Likelihood { .. } => "likelihood",
            BlameConfig::RandomWalkSteps { .. } => "random_walk_steps",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub goal: GoalConfig,
    /// Unilateral or joint deviations from the prescribed profile.
    #[serde(default)]
    pub deviations: Vec<DeviationSpec>,
    pub blame: BlameConfig,
    pub horizon: usize,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    /// Count only missed episodes toward `trials`, discarding the rest.
    #[serde(default)]
    pub condition_on_miss: bool,
    /// Cap on simulated episodes when conditioning; defaults to 1000 per trial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_attempts: Option<u64>,
}

fn default_confidence() -> f64 {
    DEFAULT_CONFIDENCE
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Config(format!("confidence must lie in (0, 1), got {}", self.confidence)));
        }
        if self.max_attempts.is_some_and(|m| m < self.trials) {
            return Err(Error::Config("max_attempts is below trials".into()));
        }
        Ok(())
    }

    pub fn max_attempts(&self) -> u64 {
        self.max_attempts.unwrap_or(self.trials.saturating_mul(1000))
    }
}

/// What kind of goal was built, with the parameters blame rules need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GoalKind {
    AdjacentOnes { mu: f64 },
    RandomWalk { geometry: WalkGeometry, thresholds: Option<SurrogateThresholds> },
    SingleBit { mu: f64 },
}

#[derive(Debug, Clone)]
pub struct BuiltGoal {
    pub spec: GoalSpec,
    pub kind: GoalKind,
}

impl BuiltGoal {
    pub fn id(&self) -> &'static str {
        match self.kind {
            GoalKind::AdjacentOnes { .. } => "adjacent_ones",
            GoalKind::RandomWalk { .. } => "random_walk",
            GoalKind::SingleBit { .. } => "single_bit",
        }
    }

    pub fn walk_geometry(&self) -> Option<WalkGeometry> {
        match self.kind {
            GoalKind::RandomWalk { geometry, .. } => Some(geometry),
            _ => None,
        }
    }

    /// The prescribed profile with each listed player's strategy replaced.
    pub fn profile_with(&self, deviations: &[DeviationSpec]) -> Result<StrategyProfile> {
        let mut profile = self.spec.profile.clone();
        let mut seen: Vec<PlayerId> = Vec::new();
        for spec in deviations {
            if seen.contains(&spec.player) {
                return Err(Error::Config(format!("player {} deviates twice", spec.player)));
            }
            seen.push(spec.player);
            let baseline: SharedStrategy = Arc::clone(self.spec.profile.get_checked(spec.player).map_err(as_config)?);
            let strategy =
                build_deviation(spec, baseline, &self.spec.space, self.walk_geometry().as_ref()).map_err(as_config)?;
            profile = profile.with_strategy(spec.player, strategy);
        }
        Ok(profile)
    }
}

pub(crate) fn as_config(e: Error) -> Error {
    match e {
        Error::Input(msg) => Error::Config(msg),
        other => other,
    }
}

impl GoalConfig {
    pub fn id(&self) -> &'static str {
        match self {
            GoalConfig::AdjacentOnes { .. } => "adjacent_ones",
            GoalConfig::RandomWalk { .. } => "random_walk",
            GoalConfig::SingleBit { .. } => "single_bit",
        }
    }

    /// Builds the goal. File thresholds must have been resolved to inline
    /// ones by the caller.
    pub fn build(&self) -> Result<BuiltGoal> {
        let built = match *self {
            GoalConfig::AdjacentOnes { mu } => {
                BuiltGoal { spec: adjacent_ones::goal(mu).map_err(as_config)?, kind: GoalKind::AdjacentOnes { mu } }
            }
            GoalConfig::SingleBit { mu } => {
                BuiltGoal { spec: single_bit::goal(mu).map_err(as_config)?, kind: GoalKind::SingleBit { mu } }
            }
            GoalConfig::RandomWalk { start, ref thresholds } => {
                let thresholds = match thresholds {
                    None => None,
                    Some(ThresholdSource::Inline(t)) => {
                        t.validate().map_err(as_config)?;
                        Some(*t)
                    }
                    Some(ThresholdSource::File(path)) => {
                        return Err(Error::Config(format!("thresholds file {} was not loaded", path.display())))
                    }
                };
                BuiltGoal {
                    spec: random_walk::goal(start).map_err(as_config)?,
                    kind: GoalKind::RandomWalk { geometry: WalkGeometry::standard(start), thresholds },
                }
            }
        };
        Ok(built)
    }
}
