//! Players, histories, behavior strategies, goals and episode simulation.
//!
//! Play is simultaneous: every period each player draws one action from its
//! behavior strategy given the history so far. Alternating play is encoded
//! by strategies that put a point mass on a null action when off turn
//! (see [`Alternating`]).

mod episode;
mod goal;
mod history;
mod strategy;

pub use episode::{play_episode, play_episode_with, trial_rng, PlayOptions};
pub use goal::{classify, first_firing, Classification, Detector, EpisodeResult, EpisodeStatus, GoalSpec, Polarity};
pub use history::{Action, ActionSpace, History, PlayerId};
pub use strategy::{
    action_distribution, prefix_probability, Alternating, BehaviorStrategy, Bernoulli, PointMass, SharedStrategy,
    Stationary, StrategyProfile, PROB_TOLERANCE,
};

pub(crate) use strategy::{alternating_turn, validate_distribution};
