//! Deviation strategies used as adversaries.
//!
//! Every deviation wraps the prescribed (baseline) strategy of the deviating
//! player. Off-turn periods always follow the baseline, so the alternation
//! encoding of the goal is preserved; on turn the deviation decides.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::model::{Action, ActionSpace, BehaviorStrategy, Bernoulli, History, PlayerId, PointMass, SharedStrategy};
use crate::random_walk::WalkGeometry;

/// What a deviating player does on turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeviationKind {
    Honest,
    /// Always plays the labelled action.
    AlwaysAction {
        action: String,
    },
    /// Plays the labelled action in its first on-turn period, then honestly.
    FirstMoveThenHonest {
        action: String,
    },
    /// Plays the up action ("1" or "+1") with probability `p`, down otherwise.
    Biased {
        p: f64,
    },
    /// Keeps the walk inside `[lo, hi]` (walk goal only).
    PinToBand {
        lo: i64,
        hi: i64,
    },
    /// With probability `p` plays up, otherwise honestly.
    DriftUp {
        p: f64,
    },
    /// Plays +1 from position 1, honestly elsewhere (walk goal only).
    ReflectAtOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationSpec {
    pub player: PlayerId,
    #[serde(flatten)]
    pub kind: DeviationKind,
}

impl DeviationSpec {
    pub fn new(player: PlayerId, kind: DeviationKind) -> Self {
        Self { player, kind }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DeviationKind::Biased { p } | DeviationKind::DriftUp { p } if !(0.0..=1.0).contains(&p) => {
                input(format!("deviation probability must lie in [0, 1], got {p}"))
            }
            DeviationKind::PinToBand { lo, hi } if lo < 1 || lo > hi => {
                input(format!("band needs 1 <= lo <= hi, got [{lo}, {hi}]"))
            }
            _ => Ok(()),
        }
    }
}

/// The up and down actions of a binary-choice alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpDown {
    pub up: Action,
    pub down: Action,
}

impl UpDown {
    pub fn resolve(space: &ActionSpace, player: PlayerId) -> Result<Self> {
        let find = |labels: &[&str]| labels.iter().find_map(|l| space.index_of(player, l));
        match (find(&["1", "+1"]), find(&["0", "-1"])) {
            (Some(up), Some(down)) => Ok(Self { up, down }),
            _ => input(format!("player {player}'s alphabet {:?} has no up/down actions", space.labels(player))),
        }
    }
}

/// Builds the strategy described by `spec` on top of `baseline`.
///
/// `walk` supplies the position geometry that walk-steering deviations need.
pub fn build_deviation(
    spec: &DeviationSpec,
    baseline: SharedStrategy,
    space: &ActionSpace,
    walk: Option<&WalkGeometry>,
) -> Result<SharedStrategy> {
    spec.validate()?;
    let player = spec.player;
    if player.0 >= space.num_players() {
        return input(format!("deviating player {player} does not exist"));
    }
    let label = |action: &str| {
        space.index_of(player, action).ok_or_else(|| {
            crate::error::Error::Input(format!(
                "action {action:?} not in player {player}'s alphabet {:?}",
                space.labels(player)
            ))
        })
    };
    let need_walk = || {
        walk.copied().ok_or_else(|| crate::error::Error::Input(format!("{:?} needs the random-walk goal", spec.kind)))
    };

    let built: SharedStrategy = match &spec.kind {
        DeviationKind::Honest => baseline,
        DeviationKind::AlwaysAction { action } => {
            Arc::new(OnTurn::new(baseline, Arc::new(PointMass { action: label(action)? })))
        }
        DeviationKind::FirstMoveThenHonest { action } => {
            let first_period = first_active_period(baseline.as_ref(), player)?;
            Arc::new(FirstMoveThenHonest { baseline, action: label(action)?, first_period })
        }
        DeviationKind::Biased { p } => {
            let ud = UpDown::resolve(space, player)?;
            Arc::new(OnTurn::new(baseline, Arc::new(Bernoulli { p: *p, up: ud.up, down: ud.down })))
        }
        DeviationKind::DriftUp { p } => {
            let ud = UpDown::resolve(space, player)?;
            Arc::new(DriftUp { baseline, p: *p, up: ud.up })
        }
        DeviationKind::PinToBand { lo, hi } => {
            Arc::new(PinToBand { baseline, geometry: need_walk()?, lo: *lo, hi: *hi })
        }
        DeviationKind::ReflectAtOne => Arc::new(ReflectAtOne { baseline, geometry: need_walk()? }),
    };
    Ok(built)
}

fn first_active_period(strategy: &dyn BehaviorStrategy, player: PlayerId) -> Result<usize> {
    (1..=1024)
        .find(|&n| strategy.is_active(player, n))
        .ok_or_else(|| crate::error::Error::Input(format!("player {player} is never on turn")))
}

fn point_mass(out: &mut [f64], action: Action) {
    out.fill(0.0);
    out[usize::from(action)] = 1.0;
}

/// Follows `inner` on turn and `baseline` off turn.
#[derive(Debug, Clone)]
pub struct OnTurn {
    baseline: SharedStrategy,
    inner: SharedStrategy,
}

impl OnTurn {
    pub fn new(baseline: SharedStrategy, inner: SharedStrategy) -> Self {
        Self { baseline, inner }
    }
}

impl BehaviorStrategy for OnTurn {
    fn fill_distribution(&self, player: PlayerId, history: &History, out: &mut [f64]) {
        if self.baseline.is_active(player, history.next_period()) {
            self.inner.fill_distribution(player, history, out);
        } else {
            self.baseline.fill_distribution(player, history, out);
        }
    }

    fn is_active(&self, player: PlayerId, period: usize) -> bool {
        self.baseline.is_active(player, period)
    }
}

#[derive(Debug, Clone)]
struct FirstMoveThenHonest {
    baseline: SharedStrategy,
    action: Action,
    first_period: usize,
}

impl BehaviorStrategy for FirstMoveThenHonest {
    fn fill_distribution(&self, player: PlayerId, history: &History, out: &mut [f64]) {
        if history.next_period() == self.first_period {
            point_mass(out, self.action);
        } else {
            self.baseline.fill_distribution(player, history, out);
        }
    }

    fn is_active(&self, player: PlayerId, period: usize) -> bool {
        self.baseline.is_active(player, period)
    }
}

#[derive(Debug, Clone)]
struct DriftUp {
    baseline: SharedStrategy,
    p: f64,
    up: Action,
}

impl BehaviorStrategy for DriftUp {
    fn fill_distribution(&self, player: PlayerId, history: &History, out: &mut [f64]) {
        self.baseline.fill_distribution(player, history, out);
        if self.baseline.is_active(player, history.next_period()) {
            out.iter_mut().for_each(|x| *x *= 1.0 - self.p);
            out[usize::from(self.up)] += self.p;
        }
    }

    fn is_active(&self, player: PlayerId, period: usize) -> bool {
        self.baseline.is_active(player, period)
    }
}

/// Steers the walk so that the position after its own move, and after any
/// ±1 reply, stays inside `[lo, hi]`.
///
/// Post-move positions in `[lo + 1, hi - 1]` are safe (the whole band when it
/// is narrower than three). If both moves are safe the baseline is followed,
/// if one is safe it is played, otherwise the move toward the band is played.
#[derive(Debug, Clone)]
struct PinToBand {
    baseline: SharedStrategy,
    geometry: WalkGeometry,
    lo: i64,
    hi: i64,
}

impl PinToBand {
    fn safe_range(&self) -> (i64, i64) {
        if self.lo + 2 <= self.hi {
            (self.lo + 1, self.hi - 1)
        } else {
            (self.lo, self.hi)
        }
    }
}

impl BehaviorStrategy for PinToBand {
    fn fill_distribution(&self, player: PlayerId, history: &History, out: &mut [f64]) {
        if !self.baseline.is_active(player, history.next_period()) {
            return self.baseline.fill_distribution(player, history, out);
        }
        let s = self.geometry.position(history);
        let (lo, hi) = self.safe_range();
        let safe = |p: i64| (lo..=hi).contains(&p);
        match (safe(s - 1), safe(s + 1)) {
            (true, true) => self.baseline.fill_distribution(player, history, out),
            (true, false) => point_mass(out, self.geometry.down),
            (false, true) => point_mass(out, self.geometry.up),
            (false, false) => point_mass(out, if s > hi { self.geometry.down } else { self.geometry.up }),
        }
    }

    fn is_active(&self, player: PlayerId, period: usize) -> bool {
        self.baseline.is_active(player, period)
    }
}

#[derive(Debug, Clone)]
struct ReflectAtOne {
    baseline: SharedStrategy,
    geometry: WalkGeometry,
}

impl BehaviorStrategy for ReflectAtOne {
    fn fill_distribution(&self, player: PlayerId, history: &History, out: &mut [f64]) {
        if self.baseline.is_active(player, history.next_period()) && self.geometry.position(history) == 1 {
            point_mass(out, self.geometry.up);
        } else {
            self.baseline.fill_distribution(player, history, out);
        }
    }

    fn is_active(&self, player: PlayerId, period: usize) -> bool {
        self.baseline.is_active(player, period)
    }
}
