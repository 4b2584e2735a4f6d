//! The random-walk goal.
//!
//! A and B alternately move a token on the integers by ±1 with fair coins,
//! starting from `start` (10 by default). The target is reaching the origin.
//! The walk is recurrent, so the honest profile reaches it almost surely;
//! episodes that have not reached it by the horizon are the ones that need a
//! culprit. Blame is decided by four steps over surrogate statistics:
//!
//! 1. a law-of-the-iterated-logarithm test on each player's partial sums,
//! 2. a weighted series of each player's moves,
//! 3. the squared-position increments after each player's moves,
//! 4. otherwise A.

use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::model::{
    alternating_turn, Action, ActionSpace, BehaviorStrategy, Classification, Detector, GoalSpec, History, PlayerId,
    Polarity, StrategyProfile,
};

pub const WALK_LABELS: [&str; 3] = ["-1", "0", "+1"];
pub const DEFAULT_START: i64 = 10;
pub const DEFAULT_N0: usize = 100;

pub fn action_space() -> ActionSpace {
    ActionSpace::uniform(2, &WALK_LABELS).expect("static alphabet")
}

/// Maps actions to walk moves and histories to positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkGeometry {
    pub start: i64,
    pub down: Action,
    pub stay: Action,
    pub up: Action,
}

impl WalkGeometry {
    pub fn standard(start: i64) -> Self {
        Self { start, down: 0, stay: 1, up: 2 }
    }

    pub fn position(&self, history: &History) -> i64 {
        (0..history.num_players()).fold(self.start, |s, p| {
            let p = PlayerId(p);
            s + history.count(p, self.up) as i64 - history.count(p, self.down) as i64
        })
    }

    pub fn step_of(&self, action: Action) -> i8 {
        if action == self.up {
            1
        } else if action == self.down {
            -1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkParams {
    #[serde(default = "default_start")]
    pub start: i64,
    pub horizon: usize,
    pub thresholds: SurrogateThresholds,
}

fn default_start() -> i64 {
    DEFAULT_START
}

impl WalkParams {
    pub fn validate(&self) -> Result<()> {
        if self.start < 1 {
            return input(format!("walk start must be at least 1, got {}", self.start));
        }
        if self.horizon == 0 || !self.horizon.is_multiple_of(2) {
            return input(format!("walk horizon must be positive and even, got {}", self.horizon));
        }
        self.thresholds.validate()
    }
}

/// Fair ±1 on turn, the null move off turn.
#[derive(Debug, Clone, Copy, Default)]
pub struct WalkHonest;

impl BehaviorStrategy for WalkHonest {
    fn fill_distribution(&self, player: PlayerId, history: &History, out: &mut [f64]) {
        if alternating_turn(history.next_period(), history.num_players()) == player {
            out.copy_from_slice(&[0.5, 0.0, 0.5]);
        } else {
            out.copy_from_slice(&[0.0, 1.0, 0.0]);
        }
    }

    fn is_active(&self, player: PlayerId, period: usize) -> bool {
        alternating_turn(period, 2) == player
    }
}

/// Accepts the first time the position is 0.
#[derive(Debug, Clone, Copy)]
pub struct RandomWalkDetector {
    pub geometry: WalkGeometry,
}

impl Detector for RandomWalkDetector {
    fn polarity(&self) -> Polarity {
        Polarity::AcceptanceOpen
    }

    fn step(&self, history: &History) -> Classification {
        if !history.is_empty() && self.geometry.position(history) == 0 {
            Classification::AcceptedHere
        } else {
            Classification::Undetermined
        }
    }
}

pub fn honest_profile() -> StrategyProfile {
    StrategyProfile::new(vec![Arc::new(WalkHonest), Arc::new(WalkHonest)]).expect("two players")
}

pub fn goal(start: i64) -> Result<GoalSpec> {
    if start < 1 {
        return input(format!("walk start must be at least 1, got {start}"));
    }
    let detector = RandomWalkDetector { geometry: WalkGeometry::standard(start) };
    GoalSpec::new(action_space(), honest_profile(), Arc::new(detector))
}

/// Builds the alternating history whose k-th move (A first) is `moves[k]`.
pub fn history_from_moves(moves: &[i8]) -> Result<History> {
    let space = action_space();
    let g = WalkGeometry::standard(0);
    let mut h = History::with_capacity(&space, moves.len());
    for (k, &m) in moves.iter().enumerate() {
        let action = match m {
            1 => g.up,
            -1 => g.down,
            _ => return input(format!("walk move must be ±1, got {m}")),
        };
        let mut profile = [g.stay; 2];
        profile[k % 2] = action;
        h.push(&profile)?;
    }
    Ok(h)
}

/// A's and B's ±1 moves, A moving first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkTrace {
    pub start: i64,
    pub a_moves: Vec<i8>,
    pub b_moves: Vec<i8>,
}

impl WalkTrace {
    pub fn from_moves(start: i64, a_moves: Vec<i8>, b_moves: Vec<i8>) -> Result<Self> {
        if a_moves.len() != b_moves.len() && a_moves.len() != b_moves.len() + 1 {
            return input(format!("A has {} moves but B has {}", a_moves.len(), b_moves.len()));
        }
        if a_moves.iter().chain(&b_moves).any(|m| m.abs() != 1) {
            return input("walk moves must be ±1");
        }
        Ok(Self { start, a_moves, b_moves })
    }

    /// Reads the moves of an alternating history. The player off turn must
    /// play the null move and the player on turn must not.
    pub fn from_history(history: &History, geometry: &WalkGeometry) -> Result<Self> {
        let mut a_moves = Vec::with_capacity(history.len() / 2 + 1);
        let mut b_moves = Vec::with_capacity(history.len() / 2);
        for (i, profile) in history.profiles().enumerate() {
            let mover = i % 2;
            let step = geometry.step_of(profile[mover]);
            if step == 0 || geometry.step_of(profile[1 - mover]) != 0 {
                return input(format!("period {} is not an alternating walk move: {profile:?}", i + 1));
            }
            if mover == 0 {
                a_moves.push(step);
            } else {
                b_moves.push(step);
            }
        }
        Ok(Self { start: geometry.start, a_moves, b_moves })
    }

    pub fn len(&self) -> usize {
        self.a_moves.len() + self.b_moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn moves_of(&self, player: PlayerId) -> &[i8] {
        if player == PlayerId::A {
            &self.a_moves
        } else {
            &self.b_moves
        }
    }

    /// `s_0, ..., s_N`.
    pub fn positions(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut s = self.start;
        out.push(s);
        for n in 0..self.len() {
            s += i64::from(self.move_at(n + 1));
            out.push(s);
        }
        out
    }

    /// The move made in period `n` (1-based).
    pub fn move_at(&self, n: usize) -> i8 {
        if n % 2 == 1 {
            self.a_moves[(n - 1) / 2]
        } else {
            self.b_moves[n / 2 - 1]
        }
    }

    /// `A_n`, the sum of A's first `n` moves.
    pub fn a_sum(&self, n: usize) -> i64 {
        self.a_moves[..n].iter().map(|&m| i64::from(m)).sum()
    }

    /// `B_n`, the sum of B's first `n` moves.
    pub fn b_sum(&self, n: usize) -> i64 {
        self.b_moves[..n].iter().map(|&m| i64::from(m)).sum()
    }

    pub fn reached_origin(&self) -> bool {
        self.positions().contains(&0)
    }
}

/// Weight tables shared by all statistics, grown on demand.
#[derive(Debug)]
struct Weights {
    /// `1 / (√n ln ln n)`, zero below 3.
    lil: Vec<f64>,
    /// `1 / (√m (ln m)^{3/4})`, zero below 2.
    series: Vec<f64>,
    /// `1 / (k ln k)`, zero below 2.
    harmonic_log: Vec<f64>,
}

impl Weights {
    fn build(len: usize) -> Self {
        let mut lil = vec![0.0; len + 1];
        let mut series = vec![0.0; len + 1];
        let mut harmonic_log = vec![0.0; len + 1];
        for n in 2..=len {
            let x = n as f64;
            let ln = x.ln();
            if n >= 3 {
                lil[n] = 1.0 / (x.sqrt() * ln.ln());
            }
            series[n] = 1.0 / (x.sqrt() * ln.powf(0.75));
            harmonic_log[n] = 1.0 / (x * ln);
        }
        Self { lil, series, harmonic_log }
    }
}

static WEIGHTS: RwLock<Option<Arc<Weights>>> = RwLock::new(None);

fn weights(len: usize) -> Arc<Weights> {
    if let Some(w) = WEIGHTS.read().expect("weights lock").as_ref() {
        if w.lil.len() > len {
            return Arc::clone(w);
        }
    }
    let mut guard = WEIGHTS.write().expect("weights lock");
    match guard.as_ref() {
        Some(w) if w.lil.len() > len => Arc::clone(w),
        _ => {
            let w = Arc::new(Weights::build(len.max(1024).next_power_of_two()));
            *guard = Some(Arc::clone(&w));
            w
        }
    }
}

fn check_length(moves: &[i8], n0: usize) -> Result<()> {
    if n0 < 3 {
        return input(format!("n0 must be at least 3, got {n0}"));
    }
    if moves.len() < n0 {
        return input(format!("{} moves is fewer than n0 = {n0}", moves.len()));
    }
    Ok(())
}

/// Step 1: `max over n in [n0, N] of X_n / (√n ln ln n)`.
pub fn step1_stat(moves: &[i8], n0: usize) -> Result<f64> {
    check_length(moves, n0)?;
    let w = weights(moves.len());
    let mut partial = 0i64;
    let mut best = f64::NEG_INFINITY;
    for (i, &m) in moves.iter().enumerate() {
        partial += i64::from(m);
        let n = i + 1;
        if n >= n0 {
            best = best.max(partial as f64 * w.lil[n]);
        }
    }
    Ok(best)
}

/// Step 2: `max over n in [n0, N] of |S_n|` with
/// `S_n = sum_{m=2}^{n} x_m / (√m (ln m)^{3/4})`.
pub fn step2_stat(moves: &[i8], n0: usize) -> Result<f64> {
    check_length(moves, n0)?;
    let w = weights(moves.len());
    let mut s = 0.0;
    let mut best: f64 = 0.0;
    for (i, &m) in moves.iter().enumerate() {
        let n = i + 1;
        s += f64::from(m) * w.series[n];
        if n >= n0 {
            best = best.max(s.abs());
        }
    }
    Ok(best)
}

/// Step 3: `(T_odd, T_even)`.
///
/// `T_odd` sums the squared-position increments after A's moves, weighted by
/// `1 / (2n ln 2n)`; it diverging points at B. `T_even` does the same after
/// B's moves with `1 / ((2n-1) ln(2n-1))` and points at A.
pub fn step3_stats(trace: &WalkTrace) -> Result<(f64, f64)> {
    let len = trace.len();
    if len < 4 {
        return input(format!("step 3 needs at least 4 moves, got {len}"));
    }
    let s = trace.positions();
    let w = weights(len);
    let half = len / 2;
    let sq = |k: usize| s[k] * s[k];
    let t_odd = (1..half).map(|n| (sq(2 * n + 1) - sq(2 * n)) as f64 * w.harmonic_log[2 * n]).sum();
    let t_even = (2..=half).map(|n| (sq(2 * n) - sq(2 * n - 1)) as f64 * w.harmonic_log[2 * n - 1]).sum();
    Ok((t_odd, t_even))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateThresholds {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    #[serde(default = "default_n0")]
    pub n0: usize,
}

fn default_n0() -> usize {
    DEFAULT_N0
}

impl SurrogateThresholds {
    pub fn validate(&self) -> Result<()> {
        if self.n0 < 3 {
            return input(format!("n0 must be at least 3, got {}", self.n0));
        }
        if !(self.theta1 > 0.0 && self.theta1.is_finite()) || !(self.theta2 > 0.0 && self.theta2.is_finite()) {
            return input(format!("theta1 and theta2 must be positive, got {} and {}", self.theta1, self.theta2));
        }
        if !self.theta3.is_finite() {
            return input("theta3 must be finite");
        }
        Ok(())
    }
}

/// Every surrogate statistic of one trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkStatistics {
    /// Indexed by player.
    pub step1: [f64; 2],
    pub step2: [f64; 2],
    pub t_odd: f64,
    pub t_even: f64,
}

impl WalkStatistics {
    pub fn compute(trace: &WalkTrace, n0: usize) -> Result<Self> {
        let (t_odd, t_even) = step3_stats(trace)?;
        Ok(Self {
            step1: [step1_stat(&trace.a_moves, n0)?, step1_stat(&trace.b_moves, n0)?],
            step2: [step2_stat(&trace.a_moves, n0)?, step2_stat(&trace.b_moves, n0)?],
            t_odd,
            t_even,
        })
    }

    /// The step-3 statistic that points at `player`.
    pub fn step3_against(&self, player: PlayerId) -> f64 {
        if player == PlayerId::B {
            self.t_odd
        } else {
            self.t_even
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlameStep {
    Lil,
    Series,
    Divergence,
}

impl BlameStep {
    pub const DEFAULT_ORDER: [BlameStep; 3] = [BlameStep::Lil, BlameStep::Series, BlameStep::Divergence];

    fn number(self) -> u8 {
        match self {
            BlameStep::Lil => 1,
            BlameStep::Series => 2,
            BlameStep::Divergence => 3,
        }
    }

    /// The player this step blames, if it fires.
    pub fn fires(self, stats: &WalkStatistics, thresholds: &SurrogateThresholds) -> Option<PlayerId> {
        let (first, second) = match self {
            BlameStep::Lil => {
                ((PlayerId::A, stats.step1[0] > thresholds.theta1), (PlayerId::B, stats.step1[1] > thresholds.theta1))
            }
            BlameStep::Series => {
                ((PlayerId::A, stats.step2[0] > thresholds.theta2), (PlayerId::B, stats.step2[1] > thresholds.theta2))
            }
            BlameStep::Divergence => {
                ((PlayerId::B, stats.t_odd > thresholds.theta3), (PlayerId::A, stats.t_even > thresholds.theta3))
            }
        };
        [first, second].into_iter().find(|&(_, hit)| hit).map(|(p, _)| p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step1_stat: [f64; 2],
    pub step2_stat: [f64; 2],
    /// `[T_even, T_odd]`, the step-3 statistic pointing at A and at B.
    pub step3_stat: [f64; 2],
    pub decided_at_step: u8,
    pub blamed: PlayerId,
}

/// Runs the steps in `order`, falling through to A.
pub fn decide(stats: &WalkStatistics, thresholds: &SurrogateThresholds, order: &[BlameStep]) -> StepDiagnostics {
    let (decided_at_step, blamed) = order
        .iter()
        .find_map(|step| step.fires(stats, thresholds).map(|p| (step.number(), p)))
        .unwrap_or((4, PlayerId::A));
    StepDiagnostics {
        step1_stat: stats.step1,
        step2_stat: stats.step2,
        step3_stat: [stats.t_even, stats.t_odd],
        decided_at_step,
        blamed,
    }
}

/// The four-step blame on a trace that never reached the origin.
pub fn rw_blame(trace: &WalkTrace, thresholds: &SurrogateThresholds) -> Result<StepDiagnostics> {
    thresholds.validate()?;
    if trace.reached_origin() {
        return Err(Error::Contract("walk blame needs a trace that never reached the origin".into()));
    }
    let stats = WalkStatistics::compute(trace, thresholds.n0)?;
    Ok(decide(&stats, thresholds, &BlameStep::DEFAULT_ORDER))
}
