use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// Index of an action inside one player's alphabet.
pub type Action = u16;

/// A player, identified by a dense index `0..num_players`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub usize);

impl PlayerId {
    pub const A: PlayerId = PlayerId(0);
    pub const B: PlayerId = PlayerId(1);

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Per-player action alphabets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpace {
    alphabets: Vec<Vec<String>>,
}

impl ActionSpace {
    pub fn new(alphabets: Vec<Vec<String>>) -> Result<Self> {
        if alphabets.len() < 2 {
            return input(format!("need at least 2 players, got {}", alphabets.len()));
        }
        for (p, alphabet) in alphabets.iter().enumerate() {
            if alphabet.is_empty() {
                return input(format!("player {p} has an empty alphabet"));
            }
            if alphabet.len() > usize::from(Action::MAX) {
                return input(format!("player {p} has {} actions", alphabet.len()));
            }
        }
        Ok(Self { alphabets })
    }

    /// The same alphabet for every player.
    pub fn uniform(num_players: usize, labels: &[&str]) -> Result<Self> {
        let alphabet: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        Self::new(vec![alphabet; num_players])
    }

    pub fn num_players(&self) -> usize {
        self.alphabets.len()
    }

    pub fn players(&self) -> impl Iterator<Item = PlayerId> {
        (0..self.num_players()).map(PlayerId)
    }

    pub fn alphabet_size(&self, player: PlayerId) -> usize {
        self.alphabets[player.0].len()
    }

    pub fn labels(&self, player: PlayerId) -> &[String] {
        &self.alphabets[player.0]
    }

    pub fn index_of(&self, player: PlayerId, label: &str) -> Option<Action> {
        self.alphabets.get(player.0)?.iter().position(|l| l == label).map(|i| i as Action)
    }
}

/// Layout shared by every history over one action space.
#[derive(Debug, PartialEq, Eq)]
struct Layout {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

/// A finite sequence of action profiles.
///
/// Profiles are stored flat, one action per player per period. The history
/// also keeps running per-player action counts, so sufficient statistics
/// such as a walk position are available in constant time.
#[derive(Clone, PartialEq, Eq)]
pub struct History {
    layout: Arc<Layout>,
    actions: Vec<Action>,
    counts: Vec<u64>,
    periods: usize,
}

impl History {
    pub fn new(space: &ActionSpace) -> Self {
        let sizes: Vec<usize> = space.alphabets.iter().map(Vec::len).collect();
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for s in &sizes {
            acc += s;
            offsets.push(acc);
        }
        Self { layout: Arc::new(Layout { sizes, offsets }), actions: Vec::new(), counts: vec![0; acc], periods: 0 }
    }

    pub fn with_capacity(space: &ActionSpace, periods: usize) -> Self {
        let mut h = Self::new(space);
        h.actions.reserve(periods * space.num_players());
        h
    }

    /// Builds a history from explicit profiles, validating every entry.
    pub fn from_profiles<P: AsRef<[Action]>>(space: &ActionSpace, profiles: &[P]) -> Result<Self> {
        let mut h = Self::with_capacity(space, profiles.len());
        for p in profiles {
            h.push(p.as_ref())?;
        }
        Ok(h)
    }

    /// An empty history over the same action space.
    pub fn empty_like(&self) -> Self {
        Self { layout: Arc::clone(&self.layout), actions: Vec::new(), counts: vec![0; self.counts.len()], periods: 0 }
    }

    pub fn num_players(&self) -> usize {
        self.layout.sizes.len()
    }

    pub fn alphabet_size(&self, player: PlayerId) -> usize {
        self.layout.sizes[player.0]
    }

    /// Number of periods played so far.
    pub fn len(&self) -> usize {
        self.periods
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// The 1-based period that the next profile will occupy.
    pub fn next_period(&self) -> usize {
        self.len() + 1
    }

    /// Profile of the 0-based period `index`.
    pub fn profile(&self, index: usize) -> &[Action] {
        let n = self.num_players();
        &self.actions[index * n..(index + 1) * n]
    }

    pub fn last(&self) -> Option<&[Action]> {
        if self.is_empty() {
            None
        } else {
            Some(self.profile(self.len() - 1))
        }
    }

    pub fn action(&self, index: usize, player: PlayerId) -> Action {
        self.actions[index * self.num_players() + player.0]
    }

    pub fn profiles(&self) -> impl Iterator<Item = &[Action]> + '_ {
        self.actions.chunks_exact(self.num_players())
    }

    /// Actions of one player, period by period.
    pub fn player_actions(&self, player: PlayerId) -> impl Iterator<Item = Action> + '_ {
        self.profiles().map(move |p| p[player.0])
    }

    /// How many times `player` has played `action`.
    pub fn count(&self, player: PlayerId, action: Action) -> u64 {
        self.counts[self.layout.offsets[player.0] + usize::from(action)]
    }

    pub fn push(&mut self, profile: &[Action]) -> Result<()> {
        if profile.len() != self.num_players() {
            return input(format!("profile has {} entries, expected {}", profile.len(), self.num_players()));
        }
        for (p, &a) in profile.iter().enumerate() {
            if usize::from(a) >= self.layout.sizes[p] {
                return input(format!(
                    "action {a} out of range for player {p} (alphabet size {}) at period {}",
                    self.layout.sizes[p],
                    self.next_period()
                ));
            }
        }
        self.push_trusted(profile);
        Ok(())
    }

    /// Push without range checks; callers guarantee validity.
    pub(crate) fn push_trusted(&mut self, profile: &[Action]) {
        for (p, &a) in profile.iter().enumerate() {
            self.counts[self.layout.offsets[p] + usize::from(a)] += 1;
        }
        for &a in profile {
            self.actions.push(a);
        }
        self.periods += 1;
    }

    pub fn pop(&mut self) -> Option<Vec<Action>> {
        if self.is_empty() {
            return None;
        }
        let n = self.num_players();
        let profile = self.actions.split_off(self.actions.len() - n);
        self.periods -= 1;
        for (p, &a) in profile.iter().enumerate() {
            self.counts[self.layout.offsets[p] + usize::from(a)] -= 1;
        }
        Some(profile)
    }

    pub fn truncate(&mut self, periods: usize) {
        while self.len() > periods {
            self.pop();
        }
    }

    /// Copy of the first `periods` periods.
    pub fn prefix(&self, periods: usize) -> History {
        let mut h = self.empty_like();
        for p in self.profiles().take(periods) {
            h.push_trusted(p);
        }
        h
    }

    pub fn to_profiles(&self) -> Vec<Vec<Action>> {
        self.profiles().map(<[Action]>::to_vec).collect()
    }
}

impl fmt::Debug for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.profiles()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary() -> ActionSpace {
        ActionSpace::uniform(2, &["0", "1"]).unwrap()
    }

    #[test]
    fn rejects_degenerate_spaces() {
        assert!(ActionSpace::uniform(1, &["0"]).is_err());
        assert!(ActionSpace::new(vec![vec!["a".into()], vec![]]).is_err());
        let mixed = ActionSpace::new(vec![vec!["a".into()], vec!["x".into(), "y".into(), "z".into()]]).unwrap();
        assert_eq!(mixed.alphabet_size(PlayerId(1)), 3);
        assert_eq!(mixed.index_of(PlayerId(1), "z"), Some(2));
        assert_eq!(mixed.index_of(PlayerId(0), "z"), None);
    }

    #[test]
    fn push_validates_profiles() {
        let mut h = History::new(&binary());
        assert!(h.push(&[0, 1]).is_ok());
        assert!(h.push(&[0, 2]).is_err());
        assert!(h.push(&[0]).is_err());
        assert_eq!(h.len(), 1);
        assert_eq!(h.next_period(), 2);
    }

    #[test]
    fn counts_track_push_and_pop() {
        let mut h = History::from_profiles(&binary(), &[[1, 0], [1, 1], [0, 1]]).unwrap();
        assert_eq!(h.count(PlayerId::A, 1), 2);
        assert_eq!(h.count(PlayerId::B, 1), 2);
        assert_eq!(h.pop(), Some(vec![0, 1]));
        assert_eq!(h.count(PlayerId::B, 1), 1);
        assert_eq!(h.count(PlayerId::A, 0), 0);
        let p = h.prefix(1);
        assert_eq!(p.to_profiles(), vec![vec![1, 0]]);
        assert_eq!(p.count(PlayerId::A, 1), 1);
    }
}
