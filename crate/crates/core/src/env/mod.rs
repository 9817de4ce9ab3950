//! Turn-based, fully observable environments with one actor per timestep.

use alloc::vec::Vec;
use core::fmt::Debug;
use core::hash::{Hash, Hasher};

pub mod checkers;
pub mod exhaustive;
pub mod grid;

pub use checkers::{Checkers, CheckersMove, CheckersState};
pub use grid::{GridConfig, GridGame, GridState, Move};

/// Result of one step. Rewards are indexed by team.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition<S> {
    pub state: S,
    pub rewards: [f64; 2],
}

pub trait TurnGame {
    type State: Clone + Debug;
    type Action: Clone + PartialEq + Debug;

    fn n_players(&self) -> usize;

    fn initial_state(&self) -> Self::State;

    fn current_actor(&self, state: &Self::State) -> usize;

    /// Team index (0 or 1) of a player.
    fn team_of(&self, player: usize) -> usize;

    /// Writes the legal actions into `out` (cleared first). Empty iff terminal.
    fn legal_actions_into(&self, state: &Self::State, out: &mut Vec<Self::Action>);

    fn legal_actions(&self, state: &Self::State) -> Vec<Self::Action> {
        let mut out = Vec::new();
        self.legal_actions_into(state, &mut out);
        out
    }

    fn step(&self, state: &Self::State, action: &Self::Action) -> Transition<Self::State>;

    fn is_terminal(&self, state: &Self::State) -> bool;

    /// Stable 64-bit key of a state.
    fn state_key(&self, state: &Self::State) -> u64;

    /// The copy of `state` that planners see. Environments whose termination
    /// rules are hidden from players mask them here.
    fn planning_view(&self, state: &Self::State) -> Self::State {
        state.clone()
    }

    /// Players on the same team as `player`, excluding `player`.
    fn teammates_of(&self, player: usize) -> Vec<usize> {
        let team = self.team_of(player);
        (0..self.n_players())
            .filter(|&p| p != player && self.team_of(p) == team)
            .collect()
    }
}

/// FNV-1a key of any hashable value; stable across runs and platforms.
pub fn stable_key<T: Hash>(value: &T) -> u64 {
    let mut h = fnv::FnvHasher::default();
    value.hash(&mut h);
    h.finish()
}
