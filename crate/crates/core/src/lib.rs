//! Capability-aware ad hoc teamwork.
//!
//! Agents with heterogeneous, totally ordered capabilities (search depths)
//! infer one another's capability online and plan with capability-aware
//! Monte-Carlo tree search. This crate is `no_std` + `alloc`; file formats,
//! the experiment harness and the command-line tool live in the `captype`
//! companion crate.
//!
//! Module map:
//!
//! - [`capability`]: capability sets, beliefs, reduction, intervention and the
//!   type-structure predicate.
//! - [`exact`]: noise-free multiplicative belief updates and the greedy typed
//!   policy.
//! - [`tempered`]: loss-accumulating beliefs, softmax likelihoods, the
//!   generalized likelihood over feasible assignments and the φ-greedy policy.
//! - [`env`]: turn-based environments (gridworlds and cooperative checkers).
//! - [`search`]: MCTS, depth-bounded MCTS, progressive oblivious search and
//!   capability-aware MCTS.
//! - [`agents`]: agent strategies built from search and inference.
//! - [`oracle`]: brute-force tabular verification backend.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod agents;
pub mod capability;
pub mod env;
mod error;
pub mod exact;
pub mod oracle;
pub mod search;
pub mod tempered;

pub use capability::{Belief, BeliefBank, BeliefMode, Capability, CapabilitySet, PlayerRoster};
pub use error::{Error, Result};

/// Deterministic RNG used everywhere a seed has to reproduce a run.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the crate RNG from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
