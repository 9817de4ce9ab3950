//! Exact optimal team returns by exhaustive search, for cooperative games
//! where every player maximizes the same (undiscounted) team-0 reward.

use alloc::vec::Vec;
use core::hash::Hash;

use hashbrown::HashMap;

use super::grid::GridGame;
use super::TurnGame;

type FnvMap<K, V> = HashMap<K, V, fnv::FnvBuildHasher>;

/// Memoized best total reward from `state` to the end of the game.
pub fn optimal_return_memo<G>(game: &G, state: &G::State) -> f64
where
    G: TurnGame,
    G::State: Hash + Eq,
{
    let mut memo = FnvMap::default();
    memo_rec(game, state, &mut memo)
}

fn memo_rec<G>(game: &G, state: &G::State, memo: &mut FnvMap<G::State, f64>) -> f64
where
    G: TurnGame,
    G::State: Hash + Eq,
{
    if let Some(&v) = memo.get(state) {
        return v;
    }
    let actions = game.legal_actions(state);
    let best = if actions.is_empty() {
        0.0
    } else {
        actions
            .iter()
            .map(|a| {
                let tr = game.step(state, a);
                tr.rewards[0] + memo_rec(game, &tr.state, memo)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    memo.insert(state.clone(), best);
    best
}

/// Depth-first branch and bound. `bound(s)` must never underestimate the
/// reward still collectable from `s`.
pub fn optimal_return_bnb<G, F>(game: &G, state: &G::State, bound: F) -> f64
where
    G: TurnGame,
    F: Fn(&G::State) -> f64,
{
    let mut best = f64::NEG_INFINITY;
    bnb_rec(game, state, 0.0, &bound, &mut best, &mut Vec::new());
    best
}

fn bnb_rec<G, F>(game: &G, state: &G::State, acc: f64, bound: &F, best: &mut f64, scratch: &mut Vec<G::Action>)
where
    G: TurnGame,
    F: Fn(&G::State) -> f64,
{
    game.legal_actions_into(state, scratch);
    if scratch.is_empty() {
        if acc > *best {
            *best = acc;
        }
        return;
    }
    if acc + bound(state) <= *best {
        return;
    }
    let actions = core::mem::take(scratch);
    for a in &actions {
        let tr = game.step(state, a);
        bnb_rec(game, &tr.state, acc + tr.rewards[0], bound, best, scratch);
    }
    *scratch = actions;
}

/// Best achievable team return on a gridworld from its initial state.
pub fn grid_optimum(game: &GridGame) -> f64 {
    optimal_return_bnb(game, &game.initial_state(), |s| game.return_upper_bound(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::grid::GridConfig;

    #[test]
    fn tiny_grid_methods_agree() {
        let cfg = GridConfig::parse("horizon 6\navatars shared b\nstay no\nfire -2\ncoin c 10 any\nmap\nb.Fc\n.Fcc\n")
            .unwrap();
        let g = GridGame::new(cfg).unwrap();
        let s = g.initial_state();
        let memo = optimal_return_memo(&g, &s);
        assert_eq!(memo, grid_optimum(&g));
        assert_eq!(memo, 28.0);
    }
}
