//! Brute-force verification backend: tiny enumerable cooperative games, exact
//! typed Q tables, exhaustive posteriors and a theorem harness.
//!
//! A type-`c` player of a [`TabularGame`] looks `c` steps ahead: its Q-value
//! is the best total reward over the next `c` steps (all players maximizing),
//! truncated at the horizon.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::capability::{BeliefBank, Capability, CapabilitySet};
use crate::exact::{argmax_set, TypedQProvider, TIE_TOLERANCE};
use crate::tempered::{AssignmentValueProvider, Outcome};
use crate::{Error, Result};

mod theorems;

pub use theorems::{verify_theorem, Theorem, TheoremReport, VerifyConfig};

pub const MAX_STATES: usize = 200;
pub const MAX_HORIZON: usize = 10;
pub const MAX_TYPES: usize = 4;

/// A position in a tabular game: state index and time within the episode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TabState {
    pub s: usize,
    pub t: usize,
}

/// A finite-horizon cooperative game with explicit tables. The actor at time
/// `t` is `t % n_players`; every state offers the same `n_actions` actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabularGame {
    pub n_states: usize,
    pub n_actions: usize,
    pub n_players: usize,
    pub horizon: usize,
    pub gamma: f64,
    /// `transitions[s][a]`: successor states with probabilities.
    pub transitions: Vec<Vec<Vec<(usize, f64)>>>,
    /// `rewards[s][a]`: team reward for taking `a` in `s`.
    pub rewards: Vec<Vec<f64>>,
    pub set: CapabilitySet,
}

/// Shape of a randomly drawn [`TabularGame`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomGameSpec {
    pub n_states: usize,
    pub n_actions: usize,
    pub n_players: usize,
    pub horizon: usize,
    pub gamma: f64,
    pub labels: Vec<Capability>,
}

impl Default for RandomGameSpec {
    fn default() -> Self {
        Self {
            n_states: 4,
            n_actions: 3,
            n_players: 2,
            horizon: 5,
            gamma: 1.0,
            labels: vec![1, 2, 3, 4],
        }
    }
}

impl TabularGame {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.n_states == 0 || self.n_states > MAX_STATES {
            return bad("tabular games hold 1..=200 states");
        }
        if self.horizon == 0 || self.horizon > MAX_HORIZON {
            return bad("tabular horizons are 1..=10");
        }
        if self.n_actions == 0 || self.n_players == 0 {
            return bad("tabular games need actions and players");
        }
        if self.set.len() > MAX_TYPES {
            return bad("tabular games support at most 4 capability types");
        }
        if self.transitions.len() != self.n_states || self.rewards.len() != self.n_states {
            return bad("one transition and reward row per state");
        }
        for s in 0..self.n_states {
            if self.transitions[s].len() != self.n_actions || self.rewards[s].len() != self.n_actions {
                return bad("one entry per action");
            }
            for outs in &self.transitions[s] {
                let total: f64 = outs.iter().map(|&(_, p)| p).sum();
                if outs.is_empty() || libm::fabs(total - 1.0) > 1e-12 {
                    return bad("transition probabilities must sum to 1");
                }
                if outs.iter().any(|&(n, p)| n >= self.n_states || !(p > 0.0)) {
                    return bad("transitions must name valid states with positive probability");
                }
            }
        }
        Ok(())
    }

    /// Draws a game with small integer rewards (so values tie exactly) and
    /// one or two equally likely successors per state-action pair.
    pub fn random<R: RngCore>(spec: &RandomGameSpec, rng: &mut R) -> Result<Self> {
        let set = CapabilitySet::new(spec.labels.clone())?;
        let mut transitions = Vec::with_capacity(spec.n_states);
        let mut rewards = Vec::with_capacity(spec.n_states);
        for _ in 0..spec.n_states {
            let mut row = Vec::with_capacity(spec.n_actions);
            let mut rew = Vec::with_capacity(spec.n_actions);
            for _ in 0..spec.n_actions {
                let a = rng.gen_range(0..spec.n_states);
                if rng.gen_bool(0.5) {
                    row.push(vec![(a, 1.0)]);
                } else {
                    let mut b = rng.gen_range(0..spec.n_states);
                    if b == a {
                        b = (a + 1) % spec.n_states;
                    }
                    if a == b {
                        row.push(vec![(a, 1.0)]);
                    } else {
                        row.push(vec![(a, 0.5), (b, 0.5)]);
                    }
                }
                rew.push([0.0, 0.0, 1.0, 2.0][rng.gen_range(0..4)]);
            }
            transitions.push(row);
            rewards.push(rew);
        }
        let game = Self {
            n_states: spec.n_states,
            n_actions: spec.n_actions,
            n_players: spec.n_players,
            horizon: spec.horizon,
            gamma: spec.gamma,
            transitions,
            rewards,
            set,
        };
        game.validate()?;
        Ok(game)
    }

    pub fn actor(&self, t: usize) -> usize {
        t % self.n_players
    }

    pub fn is_terminal(&self, x: &TabState) -> bool {
        x.t >= self.horizon
    }

    pub fn initial(&self) -> TabState {
        TabState { s: 0, t: 0 }
    }
}

/// Depth-`c` lookahead Q-values for every (time, state, action).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub c: Capability,
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn q(&self, x: &TabState, a: usize) -> f64 {
        self.values[(x.t * self.n_states + x.s) * self.n_actions + a]
    }

    pub fn row(&self, x: &TabState) -> &[f64] {
        let start = (x.t * self.n_states + x.s) * self.n_actions;
        &self.values[start..start + self.n_actions]
    }

    pub fn value(&self, x: &TabState) -> f64 {
        self.row(x).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Backward induction of the depth-`c` lookahead Q tables.
///
/// `W_k(s, t)` is the best reward over the next `k` steps; then
/// `Q^c(s, t, a) = r(s, a) + γ E[W_{k-1}(s', t+1)]` with `k = min(c, H - t)`.
pub fn value_iteration_typed(game: &TabularGame, c: Capability) -> Result<QTable> {
    game.validate()?;
    let (ns, na, h) = (game.n_states, game.n_actions, game.horizon);
    let depth = (c as usize).min(h);
    // w[k][t][s] for k = 0..=depth, t = 0..=h
    let mut w = vec![vec![vec![0.0f64; ns]; h + 1]; depth + 1];
    let backup = |w_prev: &Vec<Vec<f64>>, t: usize, s: usize, a: usize| -> f64 {
        let future: f64 = game.transitions[s][a].iter().map(|&(n, p)| p * w_prev[t + 1][n]).sum();
        game.rewards[s][a] + game.gamma * future
    };
    for k in 1..=depth {
        for t in (0..h).rev() {
            for s in 0..ns {
                let best = (0..na)
                    .map(|a| backup(&w[k - 1], t, s, a))
                    .fold(f64::NEG_INFINITY, f64::max);
                w[k][t][s] = best;
            }
        }
    }
    let mut values = vec![0.0; h * ns * na];
    for t in 0..h {
        let k = depth.min(h - t);
        for s in 0..ns {
            for a in 0..na {
                values[(t * ns + s) * na + a] = backup(&w[k - 1], t, s, a);
            }
        }
    }
    Ok(QTable {
        c,
        n_states: ns,
        n_actions: na,
        values,
    })
}

/// The same quantity as [`value_iteration_typed`], by plain recursion with
/// no shared tables. Exponential; meant for tiny games and cross-checks.
pub fn recursive_q(game: &TabularGame, c: Capability, x: &TabState, a: usize) -> f64 {
    let steps = (c as usize).min(game.horizon.saturating_sub(x.t));
    lookahead(game, steps, x, a)
}

fn lookahead(game: &TabularGame, steps: usize, x: &TabState, a: usize) -> f64 {
    let mut future = 0.0;
    if steps > 1 {
        for &(n, p) in &game.transitions[x.s][a] {
            let next = TabState { s: n, t: x.t + 1 };
            let best = (0..game.n_actions)
                .map(|b| lookahead(game, steps - 1, &next, b))
                .fold(f64::NEG_INFINITY, f64::max);
            future += p * best;
        }
    }
    game.rewards[x.s][a] + game.gamma * future
}

/// Typed Q-provider backed by value-iteration tables, one per capability.
/// Values ignore beliefs: every player simply plans over its own lookahead.
#[derive(Clone, Debug)]
pub struct TabularQ<'a> {
    pub game: &'a TabularGame,
    tables: Vec<QTable>,
}

impl<'a> TabularQ<'a> {
    pub fn new(game: &'a TabularGame) -> Result<Self> {
        let tables = game
            .set
            .labels()
            .iter()
            .map(|&c| value_iteration_typed(game, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { game, tables })
    }

    pub fn table(&self, c: Capability) -> Result<&QTable> {
        Ok(&self.tables[self.game.set.index_of(c)?])
    }

    /// Actions a type-`c` player may take at `x` (its argmax set).
    pub fn optimal_actions(&self, c: Capability, x: &TabState) -> Result<Vec<usize>> {
        Ok(argmax_set(self.table(c)?.row(x), TIE_TOLERANCE))
    }
}

impl TypedQProvider for TabularQ<'_> {
    type State = TabState;
    type Action = usize;

    fn actions(&self, _: &TabState) -> Vec<usize> {
        (0..self.game.n_actions).collect()
    }

    fn q(&self, c: Capability, x: &TabState, _: &BeliefBank, a: &usize) -> f64 {
        self.tables[self.game.set.index_of(c).expect("capability from the game's set")].q(x, *a)
    }
}

/// A provider whose values also depend on the (reduced) beliefs it is handed,
/// so belief changes can move argmax sets. Used to exercise consistency for
/// providers that read beliefs.
#[derive(Clone, Debug)]
pub struct CoupledQ<'a> {
    pub base: TabularQ<'a>,
    pub weight: f64,
}

impl TypedQProvider for CoupledQ<'_> {
    type State = TabState;
    type Action = usize;

    fn actions(&self, x: &TabState) -> Vec<usize> {
        self.base.actions(x)
    }

    fn q(&self, c: Capability, x: &TabState, bank: &BeliefBank, a: &usize) -> f64 {
        let mass: f64 = bank.beliefs().iter().flat_map(|b| b.values()).sum();
        let bonus = if *a == x.s % self.base.game.n_actions {
            mass
        } else {
            0.0
        };
        self.base.q(c, x, bank, a) + self.weight * bonus
    }
}

/// Per-player posteriors over capabilities from an exhaustive Bayes sum over
/// joint assignments with a uniform prior and uniform-over-argmax action
/// likelihoods. Argmax sets come from [`recursive_q`], independently of the
/// value-iteration tables.
///
/// Because the typed values here do not read beliefs, player `j`'s actions are
/// the only evidence about `c_j`; other players' steps are left out so a
/// history that is impossible for some other player does not erase `j`'s
/// posterior. A history impossible for every type of `j` yields zeros.
pub fn brute_force_posterior(game: &TabularGame, history: &[(TabState, usize, usize)]) -> Result<Vec<Vec<f64>>> {
    brute_force_posterior_with(game, history, |c, x, a| action_likelihood(game, c, x, a))
}

/// [`brute_force_posterior`] with a caller-supplied action likelihood
/// `(c, state, action) -> P(action | type c)`.
pub fn brute_force_posterior_with<L>(
    game: &TabularGame,
    history: &[(TabState, usize, usize)],
    likelihood: L,
) -> Result<Vec<Vec<f64>>>
where
    L: Fn(Capability, &TabState, usize) -> f64,
{
    let labels = game.set.labels();
    let k = labels.len();
    let n = game.n_players;
    let total = k.pow(n as u32);
    let mut marginals = vec![vec![0.0; k]; n];
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        for j in 0..n {
            let mut w = 1.0;
            for &(x, actor, a) in history {
                if actor >= n {
                    return Err(Error::PlayerOutOfRange {
                        index: actor,
                        players: n,
                    });
                }
                if actor != j {
                    continue;
                }
                w *= likelihood(labels[digits[actor]], &x, a);
                if w == 0.0 {
                    break;
                }
            }
            marginals[j][digits[j]] += w;
        }
        for pos in (0..n).rev() {
            digits[pos] += 1;
            if digits[pos] < k {
                break;
            }
            digits[pos] = 0;
        }
    }
    for m in marginals.iter_mut() {
        let z: f64 = m.iter().sum();
        if z > 0.0 {
            m.iter_mut().for_each(|v| *v /= z);
        }
    }
    Ok(marginals)
}

/// `1{a ∈ A*(c)} / |A*(c)|` with the argmax set from [`recursive_q`].
pub fn action_likelihood(game: &TabularGame, c: Capability, x: &TabState, a: usize) -> f64 {
    let q: Vec<f64> = (0..game.n_actions).map(|b| recursive_q(game, c, x, b)).collect();
    let best = argmax_set(&q, TIE_TOLERANCE);
    if best.contains(&a) {
        1.0 / best.len() as f64
    } else {
        0.0
    }
}

/// Restricts a posterior to `p(c)` and renormalizes; `None` without mass.
pub fn condition_on_at_most(set: &CapabilitySet, posterior: &[f64], c: Capability) -> Result<Option<Vec<f64>>> {
    let head = &posterior[..set.predecessors(c)?.len()];
    let z: f64 = head.iter().sum();
    Ok((z > 0.0).then(|| head.iter().map(|v| v / z).collect()))
}

/// `V^C(x)`: expected total reward when each player `m` plays the uniform
/// argmax policy of type `C[m]` for the rest of the episode.
#[derive(Clone, Debug)]
pub struct AssignmentValues<'a> {
    pub q: TabularQ<'a>,
    /// Indexed by assignment (mixed radix over label indices), then time, then state.
    values: Vec<Vec<f64>>,
}

impl<'a> AssignmentValues<'a> {
    pub fn new(game: &'a TabularGame) -> Result<Self> {
        let q = TabularQ::new(game)?;
        let k = game.set.len();
        let n = game.n_players;
        let (ns, h) = (game.n_states, game.horizon);
        let mut values = Vec::with_capacity(k.pow(n as u32));
        for code in 0..k.pow(n as u32) {
            let types: Vec<Capability> = (0..n)
                .map(|m| game.set.label(code / k.pow((n - 1 - m) as u32) % k))
                .collect();
            let mut v = vec![0.0; (h + 1) * ns];
            for t in (0..h).rev() {
                for s in 0..ns {
                    let x = TabState { s, t };
                    let best = q.optimal_actions(types[game.actor(t)], &x)?;
                    let mut acc = 0.0;
                    for &a in &best {
                        let future: f64 = game.transitions[s][a]
                            .iter()
                            .map(|&(n2, p)| p * v[(t + 1) * ns + n2])
                            .sum();
                        acc += game.rewards[s][a] + game.gamma * future;
                    }
                    v[t * ns + s] = acc / best.len() as f64;
                }
            }
            values.push(v);
        }
        Ok(Self { q, values })
    }

    fn code(&self, assignment: &[Capability]) -> Option<usize> {
        let set = &self.q.game.set;
        let mut code = 0;
        for &c in assignment {
            code = code * set.len() + set.index_of(c).ok()?;
        }
        Some(code)
    }

    /// `V^C(x)`; `None` for assignments of the wrong length or unknown types.
    pub fn exact(&self, assignment: &[Capability], x: &TabState) -> Option<f64> {
        if assignment.len() != self.q.game.n_players || x.t > self.q.game.horizon {
            return None;
        }
        let code = self.code(assignment)?;
        Some(self.values[code][x.t * self.q.game.n_states + x.s])
    }

    pub fn game(&self) -> &TabularGame {
        self.q.game
    }
}

/// Outcomes of one action, shared by the value providers.
pub(crate) fn tab_outcomes(game: &TabularGame, x: &TabState, a: usize) -> Vec<Outcome<TabState>> {
    game.transitions[x.s][a]
        .iter()
        .map(|&(n, p)| Outcome {
            prob: p,
            reward: game.rewards[x.s][a],
            next: TabState { s: n, t: x.t + 1 },
        })
        .collect()
}

impl AssignmentValueProvider for AssignmentValues<'_> {
    type State = TabState;
    type Action = usize;

    fn actions(&self, _: &TabState) -> Vec<usize> {
        (0..self.q.game.n_actions).collect()
    }

    fn outcomes(&self, x: &TabState, a: &usize) -> Vec<Outcome<TabState>> {
        tab_outcomes(self.q.game, x, *a)
    }

    fn value(&self, assignment: &[Capability], x: &TabState) -> Option<f64> {
        self.exact(assignment, x)
    }

    fn gamma(&self) -> f64 {
        self.q.game.gamma
    }
}
