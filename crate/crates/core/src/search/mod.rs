//! Monte-Carlo tree search: plain UCT, depth-bounded UCT, progressive
//! (oblivious) deepening and capability-aware search with per-level node
//! statistics and simulated teammates.
//!
//! Every value is the searcher team's reward minus the other team's,
//! discounted per timestep. A search pass at level `i` writes only level-`i`
//! statistics; a node's level-`i` entry starts as a copy of its latest
//! earlier level the first time the pass touches it.

use alloc::vec::Vec;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::capability::{BeliefBank, BeliefMode, Capability};
use crate::env::TurnGame;
use crate::exact::draw_from_ties;
use crate::tempered::per_player_likelihood;
use crate::{seeded_rng, Error, Result};

mod tree;

pub use tree::{LevelStats, Node, SearchCounters, SearchTree};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchParams {
    /// Iterations per level (the level-`i` pass runs `n * i`).
    pub n: usize,
    /// Depth capability.
    #[serde(rename = "d")]
    pub depth: u32,
    /// Rollouts per simulation.
    pub m: usize,
    pub gamma: f64,
    pub uct_c: f64,
    /// A simulated teammate of depth `d'` gets `spawn_factor * d'` iterations.
    pub spawn_factor: usize,
    /// Rescale means into [0, 1] by the tree's observed return range before
    /// adding the exploration bonus, so `uct_c` does not depend on the
    /// reward scale.
    pub normalize: bool,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            n: 200,
            depth: 4,
            m: 5,
            gamma: 0.9,
            uct_c: core::f64::consts::SQRT_2,
            spawn_factor: 10,
            normalize: true,
        }
    }
}

impl SearchParams {
    pub fn with_depth(depth: u32) -> Self {
        Self {
            depth,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.depth == 0 {
            return Err(Error::InvalidParameter("n, m and d must be at least 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidParameter("gamma must lie in (0, 1)".into()));
        }
        if !(self.uct_c >= 0.0) || !self.uct_c.is_finite() {
            return Err(Error::InvalidParameter("uct_c must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// How an oblivious searcher treats its teammates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TeammateModel {
    /// Teammates maximize the team value, like the searcher.
    Cooperative,
    /// Teammates minimize it, like opponents.
    Minimizer,
}

#[derive(Clone, Copy)]
enum Planner<'a> {
    Oblivious(TeammateModel),
    Aware { bank: &'a BeliefBank, temperature: f64 },
}

enum Choice {
    Max,
    Min,
    Model(u32),
}

struct Engine<'a, G: TurnGame> {
    game: &'a G,
    params: &'a SearchParams,
    planner: Planner<'a>,
    scratch: Vec<G::Action>,
    rollout_scratch: Vec<G::Action>,
    teammates: Vec<usize>,
    sampled: Vec<Option<u32>>,
}

impl<'a, G: TurnGame> Engine<'a, G> {
    fn new(game: &'a G, params: &'a SearchParams, planner: Planner<'a>, searcher: usize) -> Self {
        Self {
            game,
            params,
            planner,
            scratch: Vec::new(),
            rollout_scratch: Vec::new(),
            teammates: game.teammates_of(searcher),
            sampled: alloc::vec![None; game.n_players()],
        }
    }

    /// Runs `iterations` iterations writing level `level`. `bound` limits the
    /// tree depth; rollouts then run to `bound` total steps from the root,
    /// otherwise `params.depth` steps from the leaf.
    fn pass<R: RngCore>(
        &mut self,
        tree: &mut SearchTree<G::State, G::Action>,
        iterations: usize,
        level: u32,
        bound: Option<u32>,
        rng: &mut R,
    ) -> Result<()> {
        if tree.root().terminal {
            return Err(Error::TerminalRoot);
        }
        for _ in 0..iterations {
            self.iterate(tree, level, bound, rng)?;
        }
        tree.counters.add_iterations(level, iterations as u64);
        if !tree.levels.contains(&level) {
            tree.levels.push(level);
        }
        Ok(())
    }

    fn sample_depths<R: RngCore>(&mut self, level: u32, rng: &mut R) -> Result<()> {
        let Planner::Aware { bank, temperature } = self.planner else {
            return Ok(());
        };
        let set = bank.set();
        let floor = set.floor(level);
        for &m in &self.teammates {
            self.sampled[m] = Some(match floor {
                None => level,
                Some(f) => {
                    let probs = per_player_likelihood(set, bank.belief(m)?, f, temperature)?;
                    let preds = set.predecessors(f)?;
                    preds[sample_index(&probs, rng)]
                }
            });
        }
        Ok(())
    }

    fn choice(&self, tree: &SearchTree<G::State, G::Action>, actor: usize, level: u32) -> Choice {
        if actor == tree.searcher {
            return Choice::Max;
        }
        if self.game.team_of(actor) != tree.team {
            return Choice::Min;
        }
        match self.planner {
            Planner::Oblivious(TeammateModel::Cooperative) => Choice::Max,
            Planner::Oblivious(TeammateModel::Minimizer) => Choice::Min,
            Planner::Aware { .. } => match self.sampled[actor] {
                Some(d) if d < level => Choice::Model(d),
                _ => Choice::Max,
            },
        }
    }

    fn iterate<R: RngCore>(
        &mut self,
        tree: &mut SearchTree<G::State, G::Action>,
        level: u32,
        bound: Option<u32>,
        rng: &mut R,
    ) -> Result<()> {
        self.sample_depths(level, rng)?;
        let mut path = Vec::with_capacity(16);
        let mut x = 0usize;
        path.push(x);
        loop {
            let node = &tree.nodes[x];
            if node.terminal || bound.is_some_and(|b| node.depth >= b) {
                break;
            }
            if !node.expanded {
                tree.expand(self.game, x, &mut self.scratch);
            }
            if tree.nodes[x].children.is_empty() {
                break;
            }
            let c = self.select(tree, x, level, rng)?;
            path.push(c);
            x = c;
            if tree.nodes[c].stats_at(level).visits == 0 {
                break;
            }
        }

        let leaf = &tree.nodes[x];
        let steps = match bound {
            Some(b) => b.saturating_sub(leaf.depth),
            None => self.params.depth,
        };
        let g = self.simulate(&leaf.state.clone(), tree.team, steps, rng);
        tree.counters.simulations += 1;

        let mut ret = g;
        for (k, &idx) in path.iter().enumerate().rev() {
            if tree.nodes[idx].parent.is_some() {
                ret = tree.nodes[idx].edge_reward + self.params.gamma * ret;
            }
            tree.note_value(ret);
            let st = tree.nodes[idx].stats_mut(level);
            st.visits += 1;
            st.value_sum += ret;
            if k == path.len() - 1 {
                st.sims += 1;
            }
        }
        Ok(())
    }

    fn select<R: RngCore>(
        &mut self,
        tree: &mut SearchTree<G::State, G::Action>,
        x: usize,
        level: u32,
        rng: &mut R,
    ) -> Result<usize> {
        let maximize = match self.choice(tree, tree.nodes[x].actor, level) {
            Choice::Max => true,
            Choice::Min => false,
            Choice::Model(d) => return self.teammate_choice(tree, x, d, rng),
        };
        let node = &tree.nodes[x];
        let mut total = 0u64;
        for &c in &node.children {
            let v = tree.nodes[c].stats_at(level).visits;
            if v == 0 {
                return Ok(c);
            }
            total += v;
        }
        let log_n = libm::log(total as f64);
        let (lo, hi) = tree.value_range;
        let scale = |m: f64| {
            if !self.params.normalize {
                m
            } else if hi > lo {
                (m - lo) / (hi - lo)
            } else {
                0.5
            }
        };
        let mut best = node.children[0];
        let mut best_score = f64::NEG_INFINITY;
        for &c in &node.children {
            let st = tree.nodes[c].stats_at(level);
            let q = if maximize { scale(st.mean()) } else { -scale(st.mean()) };
            let score = q + self.params.uct_c * libm::sqrt(log_n / st.visits as f64);
            if score > best_score {
                best_score = score;
                best = c;
            }
        }
        Ok(best)
    }

    /// The child a simulated depth-`d` teammate picks at node `x`: the most
    /// visited action of a fresh depth-bounded search rooted there. Computed
    /// once per (node, depth); simulated teammates never spawn further.
    fn teammate_choice<R: RngCore>(
        &mut self,
        tree: &mut SearchTree<G::State, G::Action>,
        x: usize,
        d: u32,
        rng: &mut R,
    ) -> Result<usize> {
        if let Some(&(_, c)) = tree.nodes[x].models.iter().find(|(k, _)| *k == d) {
            return Ok(c);
        }
        let d = d.max(1);
        let node = &tree.nodes[x];
        let mut sub = SearchTree::new(self.game, node.state.clone(), node.actor);
        let sub_params = SearchParams {
            depth: d,
            ..*self.params
        };
        let mut sub_rng = seeded_rng(rng.next_u64());
        let mut engine = Engine::new(
            self.game,
            &sub_params,
            Planner::Oblivious(TeammateModel::Cooperative),
            node.actor,
        );
        let budget = (self.params.spawn_factor * d as usize).max(1);
        engine.pass(&mut sub, budget, d, Some(d), &mut sub_rng)?;
        tree.counters.spawned_searches += 1;
        tree.counters.spawned_simulations += sub.counters.simulations;

        let root = sub.root();
        let mut best = 0;
        let mut best_visits = 0;
        for (k, &c) in root.children.iter().enumerate() {
            let v = sub.nodes[c].stats_at(d).visits;
            if v > best_visits {
                best_visits = v;
                best = k;
            }
        }
        let child = tree.nodes[x].children[best];
        tree.nodes[x].models.push((d, child));
        Ok(child)
    }

    fn simulate<R: RngCore>(&mut self, state: &G::State, team: usize, steps: u32, rng: &mut R) -> f64 {
        let mut total = 0.0;
        for _ in 0..self.params.m {
            let mut s = state.clone();
            let mut disc = 1.0;
            let mut g = 0.0;
            for _ in 0..steps {
                self.game.legal_actions_into(&s, &mut self.rollout_scratch);
                if self.rollout_scratch.is_empty() {
                    break;
                }
                let a = &self.rollout_scratch[rng.gen_range(0..self.rollout_scratch.len())];
                let tr = self.game.step(&s, a);
                g += disc * (tr.rewards[team] - tr.rewards[1 - team]);
                disc *= self.params.gamma;
                s = tr.state;
            }
            total += g;
        }
        total / self.params.m as f64
    }
}

fn sample_index<R: RngCore>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Plain UCT: `params.n` UCT iterations on an unbounded tree; rollouts run
/// `params.depth` steps from the leaf. Statistics go to level `params.depth`.
pub fn mcts<G: TurnGame, R: RngCore>(
    game: &G,
    tree: &mut SearchTree<G::State, G::Action>,
    params: &SearchParams,
    rng: &mut R,
) -> Result<()> {
    params.validate()?;
    let mut engine = Engine::new(
        game,
        params,
        Planner::Oblivious(TeammateModel::Cooperative),
        tree.searcher,
    );
    engine.pass(tree, params.n, params.depth, None, rng)
}

/// Depth-bounded UCT: `params.n` iterations that never grow the tree below depth
/// `params.depth`, with rollouts completing `params.depth` steps in total.
pub fn bounded_mcts<G: TurnGame, R: RngCore>(
    game: &G,
    tree: &mut SearchTree<G::State, G::Action>,
    params: &SearchParams,
    rng: &mut R,
) -> Result<()> {
    bounded_with(game, tree, params, TeammateModel::Cooperative, rng)
}

fn bounded_with<G: TurnGame, R: RngCore>(
    game: &G,
    tree: &mut SearchTree<G::State, G::Action>,
    params: &SearchParams,
    teammates: TeammateModel,
    rng: &mut R,
) -> Result<()> {
    params.validate()?;
    let mut engine = Engine::new(game, params, Planner::Oblivious(teammates), tree.searcher);
    engine.pass(tree, params.n, params.depth, Some(params.depth), rng)
}

/// Progressive oblivious search: bounded passes of `n * i` iterations at depth `i = 1..=d` on one
/// tree rooted at the planning view of `root`.
pub fn oblivious_search<G: TurnGame, R: RngCore>(
    game: &G,
    root: &G::State,
    searcher: usize,
    params: &SearchParams,
    teammates: TeammateModel,
    rng: &mut R,
) -> Result<SearchTree<G::State, G::Action>> {
    params.validate()?;
    let mut tree = SearchTree::new(game, game.planning_view(root), searcher);
    for i in 1..=params.depth {
        let level = SearchParams {
            n: params.n * i as usize,
            depth: i,
            ..*params
        };
        bounded_with(game, &mut tree, &level, teammates, rng)?;
    }
    Ok(tree)
}

/// Capability-aware search: progressive search where, at every iteration of level `i`, each
/// teammate's depth is drawn from the tempered bank reduced to `i`. A
/// teammate drawn shallower than `i` plays the choice of its own fresh
/// depth-bounded search; otherwise it is searched like the searcher.
pub fn ca_mcts<G: TurnGame, R: RngCore>(
    game: &G,
    root: &G::State,
    searcher: usize,
    params: &SearchParams,
    bank: &BeliefBank,
    temperature: f64,
    rng: &mut R,
) -> Result<SearchTree<G::State, G::Action>> {
    params.validate()?;
    if bank.mode() != BeliefMode::Tempered {
        return Err(Error::WrongMode { expected: "tempered" });
    }
    if bank.n_players() != game.n_players() {
        return Err(Error::PlayerOutOfRange {
            index: game.n_players(),
            players: bank.n_players(),
        });
    }
    let mut tree = SearchTree::new(game, game.planning_view(root), searcher);
    let mut engine = Engine::new(game, params, Planner::Aware { bank, temperature }, searcher);
    for i in 1..=params.depth {
        engine.pass(&mut tree, params.n * i as usize, i, Some(i), rng)?;
    }
    Ok(tree)
}

/// Root visit shares at `level`, one entry per legal root action in order.
pub fn typed_action_values<S: Clone, A: Clone>(tree: &SearchTree<S, A>, level: Capability) -> Result<Vec<(A, f64)>> {
    if !tree.has_level(level) {
        return Err(Error::LevelNotSearched(level as usize));
    }
    let root = tree.root();
    let visits: Vec<u64> = root
        .children
        .iter()
        .map(|&c| tree.nodes[c].stats_at(level).visits)
        .collect();
    let total: u64 = visits.iter().sum();
    if total == 0 {
        return Err(Error::LevelNotSearched(level as usize));
    }
    Ok(root
        .children
        .iter()
        .zip(visits)
        .map(|(&c, v)| {
            let a = tree.nodes[c].action.clone().expect("children carry their action");
            (a, v as f64 / total as f64)
        })
        .collect())
}

/// Most visited root action at `level`, ties broken by a seeded draw.
pub fn pick_action<S: Clone, A: Clone, R: RngCore>(
    tree: &SearchTree<S, A>,
    level: Capability,
    rng: &mut R,
) -> Result<A> {
    if !tree.has_level(level) {
        return Err(Error::LevelNotSearched(level as usize));
    }
    let root = tree.root();
    let visits: Vec<u64> = root
        .children
        .iter()
        .map(|&c| tree.nodes[c].stats_at(level).visits)
        .collect();
    let best = visits.iter().copied().max().ok_or(Error::NoActions)?;
    let ties: Vec<A> = root
        .children
        .iter()
        .zip(&visits)
        .filter(|(_, &v)| v == best)
        .map(|(&c, _)| tree.nodes[c].action.clone().expect("children carry their action"))
        .collect();
    if ties.len() == 1 {
        return Ok(ties.into_iter().next().expect("one tie"));
    }
    Ok(draw_from_ties(ties, rng).action)
}
