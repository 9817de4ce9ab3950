use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::env::TurnGame;

/// Statistics of one node at one progressive level.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LevelStats {
    pub level: u32,
    pub visits: u64,
    pub value_sum: f64,
    /// Simulations started at this node.
    pub sims: u64,
}

impl LevelStats {
    pub fn mean(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.value_sum / self.visits as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct Node<S, A> {
    pub state: S,
    pub depth: u32,
    pub actor: usize,
    pub terminal: bool,
    pub parent: Option<usize>,
    /// Action on the edge from the parent.
    pub action: Option<A>,
    /// Searcher-team reward collected on the edge from the parent.
    pub edge_reward: f64,
    pub children: Vec<usize>,
    pub expanded: bool,
    /// Sorted by level; a level is absent until first touched.
    pub stats: Vec<LevelStats>,
    /// Cached teammate choices: (hypothesized depth, child index).
    pub(crate) models: Vec<(u32, usize)>,
}

impl<S, A> Node<S, A> {
    /// Stats as seen at `level`: the latest recorded level not above it.
    pub fn stats_at(&self, level: u32) -> LevelStats {
        self.stats
            .iter()
            .rev()
            .find(|s| s.level <= level)
            .map(|s| LevelStats { level, ..*s })
            .unwrap_or(LevelStats {
                level,
                ..LevelStats::default()
            })
    }

    pub(crate) fn stats_mut(&mut self, level: u32) -> &mut LevelStats {
        match self.stats.binary_search_by_key(&level, |s| s.level) {
            Ok(i) => &mut self.stats[i],
            Err(i) => {
                let seed = self.stats_at(level);
                self.stats.insert(i, seed);
                &mut self.stats[i]
            }
        }
    }
}

/// Counters audited by tests and the acceptance suite.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchCounters {
    /// (level, iterations run at that level).
    pub iterations: Vec<(u32, u64)>,
    pub simulations: u64,
    pub spawned_searches: u64,
    pub spawned_simulations: u64,
}

impl SearchCounters {
    pub fn total_iterations(&self) -> u64 {
        self.iterations.iter().map(|(_, n)| n).sum()
    }

    pub(crate) fn add_iterations(&mut self, level: u32, n: u64) {
        match self.iterations.iter_mut().find(|(l, _)| *l == level) {
            Some((_, c)) => *c += n,
            None => self.iterations.push((level, n)),
        }
    }
}

/// Arena search tree rooted at one state, searched on behalf of `searcher`.
#[derive(Clone, Debug)]
pub struct SearchTree<S, A> {
    pub nodes: Vec<Node<S, A>>,
    pub searcher: usize,
    pub team: usize,
    /// Levels whose search pass has completed, in order.
    pub levels: Vec<u32>,
    pub counters: SearchCounters,
    /// Range of every backed-up return so far.
    pub value_range: (f64, f64),
}

impl<S: Clone, A: Clone> SearchTree<S, A> {
    pub fn new<G: TurnGame<State = S, Action = A>>(game: &G, root: S, searcher: usize) -> Self {
        let node = Node {
            actor: game.current_actor(&root),
            terminal: game.is_terminal(&root),
            state: root,
            depth: 0,
            parent: None,
            action: None,
            edge_reward: 0.0,
            children: Vec::new(),
            expanded: false,
            stats: Vec::new(),
            models: Vec::new(),
        };
        Self {
            nodes: alloc::vec![node],
            searcher,
            team: game.team_of(searcher),
            levels: Vec::new(),
            counters: SearchCounters::default(),
            value_range: (f64::INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn root(&self) -> &Node<S, A> {
        &self.nodes[0]
    }

    pub fn max_depth(&self) -> u32 {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn has_level(&self, level: u32) -> bool {
        self.levels.contains(&level)
    }

    pub(crate) fn note_value(&mut self, v: f64) {
        self.value_range.0 = self.value_range.0.min(v);
        self.value_range.1 = self.value_range.1.max(v);
    }

    pub(crate) fn expand<G: TurnGame<State = S, Action = A>>(&mut self, game: &G, idx: usize, scratch: &mut Vec<A>) {
        game.legal_actions_into(&self.nodes[idx].state, scratch);
        let depth = self.nodes[idx].depth + 1;
        for a in scratch.iter() {
            let tr = game.step(&self.nodes[idx].state, a);
            let child = Node {
                actor: game.current_actor(&tr.state),
                terminal: game.is_terminal(&tr.state),
                state: tr.state,
                depth,
                parent: Some(idx),
                action: Some(a.clone()),
                edge_reward: tr.rewards[self.team] - tr.rewards[1 - self.team],
                children: Vec::new(),
                expanded: false,
                stats: Vec::new(),
                models: Vec::new(),
            };
            let id = self.nodes.len();
            self.nodes.push(child);
            self.nodes[idx].children.push(id);
        }
        self.nodes[idx].expanded = true;
    }

    /// One line per node: `key depth actor level:visits:mean ...`.
    pub fn dump<G: TurnGame<State = S, Action = A>>(&self, game: &G) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let _ = write!(out, "{:016x} {} {}", game.state_key(&n.state), n.depth, n.actor);
            for s in &n.stats {
                let _ = write!(out, " {}:{}:{}", s.level, s.visits, format!("{:.6}", s.mean()));
            }
            out.push('\n');
        }
        out
    }
}
