//! Agent strategies built from search and inference.
//!
//! | strategy | acts with | updates beliefs |
//! |----------|-----------|-----------------|
//! | `OBL`    | oblivious search, teammates cooperative | no |
//! | `MIN`    | oblivious search, teammates minimizing  | no |
//! | `CA_MA`  | capability-aware search | yes, teammate modeled capability-aware |
//! | `SA`     | capability-aware search | yes, teammate modeled oblivious |
//! | `NU`     | capability-aware search | no (beliefs stay uniform) |
//! | `ORA`    | capability-aware search | no (beliefs fixed at the truth) |

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::capability::{intervene, BeliefBank, BeliefMode, Capability, CapabilitySet};
use crate::env::TurnGame;
use crate::search::{ca_mcts, oblivious_search, pick_action, typed_action_values, SearchParams, TeammateModel};
use crate::tempered::{loss_from_values, per_player_likelihood, tempered_update, TemperConfig};
use crate::{seeded_rng, Error, Result, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "OBL")]
    Oblivious,
    #[serde(rename = "CA_MA")]
    CapabilityAware,
    #[serde(rename = "SA")]
    SingleAgent,
    #[serde(rename = "ORA")]
    Oracle,
    #[serde(rename = "NU")]
    NoUpdate,
    #[serde(rename = "MIN")]
    Minimizer,
}

impl Strategy {
    pub fn label(self) -> &'static str {
        match self {
            Strategy::Oblivious => "OBL",
            Strategy::CapabilityAware => "CA_MA",
            Strategy::SingleAgent => "SA",
            Strategy::Oracle => "ORA",
            Strategy::NoUpdate => "NU",
            Strategy::Minimizer => "MIN",
        }
    }

    /// Whether the strategy plans with capability-aware search.
    pub fn is_aware(self) -> bool {
        matches!(
            self,
            Strategy::CapabilityAware | Strategy::SingleAgent | Strategy::Oracle | Strategy::NoUpdate
        )
    }

    pub fn infers(self) -> bool {
        matches!(self, Strategy::CapabilityAware | Strategy::SingleAgent)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prior {
    Uniform,
    Truth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub strategy: Strategy,
    pub depth: Capability,
    #[serde(default)]
    pub search: Option<SearchParams>,
    #[serde(default)]
    pub temper: TemperConfig,
    /// Inference search budget relative to the acting budget.
    #[serde(default = "one")]
    pub inference_budget: f64,
    #[serde(default)]
    pub prior: Option<Prior>,
}

fn one() -> f64 {
    1.0
}

impl AgentSpec {
    pub fn new(strategy: Strategy, depth: Capability) -> Self {
        Self {
            strategy,
            depth,
            search: None,
            temper: TemperConfig::default(),
            inference_budget: 1.0,
            prior: None,
        }
    }

    pub fn prior(&self) -> Prior {
        self.prior.unwrap_or(if self.strategy == Strategy::Oracle {
            Prior::Truth
        } else {
            Prior::Uniform
        })
    }

    pub fn search_params(&self) -> SearchParams {
        SearchParams {
            depth: self.depth,
            ..self.search.unwrap_or_default()
        }
    }

    pub fn validate(&self, set: &CapabilitySet) -> Result<()> {
        set.index_of(self.depth)?;
        self.search_params().validate()?;
        self.temper.validate()?;
        if !(self.inference_budget > 0.0) || !self.inference_budget.is_finite() {
            return Err(Error::InvalidParameter("inference_budget must be positive".into()));
        }
        if self.strategy == Strategy::Oracle && self.prior() != Prior::Truth {
            return Err(Error::InvalidParameter("ORA needs the truth prior".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Agent {
    spec: AgentSpec,
    player: usize,
    bank: BeliefBank,
    rng: Rng,
    observations: usize,
}

impl Agent {
    /// `truth` is the full capability assignment; it is read only by agents
    /// with the truth prior.
    pub fn new(
        spec: AgentSpec,
        player: usize,
        set: CapabilitySet,
        n_players: usize,
        truth: Option<&[Capability]>,
        seed: u64,
    ) -> Result<Self> {
        spec.validate(&set)?;
        if player >= n_players {
            return Err(Error::PlayerOutOfRange {
                index: player,
                players: n_players,
            });
        }
        let own = spec.depth;
        let mut bank = BeliefBank::new(set.clone(), own, n_players, BeliefMode::Tempered)?;
        if spec.prior() == Prior::Truth {
            let truth =
                truth.ok_or_else(|| Error::InvalidParameter("truth prior without a truth assignment".into()))?;
            if truth.len() != n_players {
                return Err(Error::InvalidParameter("truth assignment has the wrong length".into()));
            }
            for (j, &c) in truth.iter().enumerate() {
                if j != player {
                    // a weaker agent can only hold its best effort
                    let capped = set.floor(c.min(own)).ok_or(Error::UnknownCapability(c))?;
                    bank = intervene(&bank, j, capped)?;
                }
            }
        }
        Ok(Self {
            spec,
            player,
            bank,
            rng: seeded_rng(seed),
            observations: 0,
        })
    }

    pub fn spec(&self) -> &AgentSpec {
        &self.spec
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn bank(&self) -> &BeliefBank {
        &self.bank
    }

    pub fn observations(&self) -> usize {
        self.observations
    }

    /// Current likelihood over `p(own)` for player `j`.
    pub fn posterior(&self, j: usize) -> Result<Vec<f64>> {
        per_player_likelihood(
            self.bank.set(),
            self.bank.belief(j)?,
            self.spec.depth,
            self.spec.temper.fixed_t,
        )
    }

    pub fn act<G: TurnGame>(&mut self, game: &G, state: &G::State) -> Result<G::Action> {
        if game.current_actor(state) != self.player {
            return Err(Error::NotActorsTurn(self.player));
        }
        let params = self.spec.search_params();
        let tree = match self.spec.strategy {
            Strategy::Oblivious => oblivious_search(
                game,
                state,
                self.player,
                &params,
                TeammateModel::Cooperative,
                &mut self.rng,
            )?,
            Strategy::Minimizer => oblivious_search(
                game,
                state,
                self.player,
                &params,
                TeammateModel::Minimizer,
                &mut self.rng,
            )?,
            _ => {
                let view = intervene(&self.bank, self.player, self.spec.depth)?;
                ca_mcts(
                    game,
                    state,
                    self.player,
                    &params,
                    &view,
                    self.spec.temper.fixed_t,
                    &mut self.rng,
                )?
            }
        };
        pick_action(&tree, self.spec.depth, &mut self.rng)
    }

    /// Updates beliefs after `actor` played `action` in `state` (the state
    /// before the action). Only teammates' actions are informative.
    pub fn observe<G: TurnGame>(&mut self, game: &G, actor: usize, action: &G::Action, state: &G::State) -> Result<()> {
        if !self.spec.strategy.infers() || actor == self.player || game.team_of(actor) != game.team_of(self.player) {
            return Ok(());
        }
        let losses = self.losses(game, actor, action, state)?;
        self.bank = tempered_update(&self.bank, actor, &losses)?;
        self.observations += 1;
        Ok(())
    }

    /// Per-capability losses of an observed action, over `p(own)`.
    pub fn losses<G: TurnGame>(
        &mut self,
        game: &G,
        actor: usize,
        action: &G::Action,
        state: &G::State,
    ) -> Result<Vec<f64>> {
        let base = self.spec.search_params();
        let n = ((base.n as f64 * self.spec.inference_budget).round() as usize).max(1);
        let params = SearchParams { n, ..base };
        let tree = match self.spec.strategy {
            Strategy::SingleAgent => {
                oblivious_search(game, state, actor, &params, TeammateModel::Cooperative, &mut self.rng)?
            }
            _ => ca_mcts(
                game,
                state,
                actor,
                &params,
                &self.bank,
                self.spec.temper.fixed_t,
                &mut self.rng,
            )?,
        };
        let preds: Vec<Capability> = self.bank.set().predecessors(self.spec.depth)?.to_vec();
        preds
            .into_iter()
            .map(|c| {
                let values = typed_action_values(&tree, c)?;
                let idx = values
                    .iter()
                    .position(|(a, _)| a == action)
                    .ok_or(Error::IllegalAction)?;
                let shares: Vec<f64> = values.into_iter().map(|(_, v)| v).collect();
                loss_from_values(&shares, idx, self.spec.temper.loss_clip)
            })
            .collect()
    }
}

/// Rejects strategy mixes the planner cannot schedule: capability-aware
/// agents support at most one teammate.
pub fn check_team_sizes<G: TurnGame>(game: &G, specs: &[AgentSpec]) -> Result<()> {
    if specs.len() != game.n_players() {
        return Err(Error::InvalidParameter("one agent spec per player".into()));
    }
    for (p, spec) in specs.iter().enumerate() {
        if spec.strategy.is_aware() && game.teammates_of(p).len() > 1 {
            return Err(Error::InvalidParameter(
                "capability-aware strategies support a single teammate".into(),
            ));
        }
    }
    Ok(())
}

/// What happened in one game.
#[derive(Clone, Debug, PartialEq)]
pub struct GameRecord<S, A> {
    /// (actor, action) per timestep.
    pub actions: Vec<(usize, A)>,
    pub team_rewards: [f64; 2],
    pub final_state: S,
}

/// Plays `agents` (one per player, indexed by player) from `start` to the end
/// of the game. Every agent sees every action before it is applied.
pub fn play<G: TurnGame>(game: &G, start: &G::State, agents: &mut [Agent]) -> Result<GameRecord<G::State, G::Action>> {
    if agents.len() != game.n_players() {
        return Err(Error::InvalidParameter("one agent per player".into()));
    }
    let mut state = start.clone();
    let mut record = GameRecord {
        actions: Vec::new(),
        team_rewards: [0.0; 2],
        final_state: start.clone(),
    };
    while !game.is_terminal(&state) {
        let actor = game.current_actor(&state);
        let action = agents[actor].act(game, &state)?;
        for agent in agents.iter_mut() {
            agent.observe(game, actor, &action, &state)?;
        }
        let tr = game.step(&state, &action);
        record.team_rewards[0] += tr.rewards[0];
        record.team_rewards[1] += tr.rewards[1];
        record.actions.push((actor, action));
        state = tr.state;
    }
    record.final_state = state;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::GridGame;
    use alloc::vec;

    fn set() -> CapabilitySet {
        CapabilitySet::new(vec![2, 4]).unwrap()
    }

    fn quick(strategy: Strategy, depth: u32) -> AgentSpec {
        AgentSpec {
            search: Some(SearchParams {
                n: 20,
                ..SearchParams::default()
            }),
            ..AgentSpec::new(strategy, depth)
        }
    }

    #[test]
    fn spec_json_keys() {
        let spec: AgentSpec = serde_json::from_str(r#"{"strategy":"CA_MA","depth":4,"inference_budget":0.5}"#).unwrap();
        assert_eq!(spec.strategy, Strategy::CapabilityAware);
        assert_eq!(spec.prior(), Prior::Uniform);
        let ora: AgentSpec = serde_json::from_str(r#"{"strategy":"ORA","depth":4,"prior":"truth"}"#).unwrap();
        assert_eq!(ora.prior(), Prior::Truth);
        let bad: AgentSpec = serde_json::from_str(r#"{"strategy":"ORA","depth":4,"prior":"uniform"}"#).unwrap();
        assert!(bad.validate(&set()).is_err());
    }

    #[test]
    fn wrong_turn_is_an_error() {
        let g = GridGame::wall_of_fire();
        let mut a = Agent::new(quick(Strategy::Oblivious, 2), 1, set(), 2, None, 0).unwrap();
        assert_eq!(a.act(&g, &g.initial_state()), Err(Error::NotActorsTurn(1)));
    }

    #[test]
    fn non_inferring_observe_is_identity() {
        let g = GridGame::wall_of_fire();
        let s = g.initial_state();
        for strategy in [Strategy::Oblivious, Strategy::NoUpdate, Strategy::Minimizer] {
            let mut a = Agent::new(quick(strategy, 4), 1, set(), 2, None, 0).unwrap();
            let before = a.bank().clone();
            a.observe(&g, 0, &crate::env::Move::Up, &s).unwrap();
            assert_eq!(a.bank(), &before);
        }
        let truth = [2, 4];
        let mut ora = Agent::new(quick(Strategy::Oracle, 4), 1, set(), 2, Some(&truth), 0).unwrap();
        let before = ora.bank().clone();
        ora.observe(&g, 0, &crate::env::Move::Up, &s).unwrap();
        assert_eq!(ora.bank(), &before);
        assert_eq!(ora.posterior(0).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn aware_observe_touches_only_the_actor_within_own_capability() {
        let g = GridGame::wall_of_fire();
        let s = g.initial_state();
        let set = CapabilitySet::new(vec![2, 4, 6]).unwrap();
        let mut a = Agent::new(quick(Strategy::CapabilityAware, 4), 1, set, 2, None, 3).unwrap();
        a.observe(&g, 0, &crate::env::Move::Right, &s).unwrap();
        let b = a.bank().belief(0).unwrap().values();
        assert_eq!(b[2], 0.0);
        assert!(b[..2].iter().all(|&v| (0.0..=0.5).contains(&v)));
        assert_eq!(a.bank().belief(1).unwrap().values(), &[0.0, 0.0, 0.0]);
        // own actions carry no information
        let before = a.bank().clone();
        a.observe(&g, 1, &crate::env::Move::Right, &s).unwrap();
        assert_eq!(a.bank(), &before);
    }

    #[test]
    fn oracle_matches_aware_agent_with_delta_bank() {
        let g = GridGame::wall_of_fire();
        let s = g.initial_state();
        let truth = [4, 2];
        for seed in 0..3 {
            let mut ora = Agent::new(quick(Strategy::Oracle, 4), 0, set(), 2, Some(&truth), seed).unwrap();
            let mut ca = Agent::new(quick(Strategy::CapabilityAware, 4), 0, set(), 2, None, seed).unwrap();
            ca.bank = intervene(&ca.bank, 1, 2).unwrap();
            assert_eq!(ora.act(&g, &s).unwrap(), ca.act(&g, &s).unwrap());
        }
    }
}
