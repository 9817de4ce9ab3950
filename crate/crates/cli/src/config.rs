use std::path::Path;

use captype_core::agents::{AgentSpec, Prior, Strategy};
use captype_core::env::{Checkers, GridConfig, GridGame, TurnGame};
use captype_core::search::SearchParams;
use captype_core::tempered::{NoiseConfig, NoiseRegime, TemperConfig};
use captype_core::{Capability, CapabilitySet};
use serde::{Deserialize, Serialize};

/// Invalid experiment configuration. Reported before any match runs.
#[derive(Debug, thiserror::Error)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// One team member. Unset fields fall back to the experiment defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub strategy: Strategy,
    pub depth: Capability,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temper: Option<TemperConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inference_budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Prior>,
}

impl Member {
    pub fn new(strategy: Strategy, depth: Capability) -> Self {
        Self {
            strategy,
            depth,
            search: None,
            temper: None,
            inference_budget: None,
            prior: None,
        }
    }

    /// `CA_MA:20`
    pub fn tag(&self) -> String {
        format!("{}:{}", self.strategy.label(), self.depth)
    }
}

/// A team composition. Team B is empty for single-team grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "teamA")]
    pub team_a: Vec<Member>,
    #[serde(rename = "teamB", default)]
    pub team_b: Vec<Member>,
}

impl Cell {
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| team_tag(&self.team_a))
    }
}

pub fn team_tag(team: &[Member]) -> String {
    if team.is_empty() {
        return "-".into();
    }
    team.iter().map(Member::tag).collect::<Vec<_>>().join("+")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    /// `wall-of-fire`, `narrow-tunnel`, `checkers`, or `grid:<path to .map>`.
    pub env: String,
    pub capabilities: Vec<Capability>,
    pub cells: Vec<Cell>,
    pub games_per_cell: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
    /// Search defaults for members without their own.
    #[serde(default)]
    pub search: SearchParams,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub temper: TemperConfig,
    /// Checkers only: rotate colors and player order across the games of a cell.
    #[serde(default)]
    pub permute: bool,
    /// Checkers only: reward per captured man, captured king and promotion.
    #[serde(default)]
    pub rewards: CheckersRewards,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckersRewards {
    pub man: i32,
    pub king: i32,
    pub crown: i32,
}

impl Default for CheckersRewards {
    fn default() -> Self {
        let g = Checkers::default();
        Self {
            man: g.man_value,
            king: g.king_value,
            crown: g.crown_value,
        }
    }
}

fn one() -> usize {
    1
}

/// A constructed environment.
#[derive(Clone, Debug)]
pub enum Env {
    Grid(GridGame),
    Checkers(Checkers),
}

impl Env {
    pub fn n_players(&self) -> usize {
        match self {
            Env::Grid(g) => g.n_players(),
            Env::Checkers(g) => g.n_players(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| bad(format!("invalid JSON: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn set(&self) -> Result<CapabilitySet, ConfigError> {
        CapabilitySet::new(self.capabilities.clone()).map_err(|e| bad(e.to_string()))
    }

    pub fn build_env(&self) -> Result<Env, ConfigError> {
        let grid = |cfg: GridConfig| GridGame::new(cfg).map(Env::Grid).map_err(|e| bad(e.to_string()));
        match self.env.as_str() {
            "wall-of-fire" => grid(GridConfig::wall_of_fire()),
            "narrow-tunnel" => grid(GridConfig::narrow_tunnel()),
            "checkers" => {
                let r = self.rewards;
                if r.man < 0 || r.king < 0 || r.crown < 0 {
                    return Err(bad("checkers rewards must be nonnegative"));
                }
                Ok(Env::Checkers(Checkers {
                    man_value: r.man,
                    king_value: r.king,
                    crown_value: r.crown,
                    ..Checkers::new(2).map_err(|e| bad(e.to_string()))?
                }))
            }
            other => match other.strip_prefix("grid:") {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{path}: {e}")))?;
                    grid(GridConfig::parse(&text).map_err(|e| bad(e.to_string()))?)
                }
                None => Err(bad(format!("unknown environment `{other}`"))),
            },
        }
    }

    /// Resolves a member against the experiment defaults.
    pub fn agent_spec(&self, m: &Member) -> AgentSpec {
        AgentSpec {
            strategy: m.strategy,
            depth: m.depth,
            search: Some(SearchParams {
                depth: m.depth,
                ..m.search.unwrap_or(self.search)
            }),
            temper: m.temper.unwrap_or(self.temper),
            inference_budget: m.inference_budget.unwrap_or(1.0),
            prior: m.prior,
        }
    }

    /// Checks everything a match could trip over.
    pub fn validate(&self) -> Result<Env, ConfigError> {
        if self.games_per_cell == 0 {
            return Err(bad("games_per_cell must be at least 1"));
        }
        if self.workers == 0 {
            return Err(bad("workers must be at least 1"));
        }
        if self.cells.is_empty() {
            return Err(bad("no cells to run"));
        }
        self.noise.validate().map_err(|e| bad(e.to_string()))?;
        if self.noise.regime != NoiseRegime::FixedPractical {
            return Err(bad(
                "search-backed agents use the fixed temperature schedule (regime \"fixed\")",
            ));
        }
        self.temper.validate().map_err(|e| bad(e.to_string()))?;
        self.search.validate().map_err(|e| bad(e.to_string()))?;
        let set = self.set()?;
        let env = self.build_env()?;
        let n = env.n_players();
        for (i, cell) in self.cells.iter().enumerate() {
            let where_ = format!("cell {i} ({})", cell.label());
            let specs = match &env {
                Env::Grid(_) => {
                    if cell.team_a.len() != n || !cell.team_b.is_empty() {
                        return Err(bad(format!(
                            "{where_}: grids take {n} members in teamA and none in teamB"
                        )));
                    }
                    cell.team_a.clone()
                }
                Env::Checkers(g) => {
                    if cell.team_a.len() != g.team_size || cell.team_b.len() != g.team_size {
                        return Err(bad(format!("{where_}: checkers teams have {} members", g.team_size)));
                    }
                    cell.team_a.iter().chain(&cell.team_b).cloned().collect()
                }
            };
            let specs: Vec<AgentSpec> = specs.iter().map(|m| self.agent_spec(m)).collect();
            for s in &specs {
                s.validate(&set)
                    .map_err(|e| bad(format!("{where_}: {}: {e}", s.strategy.label())))?;
            }
            let mismatch = match &env {
                Env::Grid(g) => captype_core::agents::check_team_sizes(g, &specs),
                Env::Checkers(g) => captype_core::agents::check_team_sizes(g, &specs),
            };
            mismatch.map_err(|e| bad(format!("{where_}: {e}")))?;
        }
        Ok(env)
    }
}
