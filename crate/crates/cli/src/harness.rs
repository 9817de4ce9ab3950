use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use captype_core::agents::{play, Agent, AgentSpec};
use captype_core::env::checkers::GameResult;
use captype_core::env::TurnGame;
use captype_core::{Capability, CapabilitySet};
use serde::{Deserialize, Serialize};

use crate::config::{team_tag, Cell, ConfigError, Env, ExperimentConfig, Member};
use crate::metrics::deviation;

/// One finished match, as written to the per-match CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchRow {
    pub env: String,
    #[serde(rename = "teamA")]
    pub team_a: String,
    #[serde(rename = "teamB")]
    pub team_b: String,
    pub seed: u64,
    #[serde(rename = "rewardA")]
    pub reward_a: f64,
    #[serde(rename = "rewardB")]
    pub reward_b: f64,
    pub winner: Winner,
    pub moves: usize,
    pub dev_expert: Option<f64>,
    pub dev_novice: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winner {
    A,
    B,
    Draw,
}

/// A planned match: which cell, which color/order permutation, which seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatchPlan {
    pub index: usize,
    pub cell: usize,
    pub perm: usize,
    pub seed: u64,
}

/// Match `k` uses seed `base + k`; cells run in order, `games_per_cell` each.
pub fn plan(cfg: &ExperimentConfig, env: &Env) -> Vec<MatchPlan> {
    let perms = match env {
        Env::Checkers(g) if cfg.permute => 2 * g.team_size * g.team_size,
        _ => 1,
    };
    let mut out = Vec::with_capacity(cfg.cells.len() * cfg.games_per_cell);
    for cell in 0..cfg.cells.len() {
        for g in 0..cfg.games_per_cell {
            let index = out.len();
            out.push(MatchPlan {
                index,
                cell,
                perm: g % perms,
                seed: cfg.seed.wrapping_add(index as u64),
            });
        }
    }
    out
}

fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Player index of every team-A and team-B member, plus team A's team id.
fn seating(env: &Env, cell: &Cell, perm: usize) -> (Vec<usize>, Vec<usize>, usize) {
    match env {
        Env::Grid(_) => ((0..cell.team_a.len()).collect(), Vec::new(), 0),
        Env::Checkers(g) => {
            let ts = g.team_size;
            let color_a = perm % 2;
            let rot_a = (perm / 2) % ts;
            let rot_b = (perm / (2 * ts)) % ts;
            let a = (0..ts).map(|i| g.player(color_a, (i + rot_a) % ts)).collect();
            let b = (0..ts).map(|i| g.player(1 - color_a, (i + rot_b) % ts)).collect();
            (a, b, color_a)
        }
    }
}

/// Expert and novice positions within a two-member team: the deeper member
/// is the expert; on a tie the first listed one.
pub fn expert_novice(team: &[Member]) -> Option<(usize, usize)> {
    if team.len() != 2 {
        return None;
    }
    Some(if team[1].depth > team[0].depth { (1, 0) } else { (0, 1) })
}

fn final_deviation(agent: &Agent, about: usize, truth: Capability, set: &CapabilitySet) -> Result<Option<f64>, String> {
    if !agent.spec().strategy.is_aware() {
        return Ok(None);
    }
    let own = agent.spec().depth;
    let labels = set.predecessors(own).map_err(|e| e.to_string())?;
    // The best a shallower agent can hold is its own depth.
    let target = set.floor(truth.min(own)).ok_or("capability outside the set")?;
    let posterior = agent.posterior(about).map_err(|e| e.to_string())?;
    deviation(&posterior, labels, target)
        .map(Some)
        .map_err(|e| e.to_string())
}

fn run_game<G: TurnGame>(
    game: &G,
    cfg: &ExperimentConfig,
    set: &CapabilitySet,
    members: &[(usize, &Member)],
    seed: u64,
) -> Result<(captype_core::agents::GameRecord<G::State, G::Action>, Vec<Agent>), String> {
    let n = game.n_players();
    let mut by_player: Vec<Option<AgentSpec>> = vec![None; n];
    let mut truth = vec![0; n];
    for &(p, m) in members {
        by_player[p] = Some(cfg.agent_spec(m));
        truth[p] = m.depth;
    }
    let mut agents = by_player
        .into_iter()
        .enumerate()
        .map(|(p, spec)| {
            let spec = spec.ok_or_else(|| format!("player {p} has no agent"))?;
            Agent::new(spec, p, set.clone(), n, Some(&truth), mix(seed, p as u64 + 1)).map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let record = play(game, &game.initial_state(), &mut agents).map_err(|e| e.to_string())?;
    Ok((record, agents))
}

/// Plays one planned match.
pub fn run_match(cfg: &ExperimentConfig, env: &Env, set: &CapabilitySet, m: &MatchPlan) -> Result<MatchRow, String> {
    let cell = &cfg.cells[m.cell];
    let (seats_a, seats_b, team_a) = seating(env, cell, m.perm);
    let members: Vec<(usize, &Member)> = seats_a
        .iter()
        .copied()
        .zip(&cell.team_a)
        .chain(seats_b.iter().copied().zip(&cell.team_b))
        .collect();
    let (rewards, winner_team, moves, agents) = match env {
        Env::Grid(g) => {
            let (rec, agents) = run_game(g, cfg, set, &members, m.seed)?;
            (rec.team_rewards, None, rec.actions.len(), agents)
        }
        Env::Checkers(g) => {
            let (rec, agents) = run_game(g, cfg, set, &members, m.seed)?;
            let result = g
                .result(&rec.final_state)
                .ok_or("checkers game ended without a result")?;
            (rec.team_rewards, Some(result), rec.actions.len(), agents)
        }
    };
    let reward_a = rewards[team_a];
    let reward_b = if cell.team_b.is_empty() {
        0.0
    } else {
        rewards[1 - team_a]
    };
    let winner = match winner_team {
        Some(GameResult::Win(t)) if t == team_a => Winner::A,
        Some(GameResult::Win(_)) => Winner::B,
        Some(GameResult::Draw) => Winner::Draw,
        None => match reward_a.total_cmp(&reward_b) {
            std::cmp::Ordering::Greater => Winner::A,
            std::cmp::Ordering::Less => Winner::B,
            std::cmp::Ordering::Equal => Winner::Draw,
        },
    };
    let (mut dev_expert, mut dev_novice) = (None, None);
    if let Some((e, nv)) = expert_novice(&cell.team_a) {
        let (pe, pn) = (seats_a[e], seats_a[nv]);
        let (de, dn) = (cell.team_a[e].depth, cell.team_a[nv].depth);
        dev_expert = final_deviation(&agents[pe], pn, dn, set)?;
        dev_novice = final_deviation(&agents[pn], pe, de, set)?;
    }
    Ok(MatchRow {
        env: cfg.env.clone(),
        team_a: team_tag(&cell.team_a),
        team_b: team_tag(&cell.team_b),
        seed: m.seed,
        reward_a,
        reward_b,
        winner,
        moves,
        dev_expert,
        dev_novice,
    })
}

/// Runs every match of the experiment on `workers` threads. Rows come back in
/// match order whatever the completion order.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<MatchRow>, HarnessError> {
    let env = cfg.validate()?;
    let set = cfg.set()?;
    let plans = plan(cfg, &env);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<MatchRow, String>>>> = Mutex::new(vec![None; plans.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1).min(plans.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(m) = plans.get(i) else { break };
                let row = run_match(cfg, &env, &set, m);
                slots.lock().expect("no worker panicked")[i] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .enumerate()
        .map(|(i, r)| match r {
            Some(Ok(row)) => Ok(row),
            Some(Err(e)) => Err(HarnessError::Match { index: i, message: e }),
            None => Err(HarnessError::Match {
                index: i,
                message: "match never ran".into(),
            }),
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("match {index} failed: {message}")]
    Match { index: usize, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub fn write_csv<W: std::io::Write>(rows: &[MatchRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<MatchRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_round_trip() {
        let rows = vec![
            MatchRow {
                env: "checkers".into(),
                team_a: "CA_MA:4+OBL:2".into(),
                team_b: "OBL:4+OBL:2".into(),
                seed: 7,
                reward_a: 3.0,
                reward_b: 0.1 + 0.2,
                winner: Winner::A,
                moves: 61,
                dev_expert: Some(2f64.sqrt()),
                dev_novice: None,
            },
            MatchRow {
                winner: Winner::Draw,
                dev_expert: None,
                ..Default::default()
            },
        ];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "env,teamA,teamB,seed,rewardA,rewardB,winner,moves,dev_expert,dev_novice"
        );
        assert_eq!(read_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn permutations_cover_colors_and_orders() {
        let cfg = crate::presets::preset("checkers-smoke").unwrap();
        let env = cfg.build_env().unwrap();
        let cell = &cfg.cells[0];
        let mut seen = std::collections::BTreeSet::new();
        for perm in 0..8 {
            let (a, b, color) = seating(&env, cell, perm);
            let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
            all.sort();
            assert_eq!(all, vec![0, 1, 2, 3]);
            assert!(a.iter().all(|p| p % 2 == color));
            seen.insert((a, b));
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn seeds_are_base_plus_index() {
        let mut cfg = crate::presets::preset("wall-of-fire").unwrap();
        cfg.seed = 100;
        let env = cfg.build_env().unwrap();
        let plans = plan(&cfg, &env);
        assert_eq!(plans.len(), cfg.cells.len() * cfg.games_per_cell);
        for (k, p) in plans.iter().enumerate() {
            assert_eq!(p.seed, 100 + k as u64);
        }
    }

    impl Default for MatchRow {
        fn default() -> Self {
            Self {
                env: "wall-of-fire".into(),
                team_a: "OBL:2+OBL:2".into(),
                team_b: "-".into(),
                seed: 0,
                reward_a: 0.0,
                reward_b: 0.0,
                winner: Winner::Draw,
                moves: 0,
                dev_expert: None,
                dev_novice: None,
            }
        }
    }
}
