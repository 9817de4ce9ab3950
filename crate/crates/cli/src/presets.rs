//! Built-in experiment configurations.

use captype_core::agents::Strategy;
use captype_core::search::SearchParams;
use captype_core::Capability;

use crate::config::{Cell, ExperimentConfig, Member};

pub const NAMES: [&str; 6] = [
    "wall-of-fire",
    "narrow-tunnel",
    "checkers-smoke",
    "checkers-vs",
    "checkers-ma",
    "checkers-baseline",
];

fn m(strategy: Strategy, depth: Capability) -> Member {
    Member::new(strategy, depth)
}

fn cell(name: &str, team_a: Vec<Member>, team_b: Vec<Member>) -> Cell {
    Cell {
        name: Some(name.into()),
        team_a,
        team_b,
    }
}

fn base(name: &str, env: &str, capabilities: Vec<Capability>, cells: Vec<Cell>, games: usize) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        env: env.into(),
        capabilities,
        cells,
        games_per_cell: games,
        seed: 0,
        workers: 1,
        search: SearchParams::default(),
        noise: Default::default(),
        temper: Default::default(),
        permute: false,
        rewards: Default::default(),
    }
}

use Strategy::{
    CapabilityAware as CA, Minimizer as MIN, NoUpdate as NU, Oblivious as OBL, Oracle as ORA, SingleAgent as SA,
};

/// Every (expert, novice) pair of distinct depths, expert deeper.
fn pairs(depths: &[Capability]) -> Vec<(Capability, Capability)> {
    let mut out = Vec::new();
    for (i, &n) in depths.iter().enumerate() {
        for &e in &depths[i + 1..] {
            out.push((e, n));
        }
    }
    out
}

/// CA team against an oblivious team with the same depths.
fn versus_cells(depths: &[Capability]) -> Vec<Cell> {
    pairs(depths)
        .into_iter()
        .map(|(e, n)| {
            cell(
                &format!("CA vs OBL {e}/{n}"),
                vec![m(CA, e), m(OBL, n)],
                vec![m(OBL, e), m(OBL, n)],
            )
        })
        .collect()
}

/// A lone opponent is modeled as both movers of the other side playing the
/// same oblivious depth.
fn solo(depth: Capability) -> Vec<Member> {
    vec![m(OBL, depth), m(OBL, depth)]
}

/// Two adaptive teammates (multi-agent or single-agent inference) against a
/// lone opponent of novice or expert depth.
fn adaptive_cells(depths: &[Capability]) -> Vec<Cell> {
    let mut out = Vec::new();
    for (e, n) in pairs(depths) {
        for (opp, d) in [("novice", n), ("expert", e)] {
            for (team, s) in [("MA", CA), ("SA", SA)] {
                out.push(cell(
                    &format!("{team} {e}/{n} vs {opp}"),
                    vec![m(s, e), m(s, n)],
                    solo(d),
                ));
            }
        }
    }
    out
}

/// Expert strategies paired with an oblivious novice against a lone opponent.
fn baseline_cells(depths: &[Capability]) -> Vec<Cell> {
    let mut out = Vec::new();
    for (e, n) in pairs(depths) {
        for (opp, d) in [("novice", n), ("expert", e)] {
            for s in [CA, ORA, OBL, NU, MIN] {
                out.push(cell(
                    &format!("{} {e}/{n} vs {opp}", s.label()),
                    vec![m(s, e), m(OBL, n)],
                    solo(d),
                ));
            }
        }
    }
    out
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let checkers_depths = [2, 4, 6, 8];
    Some(match name {
        "wall-of-fire" => base(
            name,
            "wall-of-fire",
            vec![2, 20],
            vec![
                cell("E+E", vec![m(OBL, 20), m(OBL, 20)], vec![]),
                cell("N+N", vec![m(OBL, 2), m(OBL, 2)], vec![]),
                cell("CA-E+N", vec![m(CA, 20), m(OBL, 2)], vec![]),
                cell("E+N", vec![m(OBL, 20), m(OBL, 2)], vec![]),
            ],
            5,
        ),
        "narrow-tunnel" => {
            let mut cfg = base(
                name,
                "narrow-tunnel",
                vec![10, 30],
                vec![
                    cell("E+E", vec![m(OBL, 30), m(OBL, 30)], vec![]),
                    cell("N+CA-E", vec![m(OBL, 10), m(CA, 30)], vec![]),
                    cell("N+N", vec![m(OBL, 10), m(OBL, 10)], vec![]),
                    cell("N+E", vec![m(OBL, 10), m(OBL, 30)], vec![]),
                ],
                5,
            );
            // Raw returns with a wide bonus: the long red route is only found
            // when exploration is not squeezed into a unit range.
            cfg.search.normalize = false;
            cfg.search.uct_c = 5.0;
            cfg
        }
        "checkers-smoke" => {
            let depths = [2, 4];
            let mut cells = versus_cells(&depths);
            cells.extend(adaptive_cells(&depths));
            cells.extend(baseline_cells(&depths));
            let mut cfg = base(name, "checkers", depths.to_vec(), cells, 2);
            cfg.permute = true;
            cfg
        }
        "checkers-vs" => {
            let mut cfg = base(
                name,
                "checkers",
                checkers_depths.to_vec(),
                versus_cells(&checkers_depths),
                160,
            );
            cfg.permute = true;
            cfg
        }
        "checkers-ma" => {
            let mut cfg = base(
                name,
                "checkers",
                checkers_depths.to_vec(),
                adaptive_cells(&checkers_depths),
                100,
            );
            cfg.permute = true;
            cfg
        }
        "checkers-baseline" => {
            let mut cfg = base(
                name,
                "checkers",
                checkers_depths.to_vec(),
                baseline_cells(&checkers_depths),
                100,
            );
            cfg.permute = true;
            cfg
        }
        _ => return None,
    })
}
