//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exits 0 after printing every line unless `ACCEPTANCE_STRICT=1`, in which
//! case any FAIL makes the process exit 1.

#[path = "../../core/tests/support/naive_checkers.rs"]
mod naive;

use std::process::Command;
use std::time::{Duration, Instant};

use captype::harness::MatchRow;
use captype::metrics::lower_median;
use captype::{presets, run_experiment, summarize, ExperimentConfig};
use captype_core::agents::{play, Agent, AgentSpec, Prior, Strategy};
use captype_core::env::checkers::{perft, Checkers, CheckersState};
use captype_core::env::exhaustive::{grid_optimum, optimal_return_memo};
use captype_core::env::{GridConfig, GridGame, TurnGame};
use captype_core::oracle::{verify_theorem, Theorem, TheoremReport, VerifyConfig};
use captype_core::search::{ca_mcts, oblivious_search, SearchParams, TeammateModel};
use captype_core::{seeded_rng, BeliefBank, BeliefMode, CapabilitySet};
use rand::seq::SliceRandom;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!("{} [{:.1}s]", o.detail, took.as_secs_f64());
    if let Some(limit) = limit {
        if took > limit {
            o.pass = false;
            o.detail += &format!(" exceeds {}s", limit.as_secs());
        }
    }
    o
}

fn theorem(which: Theorem, trials: usize) -> Outcome {
    let report: TheoremReport = match verify_theorem(which, trials, 0, &VerifyConfig::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("error: {e}")),
    };
    let mut detail = format!(
        "{} trials={} checks={} violations={} max={:.3e} bound={:.3e} pass_fraction={:.3}",
        report.theorem,
        report.trials,
        report.checks,
        report.violations,
        report.max_deviation,
        report.bound,
        report.pass_fraction
    );
    if !report.violation_seeds.is_empty() {
        detail += &format!(" violating seeds {:?}", report.violation_seeds);
    }
    outcome(report.passed, detail)
}

/// Median team reward of each cell, in config order.
fn cell_medians(cfg: &ExperimentConfig) -> Result<Vec<f64>, String> {
    let rows = run_experiment(cfg, 1).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for cell in &cfg.cells {
        let tag = captype::config::team_tag(&cell.team_a);
        let rewards: Vec<f64> = rows.iter().filter(|r| r.team_a == tag).map(|r| r.reward_a).collect();
        out.push(lower_median(&rewards).ok_or("empty cell")?);
    }
    Ok(out)
}

fn criterion_5() -> Outcome {
    let optimum = grid_optimum(&GridGame::wall_of_fire());
    let cfg = presets::preset("wall-of-fire").unwrap();
    let m = match cell_medians(&cfg) {
        Ok(m) => m,
        Err(e) => return outcome(false, e),
    };
    let (ee, nn, ca, en) = (m[0], m[1], m[2], m[3]);
    let pass = optimum == 1490.0 && ee >= 1400.0 && nn == 0.0 && ca >= -6.0 && ca > en && en <= -10.0;
    outcome(
        pass,
        format!("optimum={optimum} E+E={ee} N+N={nn} CA-E+N={ca} E+N={en}"),
    )
}

fn criterion_6() -> Outcome {
    let red = GridGame::narrow_tunnel();
    let red_opt = optimal_return_memo(&red, &red.initial_state());
    let blue = GridGame::new(GridConfig::narrow_tunnel().with_coin_value('C', 0.0)).unwrap();
    let blue_opt = optimal_return_memo(&blue, &blue.initial_state());
    let cfg = presets::preset("narrow-tunnel").unwrap();
    let m = match cell_medians(&cfg) {
        Ok(m) => m,
        Err(e) => return outcome(false, e),
    };
    let (ee, nca, nn, ne) = (m[0], m[1], m[2], m[3]);
    let optima = red_opt == 90.0 && blue_opt == 4.0;
    let order = ee > nca && nca >= nn && nn > ne && ne <= 1.0;
    outcome(
        optima && order,
        format!("optima red={red_opt} blue={blue_opt}; E+E={ee} N+CA-E={nca} N+N={nn} N+E={ne}"),
    )
}

fn criterion_7() -> Outcome {
    let g = Checkers::default();
    let s = CheckersState::initial();
    let counts: Vec<u64> = (1..=6).map(|d| perft(&g, &s, d)).collect();
    let naive: Vec<u64> = (1..=6).map(|d| naive::naive_perft(&g, &s, d)).collect();
    let mut rng = seeded_rng(7);
    let mut violations = 0usize;
    for _ in 0..10_000 {
        let mut s = g.initial_state();
        let mut plies = 0usize;
        while !g.is_terminal(&s) {
            let before = (s.black.count_ones(), s.white.count_ones());
            let ok = naive::fast_moves(&g, &s) == naive::naive_moves(&s)
                && CheckersState::from_fen(&s.to_fen()).ok() == Some(s.clone())
                && s.black & s.white == 0
                && s.kings & !(s.black | s.white) == 0;
            let moves = g.legal_actions(&s);
            let mv = *moves.choose(&mut rng).unwrap();
            let next = g.apply(&s, &mv).0;
            let shrinks = next.black.count_ones() <= before.0 && next.white.count_ones() <= before.1;
            if !ok || !shrinks {
                violations += 1;
                break;
            }
            s = next;
            plies += 1;
            if plies > g.max_moves as usize {
                violations += 1;
                break;
            }
        }
        if g.result(&s).is_none() {
            violations += 1;
        }
    }
    outcome(
        counts == naive && counts[0] == 7 && violations == 0,
        format!("perft={counts:?} naive={naive:?} playouts=10000 violations={violations}"),
    )
}

/// Spawned teammate simulations per base simulation and search level may
/// not exceed this multiple of the spawn factor.
const SPAWN_OVERHEAD: f64 = 1.0;

fn criterion_8() -> Outcome {
    let g = Checkers::default();
    let s = g.initial_state();
    let mut parts = Vec::new();
    let mut pass = true;
    for d in [2u32, 4, 6, 8] {
        let params = SearchParams {
            n: 200,
            ..SearchParams::with_depth(d)
        };
        let tree = oblivious_search(
            &g,
            &s,
            0,
            &params,
            TeammateModel::Cooperative,
            &mut seeded_rng(d as u64),
        )
        .unwrap();
        let total = tree.counters.total_iterations();
        pass &= total == 100 * d as u64 * (d as u64 + 1);
        parts.push(format!("d={d}:{total}"));
    }
    let set = CapabilitySet::new(vec![2, 4, 6]).unwrap();
    let mut worst: f64 = 0.0;
    for d in [2u32, 4, 6] {
        let bank = BeliefBank::new(set.clone(), d, g.n_players(), BeliefMode::Tempered).unwrap();
        let params = SearchParams {
            n: 20,
            ..SearchParams::with_depth(d)
        };
        let tree = ca_mcts(&g, &s, 0, &params, &bank, 0.1, &mut seeded_rng(d as u64)).unwrap();
        let c = &tree.counters;
        let ratio = c.spawned_simulations as f64 / (d as f64 * c.simulations as f64);
        worst = worst.max(ratio / params.spawn_factor as f64);
    }
    pass &= worst <= SPAWN_OVERHEAD;
    outcome(
        pass,
        format!(
            "oblivious iterations {} ; ca_mcts spawned/(d*base*spawn_factor) max={worst:.3} limit={SPAWN_OVERHEAD}",
            parts.join(" ")
        ),
    )
}

fn legal_tallies(rows: &[MatchRow], cfg: &ExperimentConfig, max_moves: usize) -> Result<(), String> {
    let summary = summarize(rows);
    if summary.cells.len() != cfg.cells.len() {
        return Err(format!("{} cells, expected {}", summary.cells.len(), cfg.cells.len()));
    }
    for c in &summary.cells {
        if c.games != cfg.games_per_cell || c.wins + c.losses + c.draws != c.games || !(-1.0..=1.0).contains(&c.score) {
            return Err(format!("bad tally for {} vs {}", c.team_a, c.team_b));
        }
    }
    for r in rows {
        if r.moves == 0 || r.moves > max_moves {
            return Err(format!("seed {} has {} moves", r.seed, r.moves));
        }
        for d in [r.dev_expert, r.dev_novice].into_iter().flatten() {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(format!("seed {} has deviation {d}", r.seed));
            }
        }
    }
    Ok(())
}

fn ora_equivalence() -> Result<String, String> {
    let g = Checkers::default();
    let set = CapabilitySet::new(vec![2, 4]).unwrap();
    let truth = [4, 4, 2, 2];
    let quick = |strategy, depth, prior| AgentSpec {
        search: Some(SearchParams {
            n: 20,
            ..SearchParams::with_depth(depth)
        }),
        prior,
        ..AgentSpec::new(strategy, depth)
    };
    let team = |lead: Strategy, prior| -> Result<Vec<Agent>, String> {
        (0..4)
            .map(|p| {
                let spec = if p == 0 {
                    quick(lead, 4, prior)
                } else {
                    quick(Strategy::Oblivious, truth[p], None)
                };
                Agent::new(spec, p, set.clone(), 4, Some(&truth), 100 + p as u64).map_err(|e| e.to_string())
            })
            .collect()
    };
    let mut ora = team(Strategy::Oracle, None)?;
    let rec_ora = play(&g, &g.initial_state(), &mut ora).map_err(|e| e.to_string())?;
    let mut nu = team(Strategy::NoUpdate, Some(Prior::Truth))?;
    let rec_nu = play(&g, &g.initial_state(), &mut nu).map_err(|e| e.to_string())?;
    if rec_ora != rec_nu {
        return Err("ORA and the truth-prior NU agent played different games".into());
    }
    // Replay ORA's game: at every ORA decision a capability-aware agent
    // holding delta beliefs at the truth picks the same move from the same seed.
    let mut s = g.initial_state();
    let mut decisions = 0;
    let mut watcher = Agent::new(
        quick(Strategy::CapabilityAware, 4, Some(Prior::Truth)),
        0,
        set.clone(),
        4,
        Some(&truth),
        0,
    )
    .map_err(|e| e.to_string())?;
    for (step, (actor, mv)) in rec_ora.actions.iter().enumerate() {
        if *actor == 0 {
            let seed = 1000 + step as u64;
            let mut a = Agent::new(quick(Strategy::Oracle, 4, None), 0, set.clone(), 4, Some(&truth), seed).unwrap();
            let mut b = Agent::new(
                quick(Strategy::CapabilityAware, 4, Some(Prior::Truth)),
                0,
                set.clone(),
                4,
                Some(&truth),
                seed,
            )
            .unwrap();
            if a.act(&g, &s).unwrap() != b.act(&g, &s).unwrap() {
                return Err(format!("different choices at ply {step}"));
            }
            decisions += 1;
        }
        watcher.observe(&g, *actor, mv, &s).map_err(|e| e.to_string())?;
        s = g.apply(&s, mv).0;
    }
    if watcher.posterior(2).map_err(|e| e.to_string())? != vec![1.0, 0.0] {
        return Err("delta beliefs moved after observations".into());
    }
    Ok(format!(
        "{} plies identical, {decisions} matched decisions",
        rec_ora.actions.len()
    ))
}

fn criterion_9() -> Outcome {
    let cfg = presets::preset("checkers-smoke").unwrap();
    let max_moves = Checkers::default().max_moves as usize;
    let start = Instant::now();
    let rows = match run_experiment(&cfg, 1) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let smoke_time = start.elapsed();
    let tallies = legal_tallies(&rows, &cfg, max_moves);
    let equiv = ora_equivalence();
    let pass = smoke_time < Duration::from_secs(15 * 60) && tallies.is_ok() && equiv.is_ok();
    outcome(
        pass,
        format!(
            "smoke {} games in {:.1}s tallies={} ; equivalence: {}",
            rows.len(),
            smoke_time.as_secs_f64(),
            tallies.map(|_| "ok".to_string()).unwrap_or_else(|e| e),
            equiv.unwrap_or_else(|e| e)
        ),
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_captype");
    let mut csvs = Vec::new();
    for (i, workers) in [1, 1, 2].into_iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let status = Command::new(bin)
            .args(["run", "--preset", "checkers-smoke", "--seed", "17", "--workers"])
            .arg(workers.to_string())
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(
                false,
                format!("run {i} failed: {}", String::from_utf8_lossy(&status.stderr)),
            );
        }
        csvs.push(std::fs::read(out.join("matches.csv")).unwrap());
    }
    let same = csvs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!(
            "3 runs (workers 1, 1, 2), {} bytes each, identical={same}",
            csvs[0].len()
        ),
    )
}

fn main() {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let min = |m: u64| Some(Duration::from_secs(60 * m));
    let criteria: Vec<(u32, Box<dyn FnOnce() -> Outcome>)> = vec![
        (1, Box::new(move || timed(min(2), || theorem(Theorem::T1, 50)))),
        (2, Box::new(move || timed(min(2), || theorem(Theorem::T2, 50)))),
        (3, Box::new(move || timed(None, || theorem(Theorem::T3, 100)))),
        (4, Box::new(move || timed(min(10), || theorem(Theorem::T4, 500)))),
        (5, Box::new(|| timed(None, criterion_5))),
        (6, Box::new(|| timed(None, criterion_6))),
        (7, Box::new(move || timed(min(3), criterion_7))),
        (8, Box::new(|| timed(None, criterion_8))),
        (9, Box::new(|| timed(None, criterion_9))),
        (10, Box::new(|| timed(None, criterion_10))),
    ];
    let mut failed = 0;
    for (n, check) in criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {n}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of 10 passed", 10 - failed);
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
