//! Aggregate tables, computed from per-match rows only so that re-reading
//! the CSV reproduces them exactly.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::harness::{MatchRow, Winner};
use crate::metrics::{lower_median, score};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub env: String,
    #[serde(rename = "teamA")]
    pub team_a: String,
    #[serde(rename = "teamB")]
    pub team_b: String,
    pub games: usize,
    pub wins: usize,
    pub losses: usize,
    pub draws: usize,
    pub score: f64,
    pub median_reward_a: f64,
    pub rewards_a: Vec<f64>,
    pub mean_dev_expert: Option<f64>,
    pub mean_dev_novice: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub key: String,
    pub games: usize,
    pub wins: usize,
    pub losses: usize,
    pub score: f64,
    pub mean_dev_expert: Option<f64>,
    pub mean_dev_novice: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub cells: Vec<CellSummary>,
    /// Grouped by expert depth minus novice depth within team A.
    pub by_delta: Vec<GroupSummary>,
    /// Grouped by opponent kind (novice or expert depth) and team-A expert strategy.
    pub by_opponent: Vec<GroupSummary>,
    /// Grouped by team-A expert strategy.
    pub by_strategy: Vec<GroupSummary>,
}

/// `(strategy, depth)` pairs of a team tag such as `CA_MA:4+OBL:2`.
pub fn parse_team(tag: &str) -> Vec<(String, u32)> {
    if tag == "-" {
        return Vec::new();
    }
    tag.split('+')
        .filter_map(|m| {
            let (s, d) = m.rsplit_once(':')?;
            Some((s.to_string(), d.parse().ok()?))
        })
        .collect()
}

/// (expert, novice) of a two-member team, the deeper one first.
fn pair(tag: &str) -> Option<((String, u32), (String, u32))> {
    let team = parse_team(tag);
    if team.len() != 2 {
        return None;
    }
    let (a, b) = (team[0].clone(), team[1].clone());
    Some(if b.1 > a.1 { (b, a) } else { (a, b) })
}

fn opponent_kind(row: &MatchRow) -> Option<String> {
    let ((_, de), (_, dn)) = pair(&row.team_a)?;
    let opp = parse_team(&row.team_b);
    if opp.is_empty() {
        return None;
    }
    let kind = if opp.iter().all(|(_, d)| *d == dn) {
        "novice"
    } else if opp.iter().all(|(_, d)| *d == de) {
        "expert"
    } else {
        "mixed"
    };
    Some(kind.into())
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

fn tally(rows: &[&MatchRow]) -> (usize, usize, usize) {
    let wins = rows.iter().filter(|r| r.winner == Winner::A).count();
    let losses = rows.iter().filter(|r| r.winner == Winner::B).count();
    (wins, losses, rows.len() - wins - losses)
}

fn group(key: String, rows: &[&MatchRow]) -> GroupSummary {
    let (wins, losses, _) = tally(rows);
    GroupSummary {
        key,
        games: rows.len(),
        wins,
        losses,
        score: score(wins, losses, rows.len()).expect("groups are never empty"),
        mean_dev_expert: mean(rows.iter().filter_map(|r| r.dev_expert)),
        mean_dev_novice: mean(rows.iter().filter_map(|r| r.dev_novice)),
    }
}

fn grouped<F: Fn(&MatchRow) -> Option<String>>(rows: &[MatchRow], key: F) -> Vec<GroupSummary> {
    let mut groups: BTreeMap<String, Vec<&MatchRow>> = BTreeMap::new();
    for r in rows {
        if let Some(k) = key(r) {
            groups.entry(k).or_default().push(r);
        }
    }
    groups.into_iter().map(|(k, rs)| group(k, &rs)).collect()
}

pub fn summarize(rows: &[MatchRow]) -> Summary {
    let mut order: Vec<(String, String, String)> = Vec::new();
    let mut by_cell: BTreeMap<(String, String, String), Vec<&MatchRow>> = BTreeMap::new();
    for r in rows {
        let key = (r.env.clone(), r.team_a.clone(), r.team_b.clone());
        if !by_cell.contains_key(&key) {
            order.push(key.clone());
        }
        by_cell.entry(key).or_default().push(r);
    }
    let cells = order
        .into_iter()
        .map(|key| {
            let rs = &by_cell[&key];
            let (wins, losses, draws) = tally(rs);
            let rewards_a: Vec<f64> = rs.iter().map(|r| r.reward_a).collect();
            CellSummary {
                env: key.0,
                team_a: key.1,
                team_b: key.2,
                games: rs.len(),
                wins,
                losses,
                draws,
                score: score(wins, losses, rs.len()).expect("cells are never empty"),
                median_reward_a: lower_median(&rewards_a).expect("cells are never empty"),
                rewards_a,
                mean_dev_expert: mean(rs.iter().filter_map(|r| r.dev_expert)),
                mean_dev_novice: mean(rs.iter().filter_map(|r| r.dev_novice)),
            }
        })
        .collect();
    let by_delta = grouped(rows, |r| {
        let ((_, de), (_, dn)) = pair(&r.team_a)?;
        Some(format!("{:02}", de - dn))
    });
    let by_opponent = grouped(rows, |r| {
        let ((se, _), _) = pair(&r.team_a)?;
        Some(format!("{} {}", opponent_kind(r)?, se))
    });
    let by_strategy = grouped(rows, |r| Some(pair(&r.team_a)?.0 .0));
    Summary {
        cells,
        by_delta,
        by_opponent,
        by_strategy,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into())
}

/// Plain-text tables for the terminal.
pub fn render(summary: &Summary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<32} {:<24} {:>5} {:>8} {:>10} {:>6} {:>6}",
        "teamA", "teamB", "games", "score%", "median", "d_exp", "d_nov"
    );
    for c in &summary.cells {
        let _ = writeln!(
            out,
            "{:<32} {:<24} {:>5} {:>8.1} {:>10} {:>6} {:>6}",
            c.team_a,
            c.team_b,
            c.games,
            c.score * 100.0,
            c.median_reward_a,
            opt(c.mean_dev_expert),
            opt(c.mean_dev_novice)
        );
    }
    for (title, groups) in [
        ("delta", &summary.by_delta),
        ("opponent", &summary.by_opponent),
        ("strategy", &summary.by_strategy),
    ] {
        if groups.is_empty() || summary.cells.iter().all(|c| c.team_b == "-") {
            continue;
        }
        let _ = writeln!(
            out,
            "\n{:<16} {:>5} {:>8} {:>6} {:>6}",
            title, "games", "score%", "d_exp", "d_nov"
        );
        for g in groups.iter() {
            let _ = writeln!(
                out,
                "{:<16} {:>5} {:>8.1} {:>6} {:>6}",
                g.key,
                g.games,
                g.score * 100.0,
                opt(g.mean_dev_expert),
                opt(g.mean_dev_novice)
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(team_a: &str, team_b: &str, reward: f64, winner: Winner) -> MatchRow {
        MatchRow {
            env: "checkers".into(),
            team_a: team_a.into(),
            team_b: team_b.into(),
            seed: 0,
            reward_a: reward,
            reward_b: 0.0,
            winner,
            moves: 1,
            dev_expert: Some(1.0),
            dev_novice: None,
        }
    }

    #[test]
    fn groups_and_medians() {
        let rows = vec![
            row("CA_MA:4+OBL:2", "OBL:2+OBL:2", 5.0, Winner::A),
            row("CA_MA:4+OBL:2", "OBL:2+OBL:2", 1.0, Winner::B),
            row("CA_MA:4+OBL:2", "OBL:2+OBL:2", 3.0, Winner::A),
            row("OBL:2+CA_MA:8", "OBL:8+OBL:8", 0.0, Winner::Draw),
        ];
        let s = summarize(&rows);
        assert_eq!(s.cells.len(), 2);
        assert_eq!(s.cells[0].median_reward_a, 3.0);
        assert!((s.cells[0].score - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.cells[1].draws, 1);
        let keys: Vec<&str> = s.by_delta.iter().map(|g| g.key.as_str()).collect();
        assert_eq!(keys, ["02", "06"]);
        let keys: Vec<&str> = s.by_opponent.iter().map(|g| g.key.as_str()).collect();
        assert_eq!(keys, ["expert CA_MA", "novice CA_MA"]);
        assert_eq!(s.by_strategy[0].games, 4);
        assert_eq!(s.by_strategy[0].mean_dev_expert, Some(1.0));
    }

    #[test]
    fn team_tags() {
        assert_eq!(parse_team("-"), vec![]);
        assert_eq!(
            parse_team("CA_MA:20+OBL:2"),
            vec![("CA_MA".into(), 20), ("OBL".into(), 2)]
        );
    }
}
