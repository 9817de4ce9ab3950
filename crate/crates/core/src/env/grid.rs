//! Gridworlds with fire, coins and walls, driven by one or two avatars.
//!
//! Layouts use a small text format:
//!
//! ```text
//! # comment
//! horizon 20
//! avatars shared b      # or: avatars b r   (one avatar per player, in turn order)
//! stay no               # whether "stay" is a legal move
//! fire -2
//! coin c 100 any        # symbol, value, owner avatar symbol or `any`
//! map
//! ....FFFccc
//! ...bFFFccc
//! ```
//!
//! Tiles: `.` neutral, `F` fire, `#` wall, `b`/`r` avatar starts (neutral
//! underneath), any declared coin symbol. A coin pays its value to its owner
//! avatar, nothing to anyone else, and disappears either way. After every
//! step the moved avatar's tile is scored: fire costs `fire`, a present coin
//! is collected. Bumping into a wall, the boundary or the other avatar leaves
//! the avatar in place.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{stable_key, Transition, TurnGame};
use crate::{Error, Result};

pub const WALL_OF_FIRE_MAP: &str = include_str!("../../layouts/wall_of_fire.map");
pub const NARROW_TUNNEL_MAP: &str = include_str!("../../layouts/narrow_tunnel.map");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tile {
    Neutral,
    Fire,
    Wall,
    /// Index into [`GridConfig::coin_kinds`].
    Coin(u8),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoinKind {
    pub symbol: char,
    pub value: f64,
    /// Avatar allowed to cash the coin; `None` pays anyone.
    pub owner: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    pub tiles: Vec<Tile>,
    pub coin_kinds: Vec<CoinKind>,
    /// Start cell of each avatar.
    pub starts: Vec<usize>,
    /// Symbols of the avatars, in `starts` order.
    pub avatar_symbols: Vec<char>,
    pub shared_avatar: bool,
    pub horizon: usize,
    pub fire_penalty: f64,
    pub allow_stay: bool,
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse(format!("line {}: {}", line + 1, msg))
}

impl GridConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut horizon = None;
        let mut avatar_line: Option<(bool, Vec<char>)> = None;
        let mut allow_stay = false;
        let mut fire_penalty = -2.0;
        let mut coins: Vec<(char, f64, String)> = Vec::new();
        let mut rows: Vec<&str> = Vec::new();
        let mut in_map = false;

        for (no, raw) in text.lines().enumerate() {
            if in_map {
                let row = raw.trim_end();
                if !row.is_empty() {
                    rows.push(row);
                }
                continue;
            }
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let key = words.next().unwrap_or("");
            let rest: Vec<&str> = words.collect();
            match (key, rest.as_slice()) {
                ("horizon", [h]) => {
                    horizon = Some(h.parse::<usize>().map_err(|_| parse_err(no, "bad horizon"))?);
                }
                ("avatars", ["shared", s]) => avatar_line = Some((true, vec![single_char(s, no)?])),
                ("avatars", syms) if !syms.is_empty() => {
                    let syms = syms.iter().map(|s| single_char(s, no)).collect::<Result<Vec<_>>>()?;
                    avatar_line = Some((false, syms));
                }
                ("stay", ["yes"]) => allow_stay = true,
                ("stay", ["no"]) => allow_stay = false,
                ("fire", [v]) => {
                    fire_penalty = v.parse().map_err(|_| parse_err(no, "bad fire value"))?;
                }
                ("coin", [sym, value, owner]) => {
                    let value = value.parse().map_err(|_| parse_err(no, "bad coin value"))?;
                    coins.push((single_char(sym, no)?, value, owner.to_string()));
                }
                ("map", []) => in_map = true,
                _ => return Err(parse_err(no, "unrecognized directive")),
            }
        }

        let horizon = horizon.ok_or_else(|| Error::Parse("missing horizon".into()))?;
        if horizon == 0 {
            return Err(Error::Parse("horizon must be positive".into()));
        }
        let (shared_avatar, avatar_symbols) = avatar_line.ok_or_else(|| Error::Parse("missing avatars".into()))?;
        if rows.is_empty() {
            return Err(Error::Parse("empty map".into()));
        }
        let width = rows[0].chars().count();
        if rows.iter().any(|r| r.chars().count() != width) {
            return Err(Error::Parse("ragged map rows".into()));
        }
        let height = rows.len();

        let mut coin_kinds = Vec::new();
        for (symbol, value, owner) in coins {
            let owner = if owner == "any" {
                None
            } else {
                let o = owner.chars().next().unwrap_or(' ');
                Some(
                    avatar_symbols
                        .iter()
                        .position(|&a| a == o)
                        .ok_or_else(|| Error::Parse(format!("coin owner {owner} is not an avatar")))?,
                )
            };
            coin_kinds.push(CoinKind { symbol, value, owner });
        }

        let mut tiles = Vec::with_capacity(width * height);
        let mut starts = vec![usize::MAX; avatar_symbols.len()];
        for (y, row) in rows.iter().enumerate() {
            for (x, ch) in row.chars().enumerate() {
                let cell = y * width + x;
                let tile = match ch {
                    '.' => Tile::Neutral,
                    'F' => Tile::Fire,
                    '#' => Tile::Wall,
                    _ => {
                        if let Some(a) = avatar_symbols.iter().position(|&s| s == ch) {
                            if starts[a] != usize::MAX {
                                return Err(Error::Parse(format!("avatar {ch} placed twice")));
                            }
                            starts[a] = cell;
                            Tile::Neutral
                        } else if let Some(k) = coin_kinds.iter().position(|k| k.symbol == ch) {
                            Tile::Coin(k as u8)
                        } else {
                            return Err(Error::Parse(format!("unknown tile {ch:?}")));
                        }
                    }
                };
                tiles.push(tile);
            }
        }
        if starts.contains(&usize::MAX) {
            return Err(Error::Parse("avatar missing from map".into()));
        }
        let cfg = Self {
            width,
            height,
            tiles,
            coin_kinds,
            starts,
            avatar_symbols,
            shared_avatar,
            horizon,
            fire_penalty,
            allow_stay,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.horizon > u16::MAX as usize {
            return Err(Error::InvalidParameter("horizon out of range".into()));
        }
        if self.tiles.len() != self.width * self.height {
            return Err(Error::InvalidParameter("tile count does not match size".into()));
        }
        if self.starts.is_empty() || self.starts.len() > 2 || (self.shared_avatar && self.starts.len() != 1) {
            return Err(Error::InvalidParameter(
                "one shared avatar or two separate avatars".into(),
            ));
        }
        if self
            .starts
            .iter()
            .any(|&s| s >= self.tiles.len() || self.tiles[s] == Tile::Wall)
        {
            return Err(Error::InvalidParameter("avatar start out of bounds".into()));
        }
        let coins = self.tiles.iter().filter(|t| matches!(t, Tile::Coin(_))).count();
        if coins > 64 {
            return Err(Error::InvalidParameter("at most 64 coins".into()));
        }
        Ok(())
    }

    pub fn wall_of_fire() -> Self {
        Self::parse(WALL_OF_FIRE_MAP).expect("shipped layout parses")
    }

    pub fn narrow_tunnel() -> Self {
        Self::parse(NARROW_TUNNEL_MAP).expect("shipped layout parses")
    }

    /// Same layout with every coin of `symbol` worth `value`.
    pub fn with_coin_value(mut self, symbol: char, value: f64) -> Self {
        for k in &mut self.coin_kinds {
            if k.symbol == symbol {
                k.value = value;
            }
        }
        self
    }
}

fn single_char(s: &str, line: usize) -> Result<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(parse_err(line, "expected a single character")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    Up,
    Down,
    Left,
    Right,
    Stay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridState {
    pub pos: [u16; 2],
    /// Bit `k` set while coin `k` is still on the board.
    pub coins: u64,
    pub t: u16,
}

#[derive(Clone, Debug)]
pub struct GridGame {
    cfg: GridConfig,
    coin_of_cell: Vec<Option<u8>>,
    coin_cells: Vec<usize>,
    /// BFS distance (ignoring avatars) from every coin to every cell.
    coin_dist: Vec<Vec<u16>>,
}

const FAR: u16 = u16::MAX;

impl GridGame {
    pub fn new(cfg: GridConfig) -> Result<Self> {
        cfg.validate()?;
        let mut coin_of_cell = vec![None; cfg.tiles.len()];
        let mut coin_cells = Vec::new();
        for (cell, tile) in cfg.tiles.iter().enumerate() {
            if let Tile::Coin(_) = tile {
                coin_of_cell[cell] = Some(coin_cells.len() as u8);
                coin_cells.push(cell);
            }
        }
        let mut game = Self {
            cfg,
            coin_of_cell,
            coin_cells,
            coin_dist: Vec::new(),
        };
        game.coin_dist = game.coin_cells.iter().map(|&c| game.bfs(c)).collect();
        Ok(game)
    }

    pub fn wall_of_fire() -> Self {
        Self::new(GridConfig::wall_of_fire()).expect("shipped layout is valid")
    }

    pub fn narrow_tunnel() -> Self {
        Self::new(GridConfig::narrow_tunnel()).expect("shipped layout is valid")
    }

    pub fn config(&self) -> &GridConfig {
        &self.cfg
    }

    pub fn n_coins(&self) -> usize {
        self.coin_cells.len()
    }

    pub fn coin_cell(&self, k: usize) -> usize {
        self.coin_cells[k]
    }

    pub fn n_avatars(&self) -> usize {
        self.cfg.starts.len()
    }

    pub fn avatar_of(&self, player: usize) -> usize {
        if self.cfg.shared_avatar {
            0
        } else {
            player
        }
    }

    pub fn tile(&self, cell: usize) -> Tile {
        self.cfg.tiles[cell]
    }

    pub fn xy(&self, cell: usize) -> (usize, usize) {
        (cell % self.cfg.width, cell / self.cfg.width)
    }

    /// Cell reached by moving, or `None` when blocked by a wall or the edge.
    pub fn neighbor(&self, cell: usize, mv: Move) -> Option<usize> {
        let (x, y) = self.xy(cell);
        let (w, h) = (self.cfg.width, self.cfg.height);
        let next = match mv {
            Move::Up if y > 0 => cell - w,
            Move::Down if y + 1 < h => cell + w,
            Move::Left if x > 0 => cell - 1,
            Move::Right if x + 1 < w => cell + 1,
            Move::Stay => cell,
            _ => return None,
        };
        (self.cfg.tiles[next] != Tile::Wall).then_some(next)
    }

    fn bfs(&self, from: usize) -> Vec<u16> {
        let mut dist = vec![FAR; self.cfg.tiles.len()];
        let mut queue = VecDeque::new();
        dist[from] = 0;
        queue.push_back(from);
        while let Some(c) = queue.pop_front() {
            for mv in [Move::Up, Move::Down, Move::Left, Move::Right] {
                if let Some(n) = self.neighbor(c, mv) {
                    if dist[n] == FAR {
                        dist[n] = dist[c] + 1;
                        queue.push_back(n);
                    }
                }
            }
        }
        dist
    }

    /// Value of the coin at `k` when collected by `avatar`.
    pub fn coin_payout(&self, k: usize, avatar: usize) -> f64 {
        let Tile::Coin(kind) = self.cfg.tiles[self.coin_cells[k]] else {
            return 0.0;
        };
        let kind = &self.cfg.coin_kinds[kind as usize];
        match kind.owner {
            Some(o) if o != avatar => 0.0,
            _ => kind.value,
        }
    }

    /// Moves `avatar` needs to reach its nearest remaining paying coin,
    /// ignoring the other avatars.
    pub fn nearest_coin_distance(&self, state: &GridState, avatar: usize) -> Option<usize> {
        (0..self.coin_cells.len())
            .filter(|&k| state.coins & (1 << k) != 0 && self.coin_payout(k, avatar) > 0.0)
            .map(|k| self.coin_dist[k][state.pos[avatar] as usize])
            .filter(|&d| d != FAR)
            .min()
            .map(usize::from)
    }

    /// Upper bound on the team reward still collectable from `state`: one coin
    /// per remaining step at best, none before the nearest coin is reached,
    /// and fire never helps.
    pub fn return_upper_bound(&self, state: &GridState) -> f64 {
        let steps_left = self.cfg.horizon.saturating_sub(state.t as usize);
        let mut values = Vec::new();
        let mut nearest = FAR;
        for k in 0..self.coin_cells.len() {
            if state.coins & (1 << k) == 0 {
                continue;
            }
            let best = (0..self.n_avatars())
                .map(|a| self.coin_payout(k, a))
                .fold(0.0f64, f64::max);
            if best > 0.0 {
                values.push(best);
                for a in 0..self.n_avatars() {
                    nearest = nearest.min(self.coin_dist[k][state.pos[a] as usize]);
                }
            }
        }
        if nearest == FAR {
            return 0.0;
        }
        let reachable = (steps_left + 1).saturating_sub(nearest as usize).min(values.len());
        values.sort_by(|a, b| b.total_cmp(a));
        values[..reachable].iter().sum()
    }

    fn moves(&self) -> &'static [Move] {
        if self.cfg.allow_stay {
            &[Move::Up, Move::Down, Move::Left, Move::Right, Move::Stay]
        } else {
            &[Move::Up, Move::Down, Move::Left, Move::Right]
        }
    }
}

impl TurnGame for GridGame {
    type State = GridState;
    type Action = Move;

    fn n_players(&self) -> usize {
        if self.cfg.shared_avatar {
            2
        } else {
            self.cfg.starts.len()
        }
    }

    fn initial_state(&self) -> GridState {
        let mut pos = [0u16; 2];
        for (a, &s) in self.cfg.starts.iter().enumerate() {
            pos[a] = s as u16;
        }
        let n = self.coin_cells.len();
        let coins = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        GridState { pos, coins, t: 0 }
    }

    fn current_actor(&self, state: &GridState) -> usize {
        state.t as usize % self.n_players()
    }

    fn team_of(&self, _player: usize) -> usize {
        0
    }

    fn legal_actions_into(&self, state: &GridState, out: &mut Vec<Move>) {
        out.clear();
        if self.is_terminal(state) {
            return;
        }
        let avatar = self.avatar_of(self.current_actor(state));
        let here = state.pos[avatar] as usize;
        for &mv in self.moves() {
            let open = match mv {
                Move::Stay => true,
                _ => self
                    .neighbor(here, mv)
                    .is_some_and(|cell| !(0..self.n_avatars()).any(|o| o != avatar && state.pos[o] as usize == cell)),
            };
            if open {
                out.push(mv);
            }
        }
        if out.is_empty() {
            // Boxed in without a stay action: waiting is the only option.
            out.push(Move::Stay);
        }
    }

    fn step(&self, state: &GridState, action: &Move) -> Transition<GridState> {
        let avatar = self.avatar_of(self.current_actor(state));
        let mut next = *state;
        let here = state.pos[avatar] as usize;
        if let Some(cell) = self.neighbor(here, *action) {
            let blocked = (0..self.n_avatars()).any(|o| o != avatar && state.pos[o] as usize == cell);
            if !blocked {
                next.pos[avatar] = cell as u16;
            }
        }
        let cell = next.pos[avatar] as usize;
        let mut reward = 0.0;
        match self.cfg.tiles[cell] {
            Tile::Fire => reward += self.cfg.fire_penalty,
            Tile::Coin(_) => {
                let k = self.coin_of_cell[cell].expect("coin cell is indexed") as usize;
                if next.coins & (1 << k) != 0 {
                    next.coins &= !(1 << k);
                    reward += self.coin_payout(k, avatar);
                }
            }
            Tile::Neutral | Tile::Wall => {}
        }
        next.t += 1;
        Transition {
            state: next,
            rewards: [reward, 0.0],
        }
    }

    fn is_terminal(&self, state: &GridState) -> bool {
        state.t as usize >= self.cfg.horizon
    }

    fn state_key(&self, state: &GridState) -> u64 {
        stable_key(state)
    }
}

/// Renders a state as map rows (avatars drawn over tiles, collected coins
/// shown as `.`).
pub fn render(game: &GridGame, state: &GridState) -> String {
    let cfg = game.config();
    let mut out = String::new();
    for y in 0..cfg.height {
        for x in 0..cfg.width {
            let cell = y * cfg.width + x;
            let avatar = (0..game.n_avatars()).find(|&a| state.pos[a] as usize == cell);
            let ch = match (avatar, cfg.tiles[cell]) {
                (Some(a), _) => cfg.avatar_symbols[a],
                (None, Tile::Neutral) => '.',
                (None, Tile::Fire) => 'F',
                (None, Tile::Wall) => '#',
                (None, Tile::Coin(kind)) => {
                    let k = game.coin_of_cell[cell].unwrap_or(0) as usize;
                    if state.coins & (1 << k) != 0 {
                        cfg.coin_kinds[kind as usize].symbol
                    } else {
                        '.'
                    }
                }
            };
            out.push(ch);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walk(game: &GridGame, moves: &[Move]) -> (GridState, f64) {
        let mut s = game.initial_state();
        let mut total = 0.0;
        for m in moves {
            let tr = game.step(&s, m);
            total += tr.rewards[0];
            s = tr.state;
        }
        (s, total)
    }

    #[test]
    fn shipped_layouts_parse() {
        let wof = GridGame::wall_of_fire();
        assert_eq!(wof.n_coins(), 25);
        assert_eq!(wof.n_players(), 2);
        assert_eq!(wof.config().horizon, 20);
        assert_eq!(wof.legal_actions(&wof.initial_state()).len(), 4);
        let fire_cols: Vec<usize> = (0..14).filter(|&x| wof.tile(2 * 14 + x) == Tile::Fire).collect();
        assert_eq!(fire_cols, vec![4, 5, 6, 7, 8]);

        let tun = GridGame::narrow_tunnel();
        assert_eq!(tun.n_players(), 2);
        assert_eq!(tun.n_coins(), 7);
        // blue starts in its pocket: down or stay
        assert_eq!(tun.legal_actions(&tun.initial_state()), vec![Move::Down, Move::Stay]);
        assert_eq!(
            render(&tun, &tun.initial_state()),
            "....r###b####\n.cccc.....CCC\n.....###.....\n"
        );
    }

    #[test]
    fn fire_and_coins() {
        let g = GridGame::wall_of_fire();
        let (_, r) = walk(&g, &[Move::Right]);
        assert_eq!(r, -2.0);
        let right6 = [Move::Right; 6];
        let (s, r) = walk(&g, &right6);
        assert_eq!(r, 5.0 * -2.0 + 100.0);
        // step off the coin and back on: nothing the second time
        let mut moves = right6.to_vec();
        moves.extend([Move::Left, Move::Right]);
        let (_, r2) = walk(&g, &moves);
        assert_eq!(r2, r - 2.0);
        assert_eq!(s.coins.count_ones(), 24);
    }

    #[test]
    fn tunnel_ownership_and_blocking() {
        let g = GridGame::narrow_tunnel();
        // blue walks onto the first red coin: worthless, but gone
        let (s, r) = walk(&g, &[Move::Down, Move::Stay, Move::Right, Move::Stay, Move::Right]);
        assert_eq!(r, 0.0);
        assert_eq!(s.coins.count_ones(), 6);
        // inside the tunnel only the corridor moves remain
        let (s, _) = walk(&g, &[Move::Down, Move::Stay, Move::Left]);
        assert_eq!(g.xy(s.pos[0] as usize), (7, 1));
        let mut s = s;
        s.t = 0;
        assert_eq!(g.legal_actions(&s), vec![Move::Left, Move::Right, Move::Stay]);
        // red cannot step onto blue, and an attempted move leaves it in place
        let mut s = g.initial_state();
        s.pos[0] = 8 + 13;
        s.pos[1] = 7 + 13;
        s.t = 1;
        assert!(!g.legal_actions(&s).contains(&Move::Right));
        let tr = g.step(&s, &Move::Right);
        assert_eq!(tr.state.pos[1], 20);
    }

    #[test]
    fn red_coin_pays_red() {
        let g = GridGame::narrow_tunnel();
        let mut s = g.initial_state();
        s.pos[1] = 9 + 13;
        s.t = 1;
        let tr = g.step(&s, &Move::Right);
        assert_eq!(tr.rewards[0], 30.0);
    }

    #[test]
    fn horizon_terminates() {
        let g = GridGame::wall_of_fire();
        let (s, _) = walk(&g, &[Move::Up; 20]);
        assert!(g.is_terminal(&s));
        assert!(g.legal_actions(&s).is_empty());
    }

    #[test]
    fn bound_at_start() {
        let g = GridGame::wall_of_fire();
        assert_eq!(g.return_upper_bound(&g.initial_state()), 1500.0);
    }

    #[test]
    fn parse_errors() {
        assert!(GridConfig::parse("horizon 3\navatars b\nmap\n.x.\n").is_err());
        assert!(GridConfig::parse("avatars b\nmap\n.b.\n").is_err());
        assert!(GridConfig::parse("horizon 3\navatars b\nmap\n.b.\n..\n").is_err());
        assert!(GridConfig::parse("horizon 3\navatars b\nmap\n...\n").is_err());
        assert!(GridConfig::parse("horizon 3\navatars b\nwat\nmap\n.b.\n").is_err());
    }
}
