//! Cooperative English draughts on 32-square bitboards.
//!
//! Two teams of players share a side each and take turns as the side's
//! mover. Black (team 0) starts on squares 0..12 and moves first toward
//! higher rows. Captures are forced, a multi-jump is a single action and a
//! man that reaches the far row is crowned and stops.
//!
//! Square `s` sits on row `s / 4`, column `2 * (s % 4) + (row even ? 1 : 0)`.
//!
//! Rewards go to the moving team: +1 per captured man, +2 per captured king,
//! +1 for crowning. The game ends when the side to move has no move (it
//! loses), or after 120 moves in total or 40 moves without any reward, in
//! which case the team with more cumulative reward wins.
//!
//! States serialize to one line:
//! `<B|W>:W<squares>:B<squares>:<moves>:<idle>:<moverB>,<moverW>:<rewardB>,<rewardW>`
//! with 1-based square numbers and a `K` prefix for kings, e.g.
//! `B:W21,22,K30:B1,5:12:3:1,0:2,1`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{stable_key, Transition, TurnGame};
use crate::{Error, Result};

const NONE: u8 = 255;
const FULL: u32 = u32::MAX;
const BLACK_START: u32 = 0x0000_0fff;
const WHITE_START: u32 = 0xfff0_0000;
const ROW0: u32 = 0x0000_000f;
const ROW7: u32 = 0xf000_0000;

/// Row and column steps of the four diagonals: two toward higher rows
/// (black's forward), then two toward lower rows.
const DIRS: [(i32, i32); 4] = [(1, -1), (1, 1), (-1, -1), (-1, 1)];

const fn square_at(row: i32, col: i32) -> u8 {
    if row < 0 || row > 7 || col < 0 || col > 7 || (row + col) % 2 == 0 {
        return NONE;
    }
    (row * 4 + col / 2) as u8
}

const fn build_tables(dist: i32) -> [[u8; 4]; 32] {
    let mut t = [[NONE; 4]; 32];
    let mut s = 0;
    while s < 32 {
        let row = (s / 4) as i32;
        let col = 2 * (s % 4) as i32 + if row % 2 == 0 { 1 } else { 0 };
        let mut d = 0;
        while d < 4 {
            t[s][d] = square_at(row + dist * DIRS[d].0, col + dist * DIRS[d].1);
            d += 1;
        }
        s += 1;
    }
    t
}

const ADJ: [[u8; 4]; 32] = build_tables(1);
const JUMP: [[u8; 4]; 32] = build_tables(2);

pub fn row_of(square: u8) -> u8 {
    square / 4
}

pub fn col_of(square: u8) -> u8 {
    let row = square / 4;
    2 * (square % 4) + if row % 2 == 0 { 1 } else { 0 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CheckersMove {
    /// Squares visited, starting with the origin.
    pub path: [u8; 13],
    pub len: u8,
    /// Bitboard of pieces jumped.
    pub captured: u32,
}

impl CheckersMove {
    fn simple(from: u8, to: u8) -> Self {
        let mut path = [0u8; 13];
        path[0] = from;
        path[1] = to;
        Self {
            path,
            len: 2,
            captured: 0,
        }
    }

    pub fn from(&self) -> u8 {
        self.path[0]
    }

    pub fn to(&self) -> u8 {
        self.path[self.len as usize - 1]
    }

    pub fn squares(&self) -> &[u8] {
        &self.path[..self.len as usize]
    }

    pub fn is_capture(&self) -> bool {
        self.captured != 0
    }

    /// `9-13` for a step, `9x18x27` for jumps (1-based squares).
    pub fn notation(&self) -> String {
        let sep = if self.is_capture() { "x" } else { "-" };
        let parts: Vec<String> = self.squares().iter().map(|s| format!("{}", s + 1)).collect();
        parts.join(sep)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CheckersState {
    pub black: u32,
    pub white: u32,
    pub kings: u32,
    /// Team to move: 0 black, 1 white.
    pub to_move: u8,
    /// Index of the next mover within each team.
    pub mover: [u8; 2],
    pub moves: u16,
    pub idle: u16,
    pub reward: [i32; 2],
    /// Whether the move-count limits apply. Planning copies turn them off.
    pub limits: bool,
}

impl CheckersState {
    pub fn initial() -> Self {
        Self {
            black: BLACK_START,
            white: WHITE_START,
            kings: 0,
            to_move: 0,
            mover: [0, 0],
            moves: 0,
            idle: 0,
            reward: [0, 0],
            limits: true,
        }
    }

    pub fn side(&self, team: u8) -> u32 {
        if team == 0 {
            self.black
        } else {
            self.white
        }
    }

    pub fn occupied(&self) -> u32 {
        self.black | self.white
    }

    pub fn to_fen(&self) -> String {
        let list = |bits: u32| -> String {
            let parts: Vec<String> = (0..32u8)
                .filter(|s| bits & (1 << s) != 0)
                .map(|s| {
                    let k = if self.kings & (1 << s) != 0 { "K" } else { "" };
                    format!("{k}{}", s + 1)
                })
                .collect();
            parts.join(",")
        };
        format!(
            "{}:W{}:B{}:{}:{}:{},{}:{},{}",
            if self.to_move == 0 { 'B' } else { 'W' },
            list(self.white),
            list(self.black),
            self.moves,
            self.idle,
            self.mover[0],
            self.mover[1],
            self.reward[0],
            self.reward[1],
        )
    }

    pub fn from_fen(line: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("checkers state: {m}"));
        let fields: Vec<&str> = line.trim().split(':').collect();
        if fields.len() != 7 {
            return Err(bad("expected 7 fields"));
        }
        let to_move = match fields[0] {
            "B" => 0,
            "W" => 1,
            _ => return Err(bad("side must be B or W")),
        };
        let mut s = Self {
            black: 0,
            white: 0,
            kings: 0,
            to_move,
            mover: [0, 0],
            moves: 0,
            idle: 0,
            reward: [0, 0],
            limits: true,
        };
        for (field, prefix) in [(fields[1], 'W'), (fields[2], 'B')] {
            let body = field.strip_prefix(prefix).ok_or_else(|| bad("piece list prefix"))?;
            for item in body.split(',').filter(|x| !x.is_empty()) {
                let (king, num) = match item.strip_prefix('K') {
                    Some(n) => (true, n),
                    None => (false, item),
                };
                let n: u32 = num.parse().map_err(|_| bad("square number"))?;
                if !(1..=32).contains(&n) {
                    return Err(bad("square out of range"));
                }
                let bit = 1u32 << (n - 1);
                if s.occupied() & bit != 0 {
                    return Err(bad("square listed twice"));
                }
                if prefix == 'W' {
                    s.white |= bit;
                } else {
                    s.black |= bit;
                }
                if king {
                    s.kings |= bit;
                }
            }
        }
        s.moves = fields[3].parse().map_err(|_| bad("move count"))?;
        s.idle = fields[4].parse().map_err(|_| bad("idle count"))?;
        let pair = |f: &str| -> Result<(i64, i64)> {
            let (a, b) = f.split_once(',').ok_or_else(|| bad("pair"))?;
            Ok((
                a.parse().map_err(|_| bad("pair value"))?,
                b.parse().map_err(|_| bad("pair value"))?,
            ))
        };
        let (m0, m1) = pair(fields[5])?;
        let (r0, r1) = pair(fields[6])?;
        if m0 < 0 || m1 < 0 || m0 > 255 || m1 > 255 {
            return Err(bad("mover index"));
        }
        s.mover = [m0 as u8, m1 as u8];
        s.reward = [r0 as i32, r1 as i32];
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GameResult {
    Win(usize),
    Draw,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkers {
    pub team_size: usize,
    pub max_moves: u16,
    pub max_idle: u16,
    pub man_value: i32,
    pub king_value: i32,
    pub crown_value: i32,
}

impl Default for Checkers {
    fn default() -> Self {
        Self {
            team_size: 2,
            max_moves: 120,
            max_idle: 40,
            man_value: 1,
            king_value: 2,
            crown_value: 1,
        }
    }
}

fn promotion_row(team: u8) -> u32 {
    if team == 0 {
        ROW7
    } else {
        ROW0
    }
}

fn directions(team: u8, king: bool) -> &'static [usize] {
    match (king, team) {
        (true, _) => &[0, 1, 2, 3],
        (false, 0) => &[0, 1],
        (false, _) => &[2, 3],
    }
}

impl Checkers {
    pub fn new(team_size: usize) -> Result<Self> {
        if team_size == 0 || team_size > 255 {
            return Err(Error::InvalidParameter("team size must be in 1..=255".into()));
        }
        Ok(Self {
            team_size,
            ..Self::default()
        })
    }

    /// Player index of a team's `mover`-th member. Turn order is
    /// B0, W0, B1, W1, ...
    pub fn player(&self, team: usize, mover: usize) -> usize {
        mover * 2 + team
    }

    fn limit_reached(&self, s: &CheckersState) -> bool {
        s.limits && (s.moves >= self.max_moves || s.idle >= self.max_idle)
    }

    /// Legal moves by the rules of draughts, ignoring the move-count limits.
    pub fn generate(&self, s: &CheckersState, out: &mut Vec<CheckersMove>) {
        out.clear();
        let own = s.side(s.to_move);
        let opp = s.side(1 - s.to_move);
        let empty = !s.occupied() & FULL;
        let mut path = [0u8; 13];
        let mut bits = own;
        while bits != 0 {
            let from = bits.trailing_zeros() as u8;
            bits &= bits - 1;
            path[0] = from;
            let king = s.kings & (1 << from) != 0;
            self.jumps(s.to_move, king, opp, empty | (1 << from), from, 0, &mut path, 1, out);
        }
        if !out.is_empty() {
            return;
        }
        let mut bits = own;
        while bits != 0 {
            let from = bits.trailing_zeros() as u8;
            bits &= bits - 1;
            let king = s.kings & (1 << from) != 0;
            for &d in directions(s.to_move, king) {
                let to = ADJ[from as usize][d];
                if to != NONE && empty & (1 << to) != 0 {
                    out.push(CheckersMove::simple(from, to));
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn jumps(
        &self,
        team: u8,
        king: bool,
        opp: u32,
        empty: u32,
        at: u8,
        captured: u32,
        path: &mut [u8; 13],
        len: usize,
        out: &mut Vec<CheckersMove>,
    ) {
        let mut extended = false;
        for &d in directions(team, king) {
            let over = ADJ[at as usize][d];
            let land = JUMP[at as usize][d];
            if land == NONE {
                continue;
            }
            let over_bit = 1u32 << over;
            if opp & over_bit == 0 || captured & over_bit != 0 || empty & (1 << land) == 0 {
                continue;
            }
            extended = true;
            path[len] = land;
            let caught = captured | over_bit;
            if !king && promotion_row(team) & (1 << land) != 0 {
                out.push(CheckersMove {
                    path: *path,
                    len: (len + 1) as u8,
                    captured: caught,
                });
            } else {
                self.jumps(team, king, opp, empty, land, caught, path, len + 1, out);
            }
            path[len] = 0;
        }
        if !extended && len > 1 {
            out.push(CheckersMove {
                path: *path,
                len: len as u8,
                captured,
            });
        }
    }

    /// Applies a move, returning the next state and the reward to the mover.
    pub fn apply(&self, s: &CheckersState, mv: &CheckersMove) -> (CheckersState, i32) {
        let mut n = *s;
        let team = s.to_move;
        let from = 1u32 << mv.from();
        let to = 1u32 << mv.to();
        let was_king = s.kings & from != 0;
        let mut reward = 0;
        reward += (mv.captured & s.kings).count_ones() as i32 * self.king_value;
        reward += (mv.captured & !s.kings).count_ones() as i32 * self.man_value;
        if team == 0 {
            n.black = (n.black & !from) | to;
            n.white &= !mv.captured;
        } else {
            n.white = (n.white & !from) | to;
            n.black &= !mv.captured;
        }
        n.kings &= !(mv.captured | from);
        if was_king {
            n.kings |= to;
        } else if promotion_row(team) & to != 0 {
            n.kings |= to;
            reward += self.crown_value;
        }
        n.reward[team as usize] += reward;
        n.moves = n.moves.saturating_add(1);
        n.idle = if reward > 0 { 0 } else { n.idle.saturating_add(1) };
        n.mover[team as usize] = ((n.mover[team as usize] as usize + 1) % self.team_size) as u8;
        n.to_move = 1 - team;
        (n, reward)
    }

    /// Outcome of a finished game, `None` while it is still running.
    pub fn result(&self, s: &CheckersState) -> Option<GameResult> {
        if self.limit_reached(s) {
            return Some(match s.reward[0].cmp(&s.reward[1]) {
                core::cmp::Ordering::Greater => GameResult::Win(0),
                core::cmp::Ordering::Less => GameResult::Win(1),
                core::cmp::Ordering::Equal => GameResult::Draw,
            });
        }
        let mut buf = Vec::new();
        self.generate(s, &mut buf);
        buf.is_empty().then_some(GameResult::Win(1 - s.to_move as usize))
    }
}

/// Leaf count of the move tree below `state`.
pub fn perft(game: &Checkers, state: &CheckersState, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = game.legal_actions(state);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves
        .iter()
        .map(|m| perft(game, &game.apply(state, m).0, depth - 1))
        .sum()
}

impl TurnGame for Checkers {
    type State = CheckersState;
    type Action = CheckersMove;

    fn n_players(&self) -> usize {
        2 * self.team_size
    }

    fn initial_state(&self) -> CheckersState {
        CheckersState::initial()
    }

    fn current_actor(&self, s: &CheckersState) -> usize {
        self.player(s.to_move as usize, s.mover[s.to_move as usize] as usize)
    }

    fn team_of(&self, player: usize) -> usize {
        player % 2
    }

    fn legal_actions_into(&self, s: &CheckersState, out: &mut Vec<CheckersMove>) {
        if self.limit_reached(s) {
            out.clear();
        } else {
            self.generate(s, out);
        }
    }

    fn step(&self, s: &CheckersState, mv: &CheckersMove) -> Transition<CheckersState> {
        let (state, r) = self.apply(s, mv);
        let mut rewards = [0.0; 2];
        rewards[s.to_move as usize] = r as f64;
        Transition { state, rewards }
    }

    fn is_terminal(&self, s: &CheckersState) -> bool {
        self.result(s).is_some()
    }

    fn state_key(&self, s: &CheckersState) -> u64 {
        stable_key(s)
    }

    fn planning_view(&self, s: &CheckersState) -> CheckersState {
        CheckersState {
            moves: 0,
            idle: 0,
            limits: false,
            ..*s
        }
    }
}
