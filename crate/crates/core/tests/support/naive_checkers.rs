//! Naive 8x8 mailbox checkers move generator, shared by test targets.

use captype_core::env::checkers::{Checkers, CheckersState};
use captype_core::env::TurnGame;

#[derive(Clone, Copy, PartialEq)]
pub struct Piece {
    pub team: u8,
    pub king: bool,
}

pub type Board = [[Option<Piece>; 8]; 8];

pub fn square_at(r: usize, c: usize) -> Option<u8> {
    let shift = if r % 2 == 0 { 1 } else { 0 };
    (c % 2 == shift).then(|| (r * 4 + (c - shift) / 2) as u8)
}

pub fn board_of(s: &CheckersState) -> Board {
    let mut b = [[None; 8]; 8];
    for r in 0..8 {
        for c in 0..8 {
            if let Some(sq) = square_at(r, c) {
                let bit = 1u32 << sq;
                let king = s.kings & bit != 0;
                if s.black & bit != 0 {
                    b[r][c] = Some(Piece { team: 0, king });
                } else if s.white & bit != 0 {
                    b[r][c] = Some(Piece { team: 1, king });
                }
            }
        }
    }
    b
}

fn dirs(p: Piece) -> Vec<(i32, i32)> {
    let fwd = if p.team == 0 { 1 } else { -1 };
    if p.king {
        vec![(1, -1), (1, 1), (-1, -1), (-1, 1)]
    } else {
        vec![(fwd, -1), (fwd, 1)]
    }
}

fn inside(r: i32, c: i32) -> bool {
    (0..8).contains(&r) && (0..8).contains(&c)
}

fn far_row(team: u8) -> i32 {
    if team == 0 {
        7
    } else {
        0
    }
}

fn jumps_from(
    b: &Board,
    p: Piece,
    path: &mut Vec<(i32, i32)>,
    taken: &mut Vec<(i32, i32)>,
    out: &mut Vec<Vec<(i32, i32)>>,
) {
    let (r, c) = *path.last().unwrap();
    let origin = path[0];
    let mut extended = false;
    for (dr, dc) in dirs(p) {
        let (or, oc) = (r + dr, c + dc);
        let (lr, lc) = (r + 2 * dr, c + 2 * dc);
        if !inside(lr, lc) {
            continue;
        }
        let enemy = matches!(b[or as usize][oc as usize], Some(q) if q.team != p.team);
        let free = b[lr as usize][lc as usize].is_none() || (lr, lc) == origin;
        if !enemy || !free || taken.contains(&(or, oc)) {
            continue;
        }
        extended = true;
        path.push((lr, lc));
        taken.push((or, oc));
        if !p.king && lr == far_row(p.team) {
            out.push(path.clone());
        } else {
            jumps_from(b, p, path, taken, out);
        }
        path.pop();
        taken.pop();
    }
    if !extended && path.len() > 1 {
        out.push(path.clone());
    }
}

pub fn naive_moves(s: &CheckersState) -> Vec<String> {
    let b = board_of(s);
    let mut jumps = Vec::new();
    let mut steps = Vec::new();
    for r in 0..8i32 {
        for c in 0..8i32 {
            let Some(p) = b[r as usize][c as usize] else { continue };
            if p.team != s.to_move {
                continue;
            }
            jumps_from(&b, p, &mut vec![(r, c)], &mut Vec::new(), &mut jumps);
            for (dr, dc) in dirs(p) {
                let (nr, nc) = (r + dr, c + dc);
                if inside(nr, nc) && b[nr as usize][nc as usize].is_none() {
                    steps.push(vec![(r, c), (nr, nc)]);
                }
            }
        }
    }
    let (chosen, sep) = if jumps.is_empty() { (steps, "-") } else { (jumps, "x") };
    let mut names: Vec<String> = chosen
        .iter()
        .map(|path| {
            path.iter()
                .map(|&(r, c)| (square_at(r as usize, c as usize).unwrap() + 1).to_string())
                .collect::<Vec<_>>()
                .join(sep)
        })
        .collect();
    names.sort();
    names
}

pub fn fast_moves(g: &Checkers, s: &CheckersState) -> Vec<String> {
    let mut names: Vec<String> = g.legal_actions(s).iter().map(|m| m.notation()).collect();
    names.sort();
    names
}

pub fn naive_perft(g: &Checkers, s: &CheckersState, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let names = naive_moves(s);
    let moves = g.legal_actions(s);
    let mut total = 0;
    for name in names {
        let mv = moves
            .iter()
            .find(|m| m.notation() == name)
            .expect("move known to both generators");
        total += naive_perft(g, &g.apply(s, mv).0, depth - 1);
    }
    total
}
