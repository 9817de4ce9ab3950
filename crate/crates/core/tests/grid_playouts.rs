use captype_core::env::exhaustive::optimal_return_memo;
use captype_core::env::grid::Tile;
use captype_core::env::{GridGame, Move, TurnGame};
use captype_core::seeded_rng;
use rand::seq::SliceRandom;

fn playouts(game: &GridGame, n: usize, seed: u64) {
    let mut rng = seeded_rng(seed);
    let horizon = game.config().horizon;
    for _ in 0..n {
        let mut s = game.initial_state();
        let mut total = 0.0;
        let bound = game.return_upper_bound(&s);
        while !game.is_terminal(&s) {
            let actions = game.legal_actions(&s);
            assert!(!actions.is_empty());
            let a = *actions.choose(&mut rng).unwrap();
            let tr = game.step(&s, &a);
            assert_eq!(tr.rewards[1], 0.0, "cooperative grids pay only team 0");
            assert_eq!(tr.state.t, s.t + 1);
            assert_eq!(tr.state.coins & !s.coins, 0, "coins never reappear");
            for avatar in 0..game.n_avatars() {
                let cell = tr.state.pos[avatar] as usize;
                assert_ne!(game.tile(cell), Tile::Wall);
            }
            if game.n_avatars() == 2 {
                assert_ne!(tr.state.pos[0], tr.state.pos[1]);
            }
            if a == Move::Stay {
                assert_eq!(tr.state.pos, s.pos);
            }
            total += tr.rewards[0];
            s = tr.state;
        }
        assert_eq!(s.t as usize, horizon);
        assert!(total <= bound + 1e-9);
    }
}

#[test]
fn wall_of_fire_random_playouts() {
    playouts(&GridGame::wall_of_fire(), 10_000, 5);
}

#[test]
fn narrow_tunnel_random_playouts() {
    playouts(&GridGame::narrow_tunnel(), 10_000, 6);
}

#[test]
fn upper_bound_dominates_optimum_along_a_playout() {
    let game = GridGame::narrow_tunnel();
    let mut rng = seeded_rng(9);
    let mut s = game.initial_state();
    while !game.is_terminal(&s) {
        assert!(optimal_return_memo(&game, &s) <= game.return_upper_bound(&s) + 1e-9);
        let actions = game.legal_actions(&s);
        s = game.step(&s, actions.choose(&mut rng).unwrap()).state;
    }
}
