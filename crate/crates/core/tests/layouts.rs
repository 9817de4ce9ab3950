use captype_core::env::exhaustive::{grid_optimum, optimal_return_memo};
use captype_core::env::{GridConfig, GridGame, TurnGame};

#[test]
fn wall_of_fire_optimum() {
    assert_eq!(grid_optimum(&GridGame::wall_of_fire()), 1490.0);
}

#[test]
fn narrow_tunnel_optima() {
    let red = GridGame::narrow_tunnel();
    assert_eq!(optimal_return_memo(&red, &red.initial_state()), 90.0);
    let blue = GridGame::new(GridConfig::narrow_tunnel().with_coin_value('C', 0.0)).unwrap();
    assert_eq!(optimal_return_memo(&blue, &blue.initial_state()), 4.0);
}

#[test]
fn narrow_tunnel_admits_one_crossing() {
    // With blue coins worth far more than red ones, the best play sends blue
    // through first. Red then cannot reach a coin before the horizon.
    let g = GridGame::new(GridConfig::narrow_tunnel().with_coin_value('c', 100.0)).unwrap();
    assert_eq!(optimal_return_memo(&g, &g.initial_state()), 400.0);
}

#[test]
fn novice_sight_lines() {
    // Blue reaches its nearest coin in 5 moves and red needs 7, so a depth-10
    // lookahead (5 own moves) sees blue's coins but not red's.
    let g = GridGame::narrow_tunnel();
    let s = g.initial_state();
    assert_eq!(g.nearest_coin_distance(&s, 0), Some(5));
    assert_eq!(g.nearest_coin_distance(&s, 1), Some(7));
}
