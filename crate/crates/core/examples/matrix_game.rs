//! Solve small zero-sum games by optimistic self-play.

use filter_lab::game::solve_matrix_game;

fn main() -> filter_lab::error::Result<()> {
    let games = [
        ("rock-paper-scissors", vec![vec![0.0, 1.0, -1.0], vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0]]),
        ("saddle point", vec![vec![3.0, 1.0], vec![4.0, 2.0]]),
        ("matching pennies", vec![vec![1.0, -1.0], vec![-1.0, 1.0]]),
    ];
    for (name, payoff) in games {
        let s = solve_matrix_game(&payoff, 1e-3, 100_000)?;
        println!(
            "{name:<20} row {:?} col {:?} gap {:.2e} after {} rounds",
            s.row.as_slice(),
            s.col.as_slice(),
            s.gap,
            s.rounds
        );
    }
    Ok(())
}
