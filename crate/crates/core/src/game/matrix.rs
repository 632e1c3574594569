//! Zero-sum matrix games by no-regret self-play.
//!
//! Convention: the row player minimizes `x^T A y`, the column player
//! maximizes it.

use serde::{Deserialize, Serialize};

use super::learner::{softmax, SimplexWeights};
use crate::error::{configuration, structural, Result};

/// Approximate equilibrium returned by [`solve_matrix_game`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixGameSolution {
    pub row: SimplexWeights,
    pub col: SimplexWeights,
    /// `max_j (x^T A)_j - min_i (A y)_i` at the returned pair.
    pub gap: f64,
    /// Self-play rounds used (0 when a pure saddle point was found).
    pub rounds: usize,
}

/// Duality gap of a strategy pair.
pub fn duality_gap(payoff: &[Vec<f64>], row: &[f64], col: &[f64]) -> f64 {
    let ncols = payoff[0].len();
    let best_col = (0..ncols)
        .map(|j| payoff.iter().zip(row).map(|(r, x)| x * r[j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let best_row = payoff
        .iter()
        .map(|r| r.iter().zip(col).map(|(a, y)| a * y).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    best_col - best_row
}

fn pure_saddle(payoff: &[Vec<f64>]) -> Option<(usize, usize)> {
    let ncols = payoff[0].len();
    for (i, row) in payoff.iter().enumerate() {
        for j in 0..ncols {
            let row_max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let col_min = payoff.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
            if row[j] == row_max && row[j] == col_min {
                return Some((i, j));
            }
        }
    }
    None
}

/// Solves a zero-sum game to duality gap `epsilon` by optimistic
/// multiplicative-weights self-play, or returns the best pair seen within
/// `max_rounds`. Pure saddle points are returned directly.
pub fn solve_matrix_game(
    payoff: &[Vec<f64>],
    epsilon: f64,
    max_rounds: usize,
) -> Result<MatrixGameSolution> {
    if !(epsilon > 0.0) {
        return Err(configuration("game epsilon must be positive"));
    }
    let nrows = payoff.len();
    let ncols = payoff.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 || payoff.iter().any(|r| r.len() != ncols) {
        return Err(structural("payoff matrix must be a nonempty rectangle"));
    }
    if payoff.iter().flatten().any(|x| !x.is_finite()) {
        return Err(structural("payoff matrix has non-finite entries"));
    }
    if let Some((i, j)) = pure_saddle(payoff) {
        return Ok(MatrixGameSolution {
            row: SimplexWeights::point(nrows, i),
            col: SimplexWeights::point(ncols, j),
            gap: 0.0,
            rounds: 0,
        });
    }
    let lo = payoff.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let hi = payoff.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    let eta = 0.25 / (hi - lo);

    // cumulative payoffs (row player's are negated costs)
    let mut row_cum = vec![0.0; nrows];
    let mut col_cum = vec![0.0; ncols];
    let mut row_last = vec![0.0; nrows];
    let mut col_last = vec![0.0; ncols];
    let mut row_avg = vec![0.0; nrows];
    let mut col_avg = vec![0.0; ncols];
    let mut best = (f64::INFINITY, vec![], vec![]);
    let mut rounds = 0;
    while rounds < max_rounds {
        let predicted_row: Vec<f64> = row_cum.iter().zip(&row_last).map(|(c, l)| c + l).collect();
        let predicted_col: Vec<f64> = col_cum.iter().zip(&col_last).map(|(c, l)| c + l).collect();
        let x = softmax(&predicted_row, eta);
        let y = softmax(&predicted_col, eta);
        for i in 0..nrows {
            row_last[i] = -payoff[i].iter().zip(&y).map(|(a, yj)| a * yj).sum::<f64>();
            row_cum[i] += row_last[i];
        }
        for j in 0..ncols {
            col_last[j] = payoff.iter().zip(&x).map(|(r, xi)| r[j] * xi).sum::<f64>();
            col_cum[j] += col_last[j];
        }
        rounds += 1;
        let k = rounds as f64;
        for (a, v) in row_avg.iter_mut().zip(&x) {
            *a += (v - *a) / k;
        }
        for (a, v) in col_avg.iter_mut().zip(&y) {
            *a += (v - *a) / k;
        }
        if rounds % 10 == 0 || rounds == max_rounds {
            let gap = duality_gap(payoff, &row_avg, &col_avg);
            if gap < best.0 {
                best = (gap, row_avg.clone(), col_avg.clone());
            }
            if gap <= epsilon {
                break;
            }
        }
    }
    if best.1.is_empty() {
        let gap = duality_gap(payoff, &row_avg, &col_avg);
        best = (gap, row_avg, col_avg);
    }
    Ok(MatrixGameSolution {
        row: SimplexWeights::new(best.1)?,
        col: SimplexWeights::new(best.2)?,
        gap: best.0,
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_is_immediate() {
        let s = solve_matrix_game(&[vec![3.5]], 0.01, 10).unwrap();
        assert_eq!(s.gap, 0.0);
        assert_eq!(s.rounds, 0);
    }

    #[test]
    fn matching_pennies() {
        let a = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let s = solve_matrix_game(&a, 0.01, 100_000).unwrap();
        assert!(s.gap <= 0.01, "gap {}", s.gap);
        for w in [s.row.get(0), s.col.get(0)] {
            assert!((w - 0.5).abs() <= 0.02, "{w}");
        }
    }

    #[test]
    fn non_finite_rejected() {
        assert!(solve_matrix_game(&[vec![f64::NAN]], 0.1, 10).is_err());
        assert!(solve_matrix_game(&[vec![1.0], vec![]], 0.1, 10).is_err());
    }

    #[test]
    fn reported_gap_is_recomputable() {
        let a = vec![vec![0.3, -0.7, 0.2], vec![-0.1, 0.4, -0.6], vec![0.5, 0.0, -0.2]];
        let s = solve_matrix_game(&a, 1e-3, 20_000).unwrap();
        let gap = duality_gap(&a, s.row.as_slice(), s.col.as_slice());
        assert!(gap <= s.gap + 1e-9);
    }
}
