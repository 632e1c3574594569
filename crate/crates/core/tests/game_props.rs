//! Regret bounds of the online learners and equilibrium quality of the
//! matrix-game solver.

use proptest::prelude::*;

use filter_lab::game::{
    no_regret_step, project_simplex, solve_matrix_game, LearnerAlgorithm, OnlineLearnerState,
    StepSize,
};

fn payoff_sequence() -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
    (2usize..=5, 5usize..=60).prop_flat_map(|(k, n)| {
        (
            Just(k),
            proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, k), n),
        )
    })
}

/// External regret of `alg` tuned for the sequence length.
fn regret(alg: LearnerAlgorithm, k: usize, seq: &[Vec<f64>]) -> f64 {
    let step = StepSize::Horizon {
        rounds: seq.len(),
        payoff_width: 1.0,
    };
    let mut state = OnlineLearnerState::new(alg, k, step).unwrap();
    let mut w = state.weights();
    let mut earned = 0.0;
    let mut totals = vec![0.0; k];
    for p in seq {
        earned += w.expect(p);
        for (t, x) in totals.iter_mut().zip(p) {
            *t += x;
        }
        let (next, nw) = no_regret_step(state, p).unwrap();
        state = next;
        w = nw;
    }
    totals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - earned
}

/// Value of a 2-row game where the row player minimizes, by checking every
/// breakpoint of the upper envelope.
fn two_row_value(a: &[Vec<f64>]) -> f64 {
    let ncols = a[0].len();
    let upper = |x: f64| (0..ncols).map(|j| x * a[0][j] + (1.0 - x) * a[1][j]).fold(f64::NEG_INFINITY, f64::max);
    let mut candidates = vec![0.0, 1.0];
    for i in 0..ncols {
        for j in i + 1..ncols {
            let (si, sj) = (a[0][i] - a[1][i], a[0][j] - a[1][j]);
            if (si - sj).abs() > 1e-12 {
                let x = (a[1][j] - a[1][i]) / (si - sj);
                if (0.0..=1.0).contains(&x) {
                    candidates.push(x);
                }
            }
        }
    }
    candidates.into_iter().map(upper).fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exponential_weights_regret_bound((k, seq) in payoff_sequence()) {
        let bound = (seq.len() as f64 * (k as f64).ln() / 2.0).sqrt();
        for alg in [LearnerAlgorithm::MultiplicativeWeights, LearnerAlgorithm::Ftrl] {
            prop_assert!(regret(alg, k, &seq) <= bound + 1e-9);
        }
    }

    #[test]
    fn gradient_descent_regret_bound((k, seq) in payoff_sequence()) {
        let bound = (2.0 * k as f64 * seq.len() as f64).sqrt();
        prop_assert!(regret(LearnerAlgorithm::OnlineGradientDescent, k, &seq) <= bound + 1e-9);
    }

    #[test]
    fn weights_stay_on_the_simplex((k, seq) in payoff_sequence()) {
        for alg in [
            LearnerAlgorithm::MultiplicativeWeights,
            LearnerAlgorithm::Ftrl,
            LearnerAlgorithm::OnlineGradientDescent,
        ] {
            let mut state = OnlineLearnerState::new(alg, k, StepSize::Fixed(0.7)).unwrap();
            for p in &seq {
                let (next, w) = no_regret_step(state, p).unwrap();
                prop_assert!(w.as_slice().iter().all(|x| *x >= 0.0));
                prop_assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-9);
                state = next;
            }
        }
    }

    #[test]
    fn projection_is_idempotent(v in proptest::collection::vec(-3.0f64..3.0, 1..6)) {
        let p = project_simplex(&v);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let q = project_simplex(&p);
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn solver_brackets_the_game_value(
        a in (2usize..=4).prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, n), 2))
    ) {
        let eps = 1e-3;
        let s = solve_matrix_game(&a, eps, 200_000).unwrap();
        let x = s.row.as_slice();
        let y = s.col.as_slice();
        let ncols = a[0].len();
        let row_guarantee = (0..ncols).map(|j| x[0] * a[0][j] + x[1] * a[1][j]).fold(f64::NEG_INFINITY, f64::max);
        let col_guarantee = a
            .iter()
            .map(|r| r.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let v = two_row_value(&a);
        prop_assert!(col_guarantee <= v + 1e-9 && v <= row_guarantee + 1e-9);
        prop_assert!(row_guarantee - col_guarantee <= eps + 1e-9);
        prop_assert!((s.gap - (row_guarantee - col_guarantee)).abs() < 1e-9);
    }
}

#[test]
fn matching_pennies_is_uniform() {
    let s = solve_matrix_game(&[vec![1.0, -1.0], vec![-1.0, 1.0]], 1e-4, 100_000).unwrap();
    for w in [s.row.as_slice(), s.col.as_slice()] {
        assert!((w[0] - 0.5).abs() < 1e-3);
    }
}
