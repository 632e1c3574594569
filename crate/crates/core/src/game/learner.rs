//! Online learners over a finite strategy set.

use serde::{Deserialize, Serialize};

use crate::error::{configuration, structural, Result};
use crate::mdp::{argmax, normalize_distribution};

/// A mixed strategy over a finite set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexWeights {
    weights: Vec<f64>,
}

impl TryFrom<Vec<f64>> for SimplexWeights {
    type Error = crate::error::LabError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SimplexWeights> for Vec<f64> {
    fn from(w: SimplexWeights) -> Self {
        w.weights
    }
}

impl SimplexWeights {
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(structural("empty strategy set"));
        }
        normalize_distribution(&mut weights, "strategy weights")?;
        Ok(Self { weights })
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            weights: vec![1.0 / k as f64; k],
        }
    }

    pub fn point(k: usize, i: usize) -> Self {
        let mut weights = vec![0.0; k];
        weights[i] = 1.0;
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Heaviest strategy, lowest index on ties.
    pub fn mode(&self) -> usize {
        argmax(&self.weights)
    }

    /// `Some(i)` when all mass sits on strategy `i`.
    pub fn as_point(&self) -> Option<usize> {
        let i = self.mode();
        (self.weights[i] == 1.0).then_some(i)
    }

    /// `sum_i w_i v_i`.
    pub fn expect(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerAlgorithm {
    /// Follow the regularized leader with a negative-entropy regularizer.
    Ftrl,
    MultiplicativeWeights,
    OnlineGradientDescent,
}

/// Step size of an online learner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSize {
    /// Applied to raw payoffs.
    Fixed(f64),
    /// Tuned for a declared number of rounds and payoff width:
    /// `sqrt(8 ln K / N) / width` for MW and FTRL.
    Horizon { rounds: usize, payoff_width: f64 },
}

impl Default for StepSize {
    fn default() -> Self {
        StepSize::Fixed(0.1)
    }
}

impl StepSize {
    fn eta(&self, algorithm: LearnerAlgorithm, k: usize) -> f64 {
        match *self {
            StepSize::Fixed(eta) => eta,
            StepSize::Horizon {
                rounds,
                payoff_width,
            } => {
                let n = rounds.max(1) as f64;
                let w = if payoff_width > 0.0 { payoff_width } else { 1.0 };
                match algorithm {
                    LearnerAlgorithm::OnlineGradientDescent => {
                        (2.0f64).sqrt() / (w * (k as f64 * n).sqrt())
                    }
                    _ => (8.0 * (k.max(2) as f64).ln() / n).sqrt() / w,
                }
            }
        }
    }
}

/// State of a payoff-maximizing online learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineLearnerState {
    pub algorithm: LearnerAlgorithm,
    pub cumulative_payoffs: Vec<f64>,
    pub step_size: StepSize,
    pub round: usize,
    /// Current iterate of gradient descent; unused by the other learners.
    point: Vec<f64>,
}

impl OnlineLearnerState {
    pub fn new(algorithm: LearnerAlgorithm, num_strategies: usize, step_size: StepSize) -> Result<Self> {
        if num_strategies == 0 {
            return Err(configuration("learner needs at least one strategy"));
        }
        let valid = match step_size {
            StepSize::Fixed(eta) => eta > 0.0 && eta.is_finite(),
            StepSize::Horizon {
                rounds,
                payoff_width,
            } => rounds > 0 && payoff_width >= 0.0,
        };
        if !valid {
            return Err(configuration(format!("invalid step size {step_size:?}")));
        }
        Ok(Self {
            algorithm,
            cumulative_payoffs: vec![0.0; num_strategies],
            step_size,
            round: 0,
            point: vec![1.0 / num_strategies as f64; num_strategies],
        })
    }

    pub fn num_strategies(&self) -> usize {
        self.cumulative_payoffs.len()
    }

    /// Mixed strategy for the next round.
    pub fn weights(&self) -> SimplexWeights {
        let k = self.num_strategies();
        match self.algorithm {
            LearnerAlgorithm::OnlineGradientDescent => SimplexWeights {
                weights: self.point.clone(),
            },
            // exp-weights and entropic FTRL share the closed form
            // argmax <c, x> - H(x)/eta = softmax(eta c)
            LearnerAlgorithm::MultiplicativeWeights | LearnerAlgorithm::Ftrl => {
                let eta = self.step_size.eta(self.algorithm, k);
                SimplexWeights {
                    weights: softmax(&self.cumulative_payoffs, eta),
                }
            }
        }
    }

    /// Strategy with the largest cumulative payoff, lowest index on ties.
    pub fn leader(&self) -> usize {
        argmax(&self.cumulative_payoffs)
    }
}

/// Numerically stable `softmax(eta * c)`.
pub fn softmax(c: &[f64], eta: f64) -> Vec<f64> {
    let m = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = c.iter().map(|x| (eta * (x - m)).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (j, &x) in u.iter().enumerate() {
        css += x;
        let candidate = (css - 1.0) / (j + 1) as f64;
        if x - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Feeds one payoff vector to the learner and returns the next strategy.
pub fn no_regret_step(
    mut state: OnlineLearnerState,
    payoff_vector: &[f64],
) -> Result<(OnlineLearnerState, SimplexWeights)> {
    if payoff_vector.len() != state.num_strategies() {
        return Err(structural(format!(
            "payoff vector has {} entries for {} strategies",
            payoff_vector.len(),
            state.num_strategies()
        )));
    }
    if payoff_vector.iter().any(|x| !x.is_finite()) {
        return Err(structural("non-finite payoff"));
    }
    for (c, p) in state.cumulative_payoffs.iter_mut().zip(payoff_vector) {
        *c += p;
    }
    if state.algorithm == LearnerAlgorithm::OnlineGradientDescent {
        let eta = state.step_size.eta(state.algorithm, state.num_strategies());
        let moved: Vec<f64> = state
            .point
            .iter()
            .zip(payoff_vector)
            .map(|(x, g)| x + eta * g)
            .collect();
        state.point = project_simplex(&moved);
    }
    state.round += 1;
    let w = state.weights();
    Ok((state, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mw_closed_form() {
        let s = OnlineLearnerState::new(LearnerAlgorithm::MultiplicativeWeights, 2, StepSize::Fixed(0.5))
            .unwrap();
        let (_, w) = no_regret_step(s, &[1.0, 0.0]).unwrap();
        let e = 0.5f64.exp();
        assert_relative_eq!(w.get(0), e / (e + 1.0), epsilon = 1e-12);
    }

    #[test]
    fn fresh_learners_are_uniform() {
        for alg in [
            LearnerAlgorithm::Ftrl,
            LearnerAlgorithm::MultiplicativeWeights,
            LearnerAlgorithm::OnlineGradientDescent,
        ] {
            let s = OnlineLearnerState::new(alg, 4, StepSize::default()).unwrap();
            assert_eq!(s.weights(), SimplexWeights::uniform(4));
        }
    }

    #[test]
    fn wrong_length_is_structural() {
        let s = OnlineLearnerState::new(LearnerAlgorithm::Ftrl, 3, StepSize::default()).unwrap();
        assert!(matches!(
            no_regret_step(s, &[1.0]),
            Err(crate::error::LabError::Structural(_))
        ));
    }

    #[test]
    fn projection_lands_on_simplex() {
        let p = project_simplex(&[0.9, 0.8, -0.3]);
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(p[0], 0.55, epsilon = 1e-12);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn bad_step_rejected() {
        assert!(OnlineLearnerState::new(LearnerAlgorithm::Ftrl, 2, StepSize::Fixed(0.0)).is_err());
    }
}
