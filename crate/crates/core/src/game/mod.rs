//! Equilibrium machinery: online learners, best-response oracles and a
//! zero-sum matrix game solver.

mod explore;
mod learner;
mod matrix;
mod oracles;

pub use explore::{explore_best_response, ExplorationConfig};
pub use learner::{
    no_regret_step, project_simplex, softmax, LearnerAlgorithm, OnlineLearnerState,
    SimplexWeights, StepSize,
};
pub use matrix::{duality_gap, solve_matrix_game, MatrixGameSolution};
pub use oracles::{
    best_response_reward, class_best_response, soft_best_response_policy, BestResponse,
};
