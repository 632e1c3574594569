//! Seeded random environments for smoke tests and property checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{configuration, Result};
use crate::game::soft_best_response_policy;
use crate::mdp::{optimal_policy, PolicySequence, RewardFn, StationaryPolicy, TabularMdp};
use crate::rng::child_rng;

/// Default cap on `width * height` for random grids.
pub const DEFAULT_GRID_CELL_CAP: usize = 400;

pub const GRID_UP: usize = 0;
pub const GRID_DOWN: usize = 1;
pub const GRID_LEFT: usize = 2;
pub const GRID_RIGHT: usize = 3;

/// Gridworld with its goal, start cell and DP expert.
#[derive(Clone, Debug)]
pub struct RandomGrid {
    pub mdp: TabularMdp,
    pub expert: PolicySequence,
    pub goal: usize,
    pub start: usize,
}

/// 4-action gridworld. With probability `1 - slip` the intended move is
/// made, otherwise a uniformly random direction; walls clip. The goal cell
/// absorbs and pays 1 per step spent there. Goal and start come from `seed`.
pub fn make_random_grid(
    width: usize,
    height: usize,
    horizon: usize,
    slip: f64,
    seed: u64,
) -> Result<RandomGrid> {
    let cells = width.saturating_mul(height);
    if width == 0 || height == 0 || cells < 2 || cells > DEFAULT_GRID_CELL_CAP {
        return Err(configuration(format!(
            "grid {width}x{height} must have between 2 and {DEFAULT_GRID_CELL_CAP} cells"
        )));
    }
    if !(0.0..1.0).contains(&slip) {
        return Err(configuration(format!("slip must be in [0, 1), got {slip}")));
    }
    if horizon == 0 {
        return Err(configuration("grid horizon must be positive"));
    }
    let mut rng = child_rng(seed, 0);
    let goal = rng.gen_range(0..cells);
    let start = loop {
        let s = rng.gen_range(0..cells);
        if s != goal {
            break s;
        }
    };
    let step = |s: usize, dir: usize| -> usize {
        let (x, y) = (s % width, s / width);
        let (nx, ny) = match dir {
            GRID_UP => (x, y.saturating_sub(1)),
            GRID_DOWN => (x, (y + 1).min(height - 1)),
            GRID_LEFT => (x.saturating_sub(1), y),
            _ => ((x + 1).min(width - 1), y),
        };
        ny * width + nx
    };
    let mut rows = Vec::with_capacity(cells * 4);
    let mut values = vec![0.0; cells * 4];
    for s in 0..cells {
        for a in 0..4 {
            if s == goal {
                rows.push(vec![(goal, 1.0)]);
                values[s * 4 + a] = 1.0;
                continue;
            }
            let mut probs = vec![0.0; cells];
            probs[step(s, a)] += 1.0 - slip;
            for dir in 0..4 {
                probs[step(s, dir)] += slip / 4.0;
            }
            rows.push(
                probs
                    .into_iter()
                    .enumerate()
                    .filter(|&(_, p)| p > 0.0)
                    .collect(),
            );
        }
    }
    let reward = RewardFn::new(cells, 4, values)?;
    let mut start_dist = vec![0.0; cells];
    start_dist[start] = 1.0;
    let mdp = TabularMdp::from_sparse(cells, 4, horizon, false, rows, start_dist, Some(reward))?;
    let (expert, _) = optimal_policy(&mdp, mdp.require_true_reward()?)?;
    Ok(RandomGrid {
        mdp,
        expert,
        goal,
        start,
    })
}

/// Small random MDP with a stationary, near-optimal stochastic expert.
#[derive(Clone, Debug)]
pub struct RandomMdp {
    pub mdp: TabularMdp,
    pub expert: StationaryPolicy,
    /// Extra rewards drawn uniformly from `[-1, 1]`.
    pub distractor_rewards: Vec<RewardFn>,
    /// Extra deterministic policies.
    pub distractor_policies: Vec<StationaryPolicy>,
}

fn uniform_reward(num_states: usize, num_actions: usize, rng: &mut impl Rng) -> Result<RewardFn> {
    let values = (0..num_states * num_actions)
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    RewardFn::new(num_states, num_actions, values)
}

/// Random MDP: each `(s, a)` row has up to three successors with random
/// weights; the start distribution is random; the true reward is uniform
/// on `[-1, 1]`. The expert is the first-step slice of the soft-optimal
/// policy at temperature 0.5.
pub fn random_mdp(
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    seed: u64,
) -> Result<RandomMdp> {
    if num_states == 0 || num_actions == 0 || horizon == 0 {
        return Err(configuration("random MDP needs positive |S|, |A| and T"));
    }
    let mut rng = child_rng(seed, 1);
    let states: Vec<usize> = (0..num_states).collect();
    let mut rows = Vec::with_capacity(num_states * num_actions);
    for _ in 0..num_states * num_actions {
        let k = rng.gen_range(1..=num_states.min(3));
        let succ: Vec<usize> = states.choose_multiple(&mut rng, k).copied().collect();
        let w: Vec<f64> = succ.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = w.iter().sum();
        rows.push(succ.into_iter().zip(w.into_iter().map(|x| x / total)).collect());
    }
    let w: Vec<f64> = (0..num_states).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let start = w.into_iter().map(|x| x / total).collect();
    let reward = uniform_reward(num_states, num_actions, &mut rng)?;
    let mdp = TabularMdp::from_sparse(
        num_states,
        num_actions,
        horizon,
        false,
        rows,
        start,
        Some(reward),
    )?;
    let soft = soft_best_response_policy(&mdp, mdp.require_true_reward()?, 0.5)?;
    let expert = soft.at(1).clone();
    let distractor_rewards = (0..3)
        .map(|_| uniform_reward(num_states, num_actions, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let distractor_policies = (0..3)
        .map(|_| {
            let actions: Vec<usize> = (0..num_states)
                .map(|_| rng.gen_range(0..num_actions))
                .collect();
            StationaryPolicy::deterministic(num_actions, &actions)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RandomMdp {
        mdp,
        expert,
        distractor_rewards,
        distractor_policies,
    })
}
