//! The fixed MDP constructions: the exponential-exploration tree, the cliff
//! chain, the three-row "dante" MDP and the forked tree.

use crate::error::{configuration, Result};
use crate::mdp::{PolicySequence, RewardClass, RewardFn, StationaryPolicy, TabularMdp};

/// Default cap on the number of tree leaves `|A|^T`.
pub const DEFAULT_TREE_LEAF_CAP: usize = 1 << 12;

/// Deterministic complete tree plus its expert and classes.
#[derive(Clone, Debug)]
pub struct TreeMdp {
    pub mdp: TabularMdp,
    pub expert: PolicySequence,
    /// Leaf indicators, leaf `k` at index `k` (leftmost first).
    pub reward_class: RewardClass,
    /// Root-to-leaf path policies, leaf `k` at index `k`.
    pub policy_class: Vec<StationaryPolicy>,
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    (0..exp).try_fold(1usize, |acc, _| acc.checked_mul(base))
}

/// Tree of branching `|A|` and depth `T`; see [`make_tree_capped`].
pub fn make_tree(branching: usize, horizon: usize) -> Result<TreeMdp> {
    make_tree_capped(branching, horizon, DEFAULT_TREE_LEAF_CAP)
}

/// Complete `|A|`-ary tree with deterministic dynamics. Acting happens at
/// depths `0..T`; leaves at depth `T` are absorbing. The only rewards are
/// leaf-arrival indicators, encoded on the edge into the leaf. The expert
/// always takes action 0 and the true reward pays for the leftmost leaf.
pub fn make_tree_capped(branching: usize, horizon: usize, leaf_cap: usize) -> Result<TreeMdp> {
    if branching < 2 || horizon < 1 {
        return Err(configuration(format!(
            "tree needs |A| >= 2 and T >= 1, got |A|={branching}, T={horizon}"
        )));
    }
    let leaves = checked_pow(branching, horizon)
        .filter(|&n| n <= leaf_cap)
        .ok_or_else(|| {
            configuration(format!(
                "tree with |A|^T = {branching}^{horizon} leaves exceeds the cap of {leaf_cap}"
            ))
        })?;
    let offsets: Vec<usize> = (0..=horizon)
        .scan(0usize, |acc, d| {
            let off = *acc;
            *acc += branching.pow(d as u32);
            Some(off)
        })
        .collect();
    let num_states = offsets[horizon] + leaves;
    let mut rows = Vec::with_capacity(num_states * branching);
    for d in 0..=horizon {
        for i in 0..branching.pow(d as u32) {
            for a in 0..branching {
                let next = if d < horizon {
                    offsets[d + 1] + i * branching + a
                } else {
                    offsets[d] + i
                };
                rows.push(vec![(next, 1.0)]);
            }
        }
    }
    let mut start = vec![0.0; num_states];
    start[0] = 1.0;

    let parent_depth = horizon - 1;
    let leaf_indicator = |k: usize| -> Result<RewardFn> {
        let mut values = vec![0.0; num_states * branching];
        let parent = offsets[parent_depth] + k / branching;
        values[parent * branching + k % branching] = 1.0;
        RewardFn::new(num_states, branching, values)
    };
    let members = (0..leaves).map(leaf_indicator).collect::<Result<Vec<_>>>()?;
    let reward_class = RewardClass::new(members)?;
    let mdp = TabularMdp::from_sparse(
        num_states,
        branching,
        horizon,
        false,
        rows,
        start,
        Some(reward_class.get(0).clone()),
    )?;

    let policy_class = (0..leaves)
        .map(|k| {
            let mut actions = vec![0; num_states];
            // digits of k, most significant first, give the path actions
            let mut node = 0usize;
            for d in 0..horizon {
                let digit = (k / branching.pow((horizon - 1 - d) as u32)) % branching;
                actions[offsets[d] + node] = digit;
                node = node * branching + digit;
            }
            StationaryPolicy::deterministic(branching, &actions)
        })
        .collect::<Result<Vec<_>>>()?;
    let expert = PolicySequence::repeat(&policy_class[0], horizon);
    Ok(TreeMdp {
        mdp,
        expert,
        reward_class,
        policy_class,
    })
}

/// The cliff chain `s_0 .. s_T` with absorbing cliff state `s_x`.
#[derive(Clone, Debug)]
pub struct CliffMdp {
    pub mdp: TabularMdp,
    pub expert: PolicySequence,
    /// The singleton class `{r}` with `r(s, a) = -1[s = s_x] - 1[a = a_2]`.
    pub reward_class: RewardClass,
}

/// Index of the cliff state `s_x` in a cliff MDP of horizon `T`.
pub fn cliff_state(horizon: usize) -> usize {
    horizon + 1
}

/// Cliff MDP: `a_1` (action 0) advances along the chain, `a_2` (action 1)
/// falls into `s_x`, which absorbs under every action. The expert always
/// takes `a_1`, so `J(pi_E, r) = 0`.
pub fn make_cliff(horizon: usize) -> Result<CliffMdp> {
    if horizon < 2 {
        return Err(configuration(format!("cliff needs T >= 2, got {horizon}")));
    }
    let sx = cliff_state(horizon);
    let num_states = horizon + 2;
    let mut rows = Vec::with_capacity(num_states * 2);
    let mut values = vec![0.0; num_states * 2];
    for s in 0..num_states {
        if s == sx {
            rows.push(vec![(sx, 1.0)]);
            rows.push(vec![(sx, 1.0)]);
        } else {
            rows.push(vec![((s + 1).min(horizon), 1.0)]);
            rows.push(vec![(sx, 1.0)]);
        }
        let cliff = if s == sx { -1.0 } else { 0.0 };
        values[s * 2] = cliff;
        values[s * 2 + 1] = cliff - 1.0;
    }
    let r = RewardFn::with_bound(num_states, 2, values, 2.0)?;
    let mut start = vec![0.0; num_states];
    start[0] = 1.0;
    let mdp = TabularMdp::from_sparse(num_states, 2, horizon, false, rows, start, Some(r.clone()))?;
    let expert = PolicySequence::repeat(&StationaryPolicy::constant(num_states, 2, 0)?, horizon);
    Ok(CliffMdp {
        mdp,
        expert,
        reward_class: RewardClass::new(vec![r])?,
    })
}

/// Takes `a_2` in `s_0` with probability `p` and `a_1` everywhere else.
pub fn cliff_slip_policy(horizon: usize, p: f64) -> Result<StationaryPolicy> {
    let num_states = horizon + 2;
    let mut probs = Vec::with_capacity(num_states * 2);
    for s in 0..num_states {
        if s == 0 {
            probs.extend([1.0 - p, p]);
        } else {
            probs.extend([1.0, 0.0]);
        }
    }
    StationaryPolicy::new(num_states, 2, probs)
}

/// The lower-bound witness: `a_2` in `s_0` with probability `eps * T`.
pub fn cliff_adversarial_policy(horizon: usize, eps: f64) -> Result<StationaryPolicy> {
    let p = eps * horizon as f64;
    if !(0.0..=1.0).contains(&p) {
        return Err(configuration(format!("eps * T = {p} must lie in [0, 1]")));
    }
    cliff_slip_policy(horizon, p)
}

/// Small policy class used by runs on the cliff: always `a_1` (the expert),
/// `a_2` only in `s_0`, always `a_2`, and uniform.
pub fn cliff_policy_class(horizon: usize) -> Result<Vec<StationaryPolicy>> {
    let ns = horizon + 2;
    Ok(vec![
        StationaryPolicy::constant(ns, 2, 0)?,
        cliff_slip_policy(horizon, 1.0)?,
        StationaryPolicy::constant(ns, 2, 1)?,
        StationaryPolicy::uniform(ns, 2),
    ])
}

pub const DANTE_UP: usize = 0;
pub const DANTE_STRAIGHT: usize = 1;
pub const DANTE_DOWN: usize = 2;

/// Three-row MDP with one column per timestep.
#[derive(Clone, Debug)]
pub struct DanteMdp {
    pub mdp: TabularMdp,
    pub expert: PolicySequence,
    /// 1 for arriving in the top two rows, 0 for the bottom row.
    pub reward: RewardFn,
}

/// State id of `(column, row)` in a dante MDP; rows are 0 (top), 1, 2.
pub fn dante_state(column: usize, row: usize) -> usize {
    column * 3 + row
}

/// Dante MDP: rows top/center/bottom, columns `0..T`, actions up / straight
/// / down clipped at the boundary rows. Each step moves one column right
/// (the last column stays put). The expert goes straight along the center.
pub fn make_dante(horizon: usize) -> Result<DanteMdp> {
    if horizon < 3 {
        return Err(configuration(format!("dante needs T >= 3, got {horizon}")));
    }
    let num_states = 3 * horizon;
    let mut rows = Vec::with_capacity(num_states * 3);
    let mut values = vec![0.0; num_states * 3];
    for col in 0..horizon {
        for row in 0..3 {
            let s = dante_state(col, row);
            for a in 0..3 {
                let next_row = match a {
                    DANTE_UP => row.saturating_sub(1),
                    DANTE_STRAIGHT => row,
                    _ => (row + 1).min(2),
                };
                let next_col = (col + 1).min(horizon - 1);
                rows.push(vec![(dante_state(next_col, next_row), 1.0)]);
                values[s * 3 + a] = if next_row < 2 { 1.0 } else { 0.0 };
            }
        }
    }
    let reward = RewardFn::new(num_states, 3, values)?;
    let mut start = vec![0.0; num_states];
    start[dante_state(0, 1)] = 1.0;
    let mdp =
        TabularMdp::from_sparse(num_states, 3, horizon, false, rows, start, Some(reward.clone()))?;
    let expert = PolicySequence::repeat(
        &StationaryPolicy::constant(num_states, 3, DANTE_STRAIGHT)?,
        horizon,
    );
    Ok(DanteMdp {
        mdp,
        expert,
        reward,
    })
}

/// Constant-action class `{up, straight, down}`.
pub fn dante_policy_class(horizon: usize) -> Result<Vec<StationaryPolicy>> {
    (0..3)
        .map(|a| StationaryPolicy::constant(3 * horizon, 3, a))
        .collect()
}

/// Straight everywhere except timestep 2, where the policy goes down with
/// probability `eps * T`. The entry at `t = 1` is straight and is meant to
/// be replaced by the learner.
pub fn dante_erring_suffix(horizon: usize, eps: f64) -> Result<PolicySequence> {
    let p = eps * horizon as f64;
    if !(0.0..=1.0).contains(&p) {
        return Err(configuration(format!("eps * T = {p} must lie in [0, 1]")));
    }
    let ns = 3 * horizon;
    let straight = StationaryPolicy::constant(ns, 3, DANTE_STRAIGHT)?;
    let erring = StationaryPolicy::new(
        ns,
        3,
        (0..ns).flat_map(|_| [0.0, 1.0 - p, p]).collect(),
    )?;
    PolicySequence::repeat(&straight, horizon).with_step(2, erring)
}

pub const FORK_LEFT: usize = 0;
pub const FORK_CENTER: usize = 1;
pub const FORK_RIGHT: usize = 2;

/// Depth-2 ternary tree with the two competing rewards.
#[derive(Clone, Debug)]
pub struct ForkedTreeMdp {
    pub mdp: TabularMdp,
    pub expert: PolicySequence,
    /// `[r, r~]`.
    pub reward_class: RewardClass,
    /// `[pi_E, pi_1, pi_2]`: always left, always center, always right.
    pub policy_class: Vec<StationaryPolicy>,
}

/// State ids: root 0, depth-1 children `1 + c` for `c` in left/center/right,
/// leaves `4 + 3c + a`.
pub fn forked_state(path: &[usize]) -> usize {
    match path {
        [] => 0,
        [c] => 1 + c,
        [c, a] => 4 + 3 * c + a,
        _ => panic!("forked tree has depth 2"),
    }
}

/// The forked tree. Arrival rewards sit on the incoming edge:
/// under `r` the left child pays 2; under `r~` the left child pays 2, its
/// left leaf 1, and the center-right and right-center leaves 4 each.
pub fn make_forked_tree() -> Result<ForkedTreeMdp> {
    let num_states = 13;
    let mut rows = Vec::with_capacity(num_states * 3);
    for s in 0..num_states {
        for a in 0..3 {
            let next = match s {
                0 => forked_state(&[a]),
                1..=3 => forked_state(&[s - 1, a]),
                _ => s,
            };
            rows.push(vec![(next, 1.0)]);
        }
    }
    let mut start = vec![0.0; num_states];
    start[0] = 1.0;
    let edge = |s: usize, a: usize| s * 3 + a;
    let mut r = vec![0.0; num_states * 3];
    r[edge(0, FORK_LEFT)] = 2.0;
    let mut r_tilde = r.clone();
    r_tilde[edge(forked_state(&[FORK_LEFT]), FORK_LEFT)] = 1.0;
    r_tilde[edge(forked_state(&[FORK_CENTER]), FORK_RIGHT)] = 4.0;
    r_tilde[edge(forked_state(&[FORK_RIGHT]), FORK_CENTER)] = 4.0;
    let r = RewardFn::with_bound(num_states, 3, r, 4.0)?;
    let r_tilde = RewardFn::with_bound(num_states, 3, r_tilde, 4.0)?;
    let mdp = TabularMdp::from_sparse(num_states, 3, 2, false, rows, start, Some(r.clone()))?;
    let policy_class = (0..3)
        .map(|a| StationaryPolicy::constant(num_states, 3, a))
        .collect::<Result<Vec<_>>>()?;
    let expert = PolicySequence::repeat(&policy_class[0], 2);
    Ok(ForkedTreeMdp {
        mdp,
        expert,
        reward_class: RewardClass::new(vec![r, r_tilde])?,
        policy_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{exact_policy_value, exact_visitation, performance_gap};

    #[test]
    fn tree_counts() {
        let tree = make_tree(2, 3).unwrap();
        assert_eq!(tree.mdp.num_states(), 15);
        assert_eq!(tree.reward_class.len(), 8);
        assert_eq!(tree.policy_class.len(), 8);
    }

    #[test]
    fn tree_cap_names_the_size() {
        let err = make_tree_capped(3, 9, 1000).unwrap_err();
        assert!(err.to_string().contains("3^9"), "{err}");
    }

    #[test]
    fn tree_rejects_bad_params() {
        assert!(make_tree(1, 3).is_err());
        assert!(make_tree(2, 0).is_err());
    }

    #[test]
    fn cliff_expert_value_zero() {
        let c = make_cliff(6).unwrap();
        let r = c.mdp.true_reward().unwrap();
        assert_eq!(exact_policy_value(&c.mdp, &c.expert, r).unwrap(), 0.0);
    }

    #[test]
    fn cliff_falling_at_start_costs_horizon() {
        let t = 7;
        let c = make_cliff(t).unwrap();
        let fall = PolicySequence::repeat(&cliff_slip_policy(t, 1.0).unwrap(), t);
        assert_eq!(performance_gap(&c.mdp, &c.expert, &fall).unwrap(), t as f64);
    }

    #[test]
    fn cliff_visitation_follows_the_chain() {
        let c = make_cliff(5).unwrap();
        let rho = exact_visitation(&c.mdp, &c.expert).unwrap();
        for t in 1..=5 {
            assert_eq!(rho.mass(t, t - 1, 0), 1.0);
        }
    }

    #[test]
    fn dante_expert_stays_center() {
        let d = make_dante(5).unwrap();
        let rho = exact_visitation(&d.mdp, &d.expert).unwrap();
        for t in 1..=5 {
            assert_eq!(rho.mass(t, dante_state(t - 1, 1), DANTE_STRAIGHT), 1.0);
        }
        assert_eq!(performance_gap(&d.mdp, &d.expert, &d.expert).unwrap(), 0.0);
    }

    #[test]
    fn dante_rejects_short_horizon() {
        assert!(make_dante(2).is_err());
    }

    #[test]
    fn forked_tree_values() {
        let ft = make_forked_tree().unwrap();
        let r = ft.reward_class.get(0);
        assert_eq!(exact_policy_value(&ft.mdp, &ft.expert, r).unwrap(), 2.0);
        let pi1 = PolicySequence::repeat(&ft.policy_class[1], 2);
        assert_eq!(exact_policy_value(&ft.mdp, &pi1, r).unwrap(), 0.0);
    }
}
