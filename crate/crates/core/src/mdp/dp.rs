//! Exact dynamic-programming oracles: backward evaluation and forward
//! occupancy recursion.

use super::model::TabularMdp;
use super::types::{PolicySequence, RewardFn, StationaryPolicy, VisitationProfile};
use crate::error::Result;

/// State-action values `Q_t(s, a)` and state values `V_t(s)` of a policy
/// sequence under one reward, for `t = 1..=T` (plus `V_{T+1} = 0`).
#[derive(Clone, Debug)]
pub struct ValueTable {
    num_actions: usize,
    q: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl ValueTable {
    /// `Q_t(s, a)`: reward at `(s, a)` plus the continuation value of the
    /// policy from `t + 1` on.
    #[inline]
    pub fn q(&self, t: usize, s: usize, a: usize) -> f64 {
        self.q[t - 1][s * self.num_actions + a]
    }

    #[inline]
    pub fn q_row(&self, t: usize, s: usize) -> &[f64] {
        &self.q[t - 1][s * self.num_actions..(s + 1) * self.num_actions]
    }

    /// `V_t(s)`; `t = T + 1` gives zero.
    #[inline]
    pub fn v(&self, t: usize, s: usize) -> f64 {
        self.v[t - 1][s]
    }
}

/// Backward evaluation of `policy` under `f`.
pub fn evaluate(mdp: &TabularMdp, policy: &PolicySequence, f: &RewardFn) -> Result<ValueTable> {
    mdp.check_policy(policy)?;
    mdp.check_reward(f)?;
    Ok(evaluate_unchecked(mdp, |t| policy.at(t), f))
}

/// Backward evaluation of a stationary policy used at every step.
pub fn evaluate_stationary(
    mdp: &TabularMdp,
    policy: &StationaryPolicy,
    f: &RewardFn,
) -> Result<ValueTable> {
    let seq = PolicySequence::repeat(policy, mdp.horizon());
    evaluate(mdp, &seq, f)
}

pub(crate) fn evaluate_unchecked<'p>(
    mdp: &TabularMdp,
    policy_at: impl Fn(usize) -> &'p StationaryPolicy,
    f: &RewardFn,
) -> ValueTable {
    let (ns, na, horizon) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let mut q = vec![vec![0.0; ns * na]; horizon];
    let mut v = vec![vec![0.0; ns]; horizon + 1];
    for t in (1..=horizon).rev() {
        let (head, tail) = v.split_at_mut(t);
        let next = &tail[0];
        let cur = &mut head[t - 1];
        let pi = policy_at(t);
        for s in 0..ns {
            let mut vs = 0.0;
            for a in 0..na {
                let cont: f64 = mdp.successors(t, s, a).iter().map(|&(sp, p)| p * next[sp]).sum();
                let qa = f.get(s, a) + cont;
                q[t - 1][s * na + a] = qa;
                vs += pi.prob(s, a) * qa;
            }
            cur[s] = vs;
        }
    }
    ValueTable { num_actions: na, q, v }
}

/// `J(pi, f)`: expected cumulative `f` over the horizon, by backward DP.
pub fn exact_policy_value(mdp: &TabularMdp, policy: &PolicySequence, f: &RewardFn) -> Result<f64> {
    let table = evaluate(mdp, policy, f)?;
    Ok(start_value(mdp, &table))
}

pub(crate) fn start_value(mdp: &TabularMdp, table: &ValueTable) -> f64 {
    mdp.start_dist()
        .iter()
        .enumerate()
        .map(|(s, p)| p * table.v(1, s))
        .sum()
}

/// Per-step state-action occupancy of `policy` rolled out from the start
/// distribution.
pub fn exact_visitation(mdp: &TabularMdp, policy: &PolicySequence) -> Result<VisitationProfile> {
    mdp.check_policy(policy)?;
    let (ns, na, horizon) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let mut per_step = Vec::with_capacity(horizon);
    let mut states = mdp.start_dist().to_vec();
    for t in 1..=horizon {
        let pi = policy.at(t);
        let mut joint = vec![0.0; ns * na];
        let mut next = vec![0.0; ns];
        for s in 0..ns {
            if states[s] == 0.0 {
                continue;
            }
            for a in 0..na {
                let m = states[s] * pi.prob(s, a);
                if m == 0.0 {
                    continue;
                }
                joint[s * na + a] = m;
                for &(sp, p) in mdp.successors(t, s, a) {
                    next[sp] += m * p;
                }
            }
        }
        per_step.push(joint);
        states = next;
    }
    VisitationProfile::new(ns, na, per_step)
}

/// `J(pi_E, r) - J(pi, r)` under the MDP's ground-truth reward.
pub fn performance_gap(
    mdp: &TabularMdp,
    expert: &PolicySequence,
    learner: &PolicySequence,
) -> Result<f64> {
    let r = mdp.require_true_reward()?;
    Ok(exact_policy_value(mdp, expert, r)? - exact_policy_value(mdp, learner, r)?)
}

/// Optimal deterministic policy sequence and its value, by hard backward
/// induction (lowest action index on ties).
pub fn optimal_policy(mdp: &TabularMdp, f: &RewardFn) -> Result<(PolicySequence, f64)> {
    mdp.check_reward(f)?;
    let (ns, na, horizon) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let mut next = vec![0.0; ns];
    let mut steps = Vec::with_capacity(horizon);
    for t in (1..=horizon).rev() {
        let mut cur = vec![0.0; ns];
        let mut actions = vec![0; ns];
        for s in 0..ns {
            let mut best = f64::NEG_INFINITY;
            for a in 0..na {
                let qa = f.get(s, a)
                    + mdp.successors(t, s, a).iter().map(|&(sp, p)| p * next[sp]).sum::<f64>();
                if qa > best {
                    best = qa;
                    actions[s] = a;
                }
            }
            cur[s] = best;
        }
        steps.push(StationaryPolicy::deterministic(na, &actions)?);
        next = cur;
    }
    steps.reverse();
    let value = mdp.start_dist().iter().zip(&next).map(|(p, v)| p * v).sum();
    Ok((PolicySequence::new(steps)?, value))
}
