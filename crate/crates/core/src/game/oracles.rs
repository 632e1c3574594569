//! Best-response oracles for both players.

use crate::error::{configuration, structural, Result};
use crate::mdp::{
    argmax, evaluate_unchecked, start_value, PolicySequence, RewardClass, RewardFn,
    StationaryPolicy, TabularMdp, VisitationProfile,
};

/// Soft (entropy-regularized) value iteration:
/// `V_t(s) = tau * log sum_a exp(Q_t(s, a) / tau)` and
/// `pi_t(a | s) = exp((Q_t(s, a) - V_t(s)) / tau)`.
pub fn soft_best_response_policy(
    mdp: &TabularMdp,
    f: &RewardFn,
    temperature: f64,
) -> Result<PolicySequence> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(configuration(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    mdp.check_reward(f)?;
    let (ns, na, horizon) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let mut next = vec![0.0; ns];
    let mut steps = Vec::with_capacity(horizon);
    let mut q = vec![0.0; na];
    for t in (1..=horizon).rev() {
        let mut cur = vec![0.0; ns];
        let mut probs = vec![0.0; ns * na];
        for s in 0..ns {
            for (a, qa) in q.iter_mut().enumerate() {
                *qa = f.get(s, a)
                    + mdp
                        .successors(t, s, a)
                        .iter()
                        .map(|&(sp, p)| p * next[sp])
                        .sum::<f64>();
            }
            let m = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = q.iter().map(|x| ((x - m) / temperature).exp()).sum();
            cur[s] = m + temperature * z.ln();
            for a in 0..na {
                probs[s * na + a] = ((q[a] - m) / temperature).exp() / z;
            }
        }
        steps.push(StationaryPolicy::new(ns, na, probs)?);
        next = cur;
    }
    steps.reverse();
    PolicySequence::new(steps)
}

/// Result of a best-response search over a finite class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BestResponse {
    pub index: usize,
    pub value: f64,
}

/// Reward maximizing `sum_t E_{rho_E^t}[f] - sum_t E_{rho_pi^t}[f]`.
pub fn best_response_reward(
    learner_profile: &VisitationProfile,
    expert_profile: &VisitationProfile,
    class: &RewardClass,
) -> Result<BestResponse> {
    if class.is_empty() {
        return Err(configuration("empty reward class"));
    }
    if learner_profile.horizon() != expert_profile.horizon()
        || learner_profile.num_states() != expert_profile.num_states()
        || learner_profile.num_actions() != expert_profile.num_actions()
    {
        return Err(structural("learner and expert profiles differ in shape"));
    }
    let values: Vec<f64> = class
        .members()
        .iter()
        .map(|f| expert_profile.dot(f) - learner_profile.dot(f))
        .collect();
    let index = argmax(&values);
    Ok(BestResponse {
        index,
        value: values[index],
    })
}

/// Class member maximizing `J(pi, f)` by exact DP.
pub fn class_best_response(
    mdp: &TabularMdp,
    class: &[StationaryPolicy],
    f: &RewardFn,
) -> Result<BestResponse> {
    if class.is_empty() {
        return Err(configuration("empty policy class"));
    }
    mdp.check_reward(f)?;
    let values = class
        .iter()
        .map(|pi| {
            if pi.num_states() != mdp.num_states() || pi.num_actions() != mdp.num_actions() {
                return Err(structural("policy shape differs from MDP"));
            }
            Ok(start_value(mdp, &evaluate_unchecked(mdp, |_| pi, f)))
        })
        .collect::<Result<Vec<_>>>()?;
    let index = argmax(&values);
    Ok(BestResponse {
        index,
        value: values[index],
    })
}
