//! Exact payoffs shared by the algorithms and the error accounting.
//!
//! With `Q_f^k` the action values of a continuation `k` under reward `f`,
//! the reset payoff of a stationary `pi` against roll-in `nu` is
//! `(1/T) sum_t E_{s ~ nu^t} sum_a pi(a | s) Q_f^k(t, s, a)`. Rolling in with
//! the expert gives `J_E^k(pi, f)`; the expert's own reset payoff replaces
//! `pi(a | s)` by the expert's action mass.

use crate::error::{configuration, Result};
use crate::mdp::{
    evaluate_unchecked, start_value, PolicySequence, RewardClass, RewardFn, StationaryPolicy,
    TabularMdp, ValueTable, VisitationProfile,
};

/// Reset payoff of `pi` for roll-in state marginals `rollin[t-1][s]`.
pub fn reset_payoff(
    rollin: &[Vec<f64>],
    q: &ValueTable,
    pi: &PolicySequence,
    num_actions: usize,
) -> f64 {
    let horizon = rollin.len();
    let mut total = 0.0;
    for (t0, marg) in rollin.iter().enumerate() {
        let t = t0 + 1;
        let step = pi.at(t);
        for (s, &m) in marg.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let row = q.q_row(t, s);
            total += m * (0..num_actions).map(|a| step.prob(s, a) * row[a]).sum::<f64>();
        }
    }
    total / horizon as f64
}

/// The expert's reset payoff `(1/T) sum_t sum_{s,a} rho_E^t(s, a) Q(t, s, a)`.
pub fn expert_reset_payoff(expert: &VisitationProfile, q: &ValueTable) -> f64 {
    let (horizon, na) = (expert.horizon(), expert.num_actions());
    let mut total = 0.0;
    for t in 1..=horizon {
        for (idx, &m) in expert.at(t).iter().enumerate() {
            if m != 0.0 {
                total += m * q.q(t, idx / na, idx % na);
            }
        }
    }
    total / horizon as f64
}

/// Exact quantities of one problem instance: MDP, expert profile, classes.
#[derive(Clone, Debug)]
pub struct Evaluator<'a> {
    pub mdp: &'a TabularMdp,
    pub expert: &'a VisitationProfile,
    pub rewards: &'a RewardClass,
    /// The policy class, each member repeated over the horizon.
    pub class: Vec<PolicySequence>,
    expert_marginals: Vec<Vec<f64>>,
    expert_values: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        mdp: &'a TabularMdp,
        expert: &'a VisitationProfile,
        rewards: &'a RewardClass,
        class: &[StationaryPolicy],
    ) -> Result<Self> {
        if expert.horizon() != mdp.horizon()
            || expert.num_states() != mdp.num_states()
            || expert.num_actions() != mdp.num_actions()
        {
            return Err(crate::error::structural("expert profile does not match the MDP"));
        }
        for f in rewards.members() {
            mdp.check_reward(f)?;
        }
        let class = class
            .iter()
            .map(|p| {
                let seq = PolicySequence::repeat(p, mdp.horizon());
                mdp.check_policy(&seq).map(|_| seq)
            })
            .collect::<Result<Vec<_>>>()?;
        if class.is_empty() {
            return Err(configuration("empty policy class"));
        }
        let expert_marginals = (1..=mdp.horizon()).map(|t| expert.state_marginal(t)).collect();
        let expert_values = rewards.members().iter().map(|f| expert.dot(f)).collect();
        Ok(Self {
            mdp,
            expert,
            rewards,
            class,
            expert_marginals,
            expert_values,
        })
    }

    pub fn horizon(&self) -> usize {
        self.mdp.horizon()
    }

    pub fn num_rewards(&self) -> usize {
        self.rewards.len()
    }

    pub fn expert_marginals(&self) -> &[Vec<f64>] {
        &self.expert_marginals
    }

    /// `J(pi_E, f_j)` for every member.
    pub fn expert_values(&self) -> &[f64] {
        &self.expert_values
    }

    pub fn value(&self, pi: &PolicySequence, f: &RewardFn) -> f64 {
        start_value(self.mdp, &self.q_table(pi, f))
    }

    pub fn q_table(&self, pi: &PolicySequence, f: &RewardFn) -> ValueTable {
        evaluate_unchecked(self.mdp, |t| pi.at(t), f)
    }

    /// One table per reward member for continuation `pi`.
    pub fn q_tables(&self, pi: &PolicySequence) -> Vec<ValueTable> {
        self.rewards.members().iter().map(|f| self.q_table(pi, f)).collect()
    }

    /// `L(pi, f_j) = J(pi_E, f_j) - J(pi, f_j)` for every member.
    pub fn losses(&self, pi: &PolicySequence) -> Vec<f64> {
        self.rewards
            .members()
            .iter()
            .zip(&self.expert_values)
            .map(|(f, je)| je - self.value(pi, f))
            .collect()
    }

    /// Largest loss over the reward class (the validation error).
    pub fn validation_gap(&self, pi: &PolicySequence) -> f64 {
        self.losses(pi).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// True-reward performance gap, `NaN` if the MDP has no true reward.
    pub fn gap(&self, expert: &PolicySequence, pi: &PolicySequence) -> f64 {
        match self.mdp.true_reward() {
            Some(r) => self.value(expert, r) - self.value(pi, r),
            None => f64::NAN,
        }
    }

    /// `J_E^k(pi, f_j)` for every class member `pi` (rows) and reward
    /// (columns), with continuation tables `q`.
    pub fn reset_matrix(&self, q: &[ValueTable]) -> Vec<Vec<f64>> {
        self.rollin_matrix(&self.expert_marginals, q)
    }

    /// Reset payoffs of every class member against an arbitrary roll-in.
    pub fn rollin_matrix(&self, rollin: &[Vec<f64>], q: &[ValueTable]) -> Vec<Vec<f64>> {
        let na = self.mdp.num_actions();
        self.class
            .iter()
            .map(|pi| q.iter().map(|qj| reset_payoff(rollin, qj, pi, na)).collect())
            .collect()
    }

    /// The expert's reset payoff under each reward.
    pub fn expert_reset_row(&self, q: &[ValueTable]) -> Vec<f64> {
        q.iter().map(|qj| expert_reset_payoff(self.expert, qj)).collect()
    }

    /// `G(pi, f_j) = J_E^k(pi_E, f_j) - J_E^k(pi, f_j)` for an arbitrary `pi`.
    pub fn reset_losses(&self, q: &[ValueTable], pi: &PolicySequence) -> Vec<f64> {
        let na = self.mdp.num_actions();
        q.iter()
            .map(|qj| expert_reset_payoff(self.expert, qj) - reset_payoff(&self.expert_marginals, qj, pi, na))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::make_forked_tree;
    use crate::mdp::exact_visitation;

    #[test]
    fn forked_tree_reset_payoffs() {
        let ft = make_forked_tree().unwrap();
        let rho = exact_visitation(&ft.mdp, &ft.expert).unwrap();
        let ev = Evaluator::new(&ft.mdp, &rho, &ft.reward_class, &ft.policy_class).unwrap();
        let q1 = ev.q_tables(&ev.class[1]);
        let m = ev.reset_matrix(&q1);
        assert_eq!(m[2][1], 2.0);
        assert_eq!(m[0][1], 1.5);
        let qe = ev.q_tables(&ev.class[0]);
        assert_eq!(ev.expert_reset_row(&qe), ev.reset_matrix(&qe)[0]);
    }

    #[test]
    fn losses_of_expert_vanish() {
        let ft = make_forked_tree().unwrap();
        let rho = exact_visitation(&ft.mdp, &ft.expert).unwrap();
        let ev = Evaluator::new(&ft.mdp, &rho, &ft.reward_class, &ft.policy_class).unwrap();
        assert_eq!(ev.losses(&ft.expert), vec![0.0, 0.0]);
        assert_eq!(ev.losses(&ev.class[1]), vec![2.0, 3.0]);
    }
}
