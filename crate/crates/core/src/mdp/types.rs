use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{configuration, structural, Result};

/// Tolerance used when validating probability vectors.
pub const PROB_TOL: f64 = 1e-9;

/// Checks that `v` is a distribution (nonnegative, sums to 1 within
/// [`PROB_TOL`]) and renormalizes it in place.
pub(crate) fn normalize_distribution(v: &mut [f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(structural(format!("{what}: empty distribution")));
    }
    let mut sum = 0.0;
    for &p in v.iter() {
        if !p.is_finite() || p < 0.0 {
            return Err(structural(format!("{what}: invalid probability {p}")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(structural(format!("{what}: sums to {sum}, expected 1")));
    }
    // leave already-normalized input bit-exact so reloading is idempotent
    if (sum - 1.0).abs() > 1e-12 {
        for p in v.iter_mut() {
            *p /= sum;
        }
    }
    Ok(())
}

/// A reward (or discriminator) function `f(s, a)` with a declared bound on
/// its magnitude. The bound defaults to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RewardDoc", into = "RewardDoc")]
pub struct RewardFn {
    num_states: usize,
    num_actions: usize,
    values: Vec<f64>,
    bound: f64,
}

#[derive(Serialize, Deserialize)]
struct RewardDoc {
    values: Vec<Vec<f64>>,
    #[serde(default = "unit_bound", skip_serializing_if = "is_unit_bound")]
    bound: f64,
}

fn unit_bound() -> f64 {
    1.0
}

fn is_unit_bound(b: &f64) -> bool {
    *b == 1.0
}

impl TryFrom<RewardDoc> for RewardFn {
    type Error = crate::error::LabError;
    fn try_from(doc: RewardDoc) -> Result<Self> {
        RewardFn::from_rows_with_bound(&doc.values, doc.bound)
    }
}

impl From<RewardFn> for RewardDoc {
    fn from(f: RewardFn) -> Self {
        RewardDoc {
            values: f.rows(),
            bound: f.bound,
        }
    }
}

impl RewardFn {
    /// A reward with values in `[-1, 1]`.
    pub fn new(num_states: usize, num_actions: usize, values: Vec<f64>) -> Result<Self> {
        Self::with_bound(num_states, num_actions, values, 1.0)
    }

    /// A reward with values in `[-bound, bound]`.
    pub fn with_bound(
        num_states: usize,
        num_actions: usize,
        values: Vec<f64>,
        bound: f64,
    ) -> Result<Self> {
        if values.len() != num_states * num_actions {
            return Err(structural(format!(
                "reward has {} entries, expected {}x{}",
                values.len(),
                num_states,
                num_actions
            )));
        }
        if !(bound.is_finite() && bound > 0.0) {
            return Err(configuration(format!("reward bound must be positive, got {bound}")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || v.abs() > bound + 1e-12) {
            return Err(configuration(format!("reward value {v} outside [-{bound}, {bound}]")));
        }
        Ok(Self {
            num_states,
            num_actions,
            values,
            bound,
        })
    }

    pub fn zero(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            values: vec![0.0; num_states * num_actions],
            bound: 1.0,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows_with_bound(rows, 1.0)
    }

    pub fn from_rows_with_bound(rows: &[Vec<f64>], bound: f64) -> Result<Self> {
        let num_actions = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != num_actions) || num_actions == 0 {
            return Err(structural("reward rows must be nonempty and rectangular"));
        }
        Self::with_bound(rows.len(), num_actions, rows.concat(), bound)
    }

    #[inline]
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.num_actions + a]
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.num_actions).map(<[f64]>::to_vec).collect()
    }

    /// `scale * self`, with the bound scaled accordingly.
    pub fn scaled(&self, scale: f64) -> Self {
        Self {
            num_states: self.num_states,
            num_actions: self.num_actions,
            values: self.values.iter().map(|v| v * scale).collect(),
            bound: (self.bound * scale.abs()).max(f64::MIN_POSITIVE),
        }
    }

    /// Convex (or any nonnegative) combination `sum_k w_k f_k`.
    pub fn combination(members: &[RewardFn], weights: &[f64]) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| configuration("cannot combine an empty reward list"))?;
        if weights.len() != members.len() {
            return Err(structural("weight count differs from reward count"));
        }
        let mut values = vec![0.0; first.values.len()];
        let mut bound: f64 = 0.0;
        for (f, &w) in members.iter().zip(weights) {
            if f.values.len() != values.len() {
                return Err(structural("rewards over different state-action spaces"));
            }
            for (acc, v) in values.iter_mut().zip(&f.values) {
                *acc += w * v;
            }
            bound += w.abs() * f.bound;
        }
        Ok(Self {
            num_states: first.num_states,
            num_actions: first.num_actions,
            values,
            bound: bound.max(f64::MIN_POSITIVE),
        })
    }
}

/// Ordered finite reward class; serves as the discriminator's strategy set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardClass {
    members: Vec<RewardFn>,
}

impl RewardClass {
    pub fn new(members: Vec<RewardFn>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| configuration("reward class must be nonempty"))?;
        let shape = (first.num_states, first.num_actions);
        if members.iter().any(|f| (f.num_states, f.num_actions) != shape) {
            return Err(structural("reward class members have differing shapes"));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[RewardFn] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, k: usize) -> &RewardFn {
        &self.members[k]
    }

    /// Largest member bound.
    pub fn bound(&self) -> f64 {
        self.members.iter().map(RewardFn::bound).fold(0.0, f64::max)
    }
}

/// Time-invariant stochastic policy `pi(a | s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct StationaryPolicy {
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for StationaryPolicy {
    type Error = crate::error::LabError;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        StationaryPolicy::from_rows(&rows)
    }
}

impl From<StationaryPolicy> for Vec<Vec<f64>> {
    fn from(p: StationaryPolicy) -> Self {
        p.rows()
    }
}

impl StationaryPolicy {
    pub fn new(num_states: usize, num_actions: usize, mut probs: Vec<f64>) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(structural("policy needs at least one state and action"));
        }
        if probs.len() != num_states * num_actions {
            return Err(structural(format!(
                "policy has {} entries, expected {}x{}",
                probs.len(),
                num_states,
                num_actions
            )));
        }
        for (s, row) in probs.chunks_mut(num_actions).enumerate() {
            normalize_distribution(row, &format!("policy row {s}"))?;
        }
        Ok(Self {
            num_states,
            num_actions,
            probs,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let num_actions = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != num_actions) {
            return Err(structural("policy rows must be rectangular"));
        }
        Self::new(rows.len(), num_actions, rows.concat())
    }

    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            probs: vec![1.0 / num_actions as f64; num_states * num_actions],
        }
    }

    /// Deterministic policy taking `actions[s]` in state `s`.
    pub fn deterministic(num_actions: usize, actions: &[usize]) -> Result<Self> {
        let mut probs = vec![0.0; actions.len() * num_actions];
        for (s, &a) in actions.iter().enumerate() {
            if a >= num_actions {
                return Err(structural(format!("action {a} out of range in state {s}")));
            }
            probs[s * num_actions + a] = 1.0;
        }
        Self::new(actions.len(), num_actions, probs)
    }

    /// Always takes `action`.
    pub fn constant(num_states: usize, num_actions: usize, action: usize) -> Result<Self> {
        Self::deterministic(num_actions, &vec![action; num_states])
    }

    #[inline]
    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s * self.num_actions + a]
    }

    #[inline]
    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.probs.chunks(self.num_actions).map(<[f64]>::to_vec).collect()
    }

    /// Greedy action in `s`, lowest index on ties.
    pub fn mode(&self, s: usize) -> usize {
        argmax(self.row(s))
    }

    /// State-wise mixture `sum_k w_k pi_k(. | s)`.
    pub fn mixture(policies: &[StationaryPolicy], weights: &[f64]) -> Result<Self> {
        let first = policies
            .first()
            .ok_or_else(|| configuration("cannot mix an empty policy list"))?;
        if weights.len() != policies.len() {
            return Err(structural("weight count differs from policy count"));
        }
        let mut probs = vec![0.0; first.probs.len()];
        for (p, &w) in policies.iter().zip(weights) {
            if p.probs.len() != probs.len() {
                return Err(structural("policies over different state-action spaces"));
            }
            for (acc, v) in probs.iter_mut().zip(&p.probs) {
                *acc += w * v;
            }
        }
        Self::new(first.num_states, first.num_actions, probs)
    }
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Index of the smallest entry, lowest index on ties.
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// One stationary policy per timestep `1..=T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolicySequence {
    per_step: Vec<StationaryPolicy>,
}

impl PolicySequence {
    pub fn new(per_step: Vec<StationaryPolicy>) -> Result<Self> {
        let first = per_step
            .first()
            .ok_or_else(|| structural("policy sequence must cover at least one timestep"))?;
        let shape = (first.num_states, first.num_actions);
        if per_step.iter().any(|p| (p.num_states, p.num_actions) != shape) {
            return Err(structural("policy sequence entries have differing shapes"));
        }
        Ok(Self { per_step })
    }

    /// The same stationary policy at every one of `horizon` steps.
    pub fn repeat(policy: &StationaryPolicy, horizon: usize) -> Self {
        Self {
            per_step: vec![policy.clone(); horizon.max(1)],
        }
    }

    pub fn horizon(&self) -> usize {
        self.per_step.len()
    }

    /// Policy used at timestep `t` (1-indexed).
    #[inline]
    pub fn at(&self, t: usize) -> &StationaryPolicy {
        &self.per_step[t - 1]
    }

    pub fn steps(&self) -> &[StationaryPolicy] {
        &self.per_step
    }

    pub fn num_states(&self) -> usize {
        self.per_step[0].num_states
    }

    pub fn num_actions(&self) -> usize {
        self.per_step[0].num_actions
    }

    /// Replaces the policy at timestep `t`.
    pub fn with_step(mut self, t: usize, policy: StationaryPolicy) -> Result<Self> {
        if t == 0 || t > self.per_step.len() {
            return Err(structural(format!("timestep {t} outside 1..={}", self.per_step.len())));
        }
        if (policy.num_states, policy.num_actions) != (self.num_states(), self.num_actions()) {
            return Err(structural("replacement policy has a different shape"));
        }
        self.per_step[t - 1] = policy;
        Ok(self)
    }
}

/// Per-timestep state-action occupancy `rho^t(s, a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisitationProfile {
    num_states: usize,
    num_actions: usize,
    per_step: Vec<Vec<f64>>,
}

impl VisitationProfile {
    pub fn new(num_states: usize, num_actions: usize, per_step: Vec<Vec<f64>>) -> Result<Self> {
        if per_step.is_empty() {
            return Err(structural("visitation profile must cover at least one timestep"));
        }
        for (t, d) in per_step.iter().enumerate() {
            if d.len() != num_states * num_actions {
                return Err(structural(format!("visitation at t={} has wrong length", t + 1)));
            }
            let sum: f64 = d.iter().sum();
            if d.iter().any(|&p| !p.is_finite() || p < 0.0) || (sum - 1.0).abs() > 1e-8 {
                return Err(structural(format!(
                    "visitation at t={} is not a distribution (sum {sum})",
                    t + 1
                )));
            }
        }
        Ok(Self {
            num_states,
            num_actions,
            per_step,
        })
    }

    pub fn horizon(&self) -> usize {
        self.per_step.len()
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Joint distribution at timestep `t` (1-indexed), flattened `[s * A + a]`.
    #[inline]
    pub fn at(&self, t: usize) -> &[f64] {
        &self.per_step[t - 1]
    }

    #[inline]
    pub fn mass(&self, t: usize, s: usize, a: usize) -> f64 {
        self.per_step[t - 1][s * self.num_actions + a]
    }

    /// State marginal at timestep `t`.
    pub fn state_marginal(&self, t: usize) -> Vec<f64> {
        self.at(t).chunks(self.num_actions).map(|row| row.iter().sum()).collect()
    }

    /// `rho^t(a | s)`, or `None` when `s` carries no mass at `t`.
    pub fn action_conditional(&self, t: usize, s: usize) -> Option<Vec<f64>> {
        let row = &self.at(t)[s * self.num_actions..(s + 1) * self.num_actions];
        let total: f64 = row.iter().sum();
        (total > 0.0).then(|| row.iter().map(|p| p / total).collect())
    }

    /// The time-varying policy implied by the profile. States without mass
    /// fall back to `fallback` (uniform when `None`).
    pub fn implied_policy(&self, fallback: Option<&PolicySequence>) -> PolicySequence {
        let steps = (1..=self.horizon())
            .map(|t| {
                let mut probs = Vec::with_capacity(self.num_states * self.num_actions);
                for s in 0..self.num_states {
                    match self.action_conditional(t, s) {
                        Some(row) => probs.extend(row),
                        None => match fallback {
                            Some(fb) => probs.extend_from_slice(fb.at(t).row(s)),
                            None => probs.extend(
                                std::iter::repeat(1.0 / self.num_actions as f64)
                                    .take(self.num_actions),
                            ),
                        },
                    }
                }
                StationaryPolicy {
                    num_states: self.num_states,
                    num_actions: self.num_actions,
                    probs,
                }
            })
            .collect();
        PolicySequence { per_step: steps }
    }

    /// `sum_t sum_{s,a} rho^t(s,a) f(s,a)`.
    pub fn dot(&self, f: &RewardFn) -> f64 {
        self.per_step
            .iter()
            .map(|d| d.iter().zip(f.values()).map(|(p, v)| p * v).sum::<f64>())
            .sum()
    }

    /// Largest per-entry absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &VisitationProfile) -> f64 {
        self.per_step
            .iter()
            .zip(&other.per_step)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// One executed step of a rollout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub t: usize,
    pub state: usize,
    pub action: usize,
}

/// A (possibly mid-episode) rollout.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reset_point: Option<(usize, usize)>,
    /// Realized suffix sums `Q_hat_t` from the first step, keyed by reward-class index.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub suffix_return_under: BTreeMap<usize, f64>,
}

impl Trajectory {
    /// Sum of `f` over the steps at or after timestep `from_t`.
    pub fn suffix_return(&self, f: &RewardFn, from_t: usize) -> f64 {
        self.steps
            .iter()
            .filter(|st| st.t >= from_t)
            .map(|st| f.get(st.state, st.action))
            .sum()
    }

    pub fn total_return(&self, f: &RewardFn) -> f64 {
        self.suffix_return(f, 0)
    }

    /// Records the suffix sums under every member of `class`.
    pub fn record_suffix_returns(&mut self, class: &RewardClass) {
        let from = self.steps.first().map_or(0, |s| s.t);
        self.suffix_return_under = class
            .members()
            .iter()
            .enumerate()
            .map(|(k, f)| (k, self.suffix_return(f, from)))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Checks the structural invariants: strictly increasing timesteps, and a
    /// first step that agrees with the reset point when one is recorded.
    pub fn check(&self) -> Result<()> {
        if self.steps.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(structural("trajectory timesteps must be strictly increasing"));
        }
        if let (Some((t, s)), Some(first)) = (self.reset_point, self.steps.first()) {
            if first.t != t || first.state != s {
                return Err(structural("first step does not match the reset point"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_rows_renormalize_within_tolerance() {
        let p = StationaryPolicy::new(1, 2, vec![0.5 + 4e-10, 0.5]).unwrap();
        assert!((p.prob(0, 0) + p.prob(0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn policy_rejects_large_drift() {
        assert!(StationaryPolicy::new(1, 2, vec![0.6, 0.5]).is_err());
        assert!(StationaryPolicy::new(1, 2, vec![1.2, -0.2]).is_err());
    }

    #[test]
    fn reward_rejects_out_of_bound_values() {
        assert!(RewardFn::new(1, 2, vec![0.5, 1.5]).is_err());
        assert!(RewardFn::with_bound(1, 2, vec![0.5, 1.5], 2.0).is_ok());
    }

    #[test]
    fn empty_reward_class_is_a_configuration_error() {
        assert!(matches!(
            RewardClass::new(vec![]),
            Err(crate::error::LabError::Configuration(_))
        ));
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmin(&[2.0, 0.0, 0.0]), 1);
    }

    #[test]
    fn trajectory_check_catches_bad_order() {
        let traj = Trajectory {
            steps: vec![Step { t: 2, state: 0, action: 0 }, Step { t: 2, state: 1, action: 0 }],
            ..Default::default()
        };
        assert!(traj.check().is_err());
    }
}
