use serde::{Deserialize, Serialize};

use super::types::{normalize_distribution, PolicySequence, RewardFn};
use crate::error::{configuration, structural, LabError, Result};

/// Finite-horizon MDP with explicit transitions.
///
/// Timesteps run `1..=horizon`. Transitions are either time-homogeneous
/// (one slice shared by every step) or given per timestep. Rows are stored
/// sparsely as `(next_state, probability)` lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MdpDocument", into = "MdpDocument")]
pub struct TabularMdp {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    time_varying: bool,
    rows: Vec<Vec<(usize, f64)>>,
    start_dist: Vec<f64>,
    true_reward: Option<RewardFn>,
}

/// Raw transition tensor as nested arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TransitionTensor {
    /// `P[s][a][s']`, shared by all timesteps.
    Homogeneous(Vec<Vec<Vec<f64>>>),
    /// `P[t][s][a][s']`, one slice per timestep.
    TimeVarying(Vec<Vec<Vec<Vec<f64>>>>),
}

/// JSON document form of [`TabularMdp`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MdpDocument {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    pub transitions: TransitionTensor,
    pub start_dist: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_reward: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward_bound: Option<f64>,
}

impl TryFrom<MdpDocument> for TabularMdp {
    type Error = LabError;
    fn try_from(doc: MdpDocument) -> Result<Self> {
        let (time_varying, slices) = match doc.transitions {
            TransitionTensor::Homogeneous(p) => (false, vec![p]),
            TransitionTensor::TimeVarying(p) => (true, p),
        };
        let mut dense = Vec::new();
        for (k, slice) in slices.iter().enumerate() {
            if slice.len() != doc.num_states {
                return Err(structural(format!("transition slice {k} has {} states", slice.len())));
            }
            for row_s in slice {
                if row_s.len() != doc.num_actions {
                    return Err(structural("transition rows have the wrong action count"));
                }
                for row in row_s {
                    if row.len() != doc.num_states {
                        return Err(structural("transition row has the wrong next-state count"));
                    }
                    dense.extend_from_slice(row);
                }
            }
        }
        let reward = match doc.true_reward {
            Some(rows) => Some(RewardFn::from_rows_with_bound(
                &rows,
                doc.reward_bound.unwrap_or(1.0),
            )?),
            None => None,
        };
        TabularMdp::from_dense(
            doc.num_states,
            doc.num_actions,
            doc.horizon,
            time_varying,
            dense,
            doc.start_dist,
            reward,
        )
    }
}

impl From<TabularMdp> for MdpDocument {
    fn from(m: TabularMdp) -> Self {
        let slice = |k: usize| -> Vec<Vec<Vec<f64>>> {
            (0..m.num_states)
                .map(|s| {
                    (0..m.num_actions)
                        .map(|a| {
                            let mut row = vec![0.0; m.num_states];
                            for &(sp, p) in &m.rows[m.row_index_slice(k, s, a)] {
                                row[sp] += p;
                            }
                            row
                        })
                        .collect()
                })
                .collect()
        };
        let transitions = if m.time_varying {
            TransitionTensor::TimeVarying((0..m.horizon).map(slice).collect())
        } else {
            TransitionTensor::Homogeneous(slice(0))
        };
        let reward_bound = m
            .true_reward
            .as_ref()
            .map(RewardFn::bound)
            .filter(|&b| b != 1.0);
        MdpDocument {
            num_states: m.num_states,
            num_actions: m.num_actions,
            horizon: m.horizon,
            transitions,
            start_dist: m.start_dist.clone(),
            true_reward: m.true_reward.as_ref().map(RewardFn::rows),
            reward_bound,
        }
    }
}

impl TabularMdp {
    /// Builds an MDP from a dense tensor laid out `[slice][s][a][s']`.
    pub fn from_dense(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        time_varying: bool,
        dense: Vec<f64>,
        start_dist: Vec<f64>,
        true_reward: Option<RewardFn>,
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 || horizon == 0 {
            return Err(structural("states, actions and horizon must all be positive"));
        }
        let slices = if time_varying { horizon } else { 1 };
        let expected = slices * num_states * num_actions * num_states;
        if dense.len() != expected {
            return Err(structural(format!(
                "transition tensor has {} entries, expected {expected}",
                dense.len()
            )));
        }
        let mut rows = Vec::with_capacity(slices * num_states * num_actions);
        for (i, chunk) in dense.chunks(num_states).enumerate() {
            let mut chunk = chunk.to_vec();
            normalize_distribution(&mut chunk, &format!("transition row {i}"))?;
            rows.push(
                chunk
                    .into_iter()
                    .enumerate()
                    .filter(|&(_, p)| p > 0.0)
                    .collect(),
            );
        }
        Self::assemble(num_states, num_actions, horizon, time_varying, rows, start_dist, true_reward)
    }

    /// Builds an MDP from sparse rows indexed `[(slice * S + s) * A + a]`.
    pub fn from_sparse(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        time_varying: bool,
        rows: Vec<Vec<(usize, f64)>>,
        start_dist: Vec<f64>,
        true_reward: Option<RewardFn>,
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 || horizon == 0 {
            return Err(structural("states, actions and horizon must all be positive"));
        }
        let slices = if time_varying { horizon } else { 1 };
        if rows.len() != slices * num_states * num_actions {
            return Err(structural("sparse transition table has the wrong number of rows"));
        }
        let mut clean = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            let mut dense = vec![0.0; num_states];
            for (sp, p) in row {
                if sp >= num_states {
                    return Err(structural(format!("transition row {i} targets state {sp}")));
                }
                dense[sp] += p;
            }
            normalize_distribution(&mut dense, &format!("transition row {i}"))?;
            clean.push(dense.into_iter().enumerate().filter(|&(_, p)| p > 0.0).collect());
        }
        Self::assemble(num_states, num_actions, horizon, time_varying, clean, start_dist, true_reward)
    }

    fn assemble(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        time_varying: bool,
        rows: Vec<Vec<(usize, f64)>>,
        mut start_dist: Vec<f64>,
        true_reward: Option<RewardFn>,
    ) -> Result<Self> {
        if start_dist.len() != num_states {
            return Err(structural("start distribution has the wrong length"));
        }
        normalize_distribution(&mut start_dist, "start distribution")?;
        if let Some(r) = &true_reward {
            if (r.num_states(), r.num_actions()) != (num_states, num_actions) {
                return Err(structural("true reward shape differs from the MDP"));
            }
        }
        Ok(Self {
            num_states,
            num_actions,
            horizon,
            time_varying,
            rows,
            start_dist,
            true_reward,
        })
    }

    #[inline]
    fn row_index_slice(&self, slice: usize, s: usize, a: usize) -> usize {
        (slice * self.num_states + s) * self.num_actions + a
    }

    /// Sparse successor distribution of `(s, a)` at timestep `t` (1-indexed).
    #[inline]
    pub fn successors(&self, t: usize, s: usize, a: usize) -> &[(usize, f64)] {
        let slice = if self.time_varying { t - 1 } else { 0 };
        &self.rows[self.row_index_slice(slice, s, a)]
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn is_time_varying(&self) -> bool {
        self.time_varying
    }

    pub fn start_dist(&self) -> &[f64] {
        &self.start_dist
    }

    pub fn true_reward(&self) -> Option<&RewardFn> {
        self.true_reward.as_ref()
    }

    /// The ground-truth reward, or a configuration error when absent.
    pub fn require_true_reward(&self) -> Result<&RewardFn> {
        self.true_reward
            .as_ref()
            .ok_or_else(|| configuration("MDP has no true reward"))
    }

    pub fn with_true_reward(mut self, reward: Option<RewardFn>) -> Result<Self> {
        if let Some(r) = &reward {
            if (r.num_states(), r.num_actions()) != (self.num_states, self.num_actions) {
                return Err(structural("true reward shape differs from the MDP"));
            }
        }
        self.true_reward = reward;
        Ok(self)
    }

    /// Same dynamics, different horizon. Time-varying MDPs keep their first
    /// `horizon` slices and cannot be extended.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(structural("horizon must be positive"));
        }
        let mut out = self.clone();
        if self.time_varying {
            if horizon > self.horizon {
                return Err(structural("cannot extend a time-varying MDP"));
            }
            out.rows.truncate(horizon * self.num_states * self.num_actions);
        }
        out.horizon = horizon;
        Ok(out)
    }

    /// Checks that `policy` fits this MDP.
    pub fn check_policy(&self, policy: &PolicySequence) -> Result<()> {
        if policy.horizon() != self.horizon {
            return Err(structural(format!(
                "policy covers {} steps, MDP horizon is {}",
                policy.horizon(),
                self.horizon
            )));
        }
        if (policy.num_states(), policy.num_actions()) != (self.num_states, self.num_actions) {
            return Err(structural("policy shape differs from the MDP"));
        }
        Ok(())
    }

    pub fn check_reward(&self, f: &RewardFn) -> Result<()> {
        if (f.num_states(), f.num_actions()) != (self.num_states, self.num_actions) {
            return Err(structural("reward shape differs from the MDP"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> TabularMdp {
        TabularMdp::from_dense(
            2,
            2,
            3,
            false,
            vec![1.0, 0.0, 0.0, 1.0, 0.5, 0.5, 0.0, 1.0],
            vec![1.0, 0.0],
            Some(RewardFn::new(2, 2, vec![0.0, 1.0, -1.0, 0.5]).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip() {
        let m = two_state();
        let text = m.to_json().unwrap();
        assert_eq!(TabularMdp::from_json(&text).unwrap(), m);
    }

    #[test]
    fn time_varying_json_round_trip() {
        let m = TabularMdp::from_dense(
            1,
            1,
            2,
            true,
            vec![1.0, 1.0],
            vec![1.0],
            None,
        )
        .unwrap();
        let text = m.to_json().unwrap();
        assert!(text.contains("[[[[1.0]]],[[[1.0]]]]"));
        assert_eq!(TabularMdp::from_json(&text).unwrap(), m);
    }

    #[test]
    fn malformed_rows_fail_fast() {
        let bad = TabularMdp::from_dense(1, 1, 1, false, vec![0.9], vec![1.0], None);
        assert!(bad.is_err());
        let bad_start = TabularMdp::from_dense(1, 1, 1, false, vec![1.0], vec![0.5], None);
        assert!(bad_start.is_err());
    }

    #[test]
    fn missing_true_reward_is_configuration_error() {
        let m = two_state().with_true_reward(None).unwrap();
        assert!(matches!(m.require_true_reward(), Err(LabError::Configuration(_))));
    }
}
