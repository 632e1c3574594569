use serde::{Deserialize, Serialize};

use super::config::{Algorithm, RunConfig};
use crate::envs::EnvSpec;
use crate::error::{structural, Result};
use crate::game::SimplexWeights;
use crate::mdp::{PolicySequence, StationaryPolicy};

/// The learner's strategy in one round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyChoice {
    /// A member of the policy class, used at every timestep.
    Member(usize),
    /// A state-wise mixture of class members (MMDP's per-timestep policy).
    Mixture(SimplexWeights),
    /// An arbitrary policy sequence (soft best responses, BC output).
    Sequence(PolicySequence),
}

impl PolicyChoice {
    /// Resolves the choice into the policy sequence it denotes. Mixtures
    /// resolve to the stationary mixture over the whole horizon.
    pub fn resolve(&self, class: &[StationaryPolicy], horizon: usize) -> Result<PolicySequence> {
        match self {
            PolicyChoice::Member(k) => class
                .get(*k)
                .map(|p| PolicySequence::repeat(p, horizon))
                .ok_or_else(|| structural(format!("policy index {k} outside the class"))),
            PolicyChoice::Mixture(w) => Ok(PolicySequence::repeat(
                &StationaryPolicy::mixture(class, w.as_slice())?,
                horizon,
            )),
            PolicyChoice::Sequence(seq) => Ok(seq.clone()),
        }
    }

    pub fn member(&self) -> Option<usize> {
        match self {
            PolicyChoice::Member(k) => Some(*k),
            PolicyChoice::Mixture(w) => w.as_point(),
            PolicyChoice::Sequence(_) => None,
        }
    }
}

/// One round of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub round: usize,
    /// The timestep solved in this round (MMDP only).
    pub timestep: Option<usize>,
    pub policy: PolicyChoice,
    /// Heaviest reward of the discriminator's strategy.
    pub reward_index: usize,
    pub reward_weights: SimplexWeights,
    /// `eps_i`: the learner's regret this round, per timestep.
    pub learner_loss: f64,
    /// `delta_i`: the discriminator's regret this round, per timestep.
    pub adversary_loss: f64,
    /// Cumulative simulator steps when the record was taken.
    pub env_interactions: u64,
    /// `max_f J(pi_E, f) - J(pi_i, f)`.
    pub validation_gap: f64,
    /// `J(pi_E, r) - J(pi_i, r)` under the true reward.
    pub gap: f64,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Rounds,
    EpsThreshold,
    GapThreshold,
    /// The interaction budget ran out; the run is censored.
    Budget,
}

/// Estimated and exact payoff matrices of one MMDP timestep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimestepGame {
    pub timestep: usize,
    pub estimated: Vec<Vec<f64>>,
    pub exact: Vec<Vec<f64>>,
    pub samples: usize,
}

impl TimestepGame {
    pub fn max_abs_error(&self) -> f64 {
        self.estimated
            .iter()
            .flatten()
            .zip(self.exact.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Complete record of a run; `(config, env, seed)` reproduces it exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTranscript {
    pub algorithm: Algorithm,
    pub env: EnvSpec,
    pub config: RunConfig,
    pub seed: u64,
    pub iterates: Vec<IterateRecord>,
    /// Index into `iterates` of the iterate with the lowest validation gap.
    pub returned_policy: usize,
    /// Policy sequence output (MMDP and BC).
    pub output: Option<PolicySequence>,
    pub stop_reason: StopReason,
    pub total_interactions: u64,
    /// MMDP payoff matrices, in solve order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub games: Vec<TimestepGame>,
}

impl RunTranscript {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: Self = serde_json::from_str(text)?;
        t.check()?;
        Ok(t)
    }

    pub fn check(&self) -> Result<()> {
        if self.iterates.is_empty() || self.returned_policy >= self.iterates.len() {
            return Err(structural("transcript has no returned iterate"));
        }
        for w in self.iterates.windows(2) {
            if w[1].env_interactions < w[0].env_interactions {
                return Err(structural("interaction counts decrease"));
            }
        }
        if self
            .iterates
            .iter()
            .any(|r| !r.learner_loss.is_finite() || !r.adversary_loss.is_finite())
        {
            return Err(structural("non-finite loss in transcript"));
        }
        Ok(())
    }

    pub fn returned(&self) -> &IterateRecord {
        &self.iterates[self.returned_policy]
    }

    /// First iterate meeting the gap threshold and the interactions it took.
    pub fn interactions_to_gap(&self, threshold: f64) -> Option<u64> {
        self.iterates
            .iter()
            .find(|r| r.gap <= threshold)
            .map(|r| r.env_interactions)
    }
}

/// Earliest index with the smallest validation gap.
pub(crate) fn lowest_validation(iterates: &[IterateRecord]) -> usize {
    let mut best = 0;
    for (i, r) in iterates.iter().enumerate() {
        if r.validation_gap < iterates[best].validation_gap {
            best = i;
        }
    }
    best
}
