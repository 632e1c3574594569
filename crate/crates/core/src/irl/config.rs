use serde::{Deserialize, Serialize};

use crate::error::{configuration, Result};
use crate::game::{ExplorationConfig, LearnerAlgorithm, StepSize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    DualIrl,
    PrimalIrl,
    Mmdp,
    NrmmBr,
    NrmmNr,
    NrmmDual,
    Filter,
    BehavioralCloning,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::DualIrl,
        Algorithm::PrimalIrl,
        Algorithm::Mmdp,
        Algorithm::NrmmBr,
        Algorithm::NrmmNr,
        Algorithm::NrmmDual,
        Algorithm::Filter,
        Algorithm::BehavioralCloning,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::DualIrl => "dual_irl",
            Algorithm::PrimalIrl => "primal_irl",
            Algorithm::Mmdp => "mmdp",
            Algorithm::NrmmBr => "nrmm_br",
            Algorithm::NrmmNr => "nrmm_nr",
            Algorithm::NrmmDual => "nrmm_dual",
            Algorithm::Filter => "filter",
            Algorithm::BehavioralCloning => "behavioral_cloning",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == name)
            .ok_or_else(|| configuration(format!("unknown algorithm `{name}`")))
    }
}

/// Whether payoffs come from exact DP or from simulator samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    #[default]
    Exact,
    Sampled,
}

/// How a player turns its learner state into a strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Play {
    /// The heaviest strategy of the learner (lowest index on ties).
    #[default]
    Leader,
    /// The learner's full mixed strategy.
    Mixed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryMode {
    #[default]
    BestResponse,
    NoRegret,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscriminatorLossMode {
    #[default]
    TrajectoryLevel,
    SuffixLevel,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSchedule {
    #[default]
    Fixed,
    /// `alpha` decays linearly from 1 at the first round to 0 at the last.
    LinearAnneal,
}

/// Policy oracle of the IRL baselines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PolicyOracle {
    /// Exact best response restricted to the policy class.
    Class,
    /// Soft value iteration over all policies.
    Soft { temperature: f64 },
}

impl Default for PolicyOracle {
    fn default() -> Self {
        PolicyOracle::Class
    }
}

/// Expert-reset knobs shared by NRMM, its dual and FILTER.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Probability that a reset state is drawn from the expert.
    pub alpha: f64,
    pub alpha_schedule: AlphaSchedule,
    /// Reset rollouts per round (M).
    pub rollouts_per_round: usize,
    /// Full learner rollouts per round used to fit the discriminator.
    pub discriminator_rollouts: usize,
    pub adversary_mode: AdversaryMode,
    pub discriminator_loss_mode: DiscriminatorLossMode,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            alpha_schedule: AlphaSchedule::Fixed,
            rollouts_per_round: 64,
            discriminator_rollouts: 32,
            adversary_mode: AdversaryMode::BestResponse,
            discriminator_loss_mode: DiscriminatorLossMode::TrajectoryLevel,
        }
    }
}

impl FilterConfig {
    pub fn alpha_at(&self, round: usize, rounds: usize) -> f64 {
        match self.alpha_schedule {
            AlphaSchedule::Fixed => self.alpha,
            AlphaSchedule::LinearAnneal if rounds <= 1 => 1.0,
            AlphaSchedule::LinearAnneal => 1.0 - (round - 1) as f64 / (rounds - 1) as f64,
        }
    }
}

/// How the per-timestep MMDP strategy becomes a policy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decode {
    /// State-wise mixture of the class under the row strategy.
    #[default]
    Mixture,
    /// The heaviest class member.
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmdpConfig {
    /// Reset rollouts per timestep; `None` derives it from the Hoeffding
    /// formula with `hoeffding_eps` and `hoeffding_delta`.
    pub samples: Option<usize>,
    pub hoeffding_eps: f64,
    pub hoeffding_delta: f64,
    pub game_epsilon: f64,
    pub max_game_rounds: usize,
    pub decode: Decode,
}

impl Default for MmdpConfig {
    fn default() -> Self {
        Self {
            samples: None,
            hoeffding_eps: 0.1,
            hoeffding_delta: 0.1,
            game_epsilon: 1e-3,
            max_game_rounds: 20_000,
            decode: Decode::Mixture,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub algorithm: LearnerAlgorithm,
    pub step_size: StepSize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            algorithm: LearnerAlgorithm::MultiplicativeWeights,
            step_size: StepSize::Fixed(0.1),
        }
    }
}

/// Full parameter record of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    /// Round budget N.
    pub rounds: usize,
    pub eval: EvalMode,
    pub policy_learner: LearnerConfig,
    pub reward_learner: LearnerConfig,
    /// How the discriminator plays its no-regret state.
    pub reward_play: Play,
    pub policy_oracle: PolicyOracle,
    pub filter: FilterConfig,
    pub mmdp: MmdpConfig,
    pub exploration: ExplorationConfig,
    /// Stop once the running average of `eps_i` falls to this value.
    pub eps_threshold: Option<f64>,
    /// Stop once an iterate's true-reward gap falls to this value.
    pub gap_threshold: Option<f64>,
    /// Expert demonstrations behind the expert profile; `0` uses the exact
    /// profile.
    pub demos: usize,
    /// Only choose the `t = 1` policy, completing it with the environment's
    /// fixed suffix (MMDP and BC).
    pub fixed_suffix: bool,
    /// Override of the environment's initial policy.
    pub initial_policy: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::NrmmBr,
            rounds: 20,
            eval: EvalMode::Exact,
            policy_learner: LearnerConfig::default(),
            reward_learner: LearnerConfig::default(),
            reward_play: Play::Leader,
            policy_oracle: PolicyOracle::Class,
            filter: FilterConfig::default(),
            mmdp: MmdpConfig::default(),
            exploration: ExplorationConfig::default(),
            eps_threshold: None,
            gap_threshold: None,
            demos: 0,
            fixed_suffix: false,
            initial_policy: None,
        }
    }
}

impl RunConfig {
    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.filter;
        if self.rounds == 0 {
            return Err(configuration("rounds: must be at least 1"));
        }
        if !(0.0..=1.0).contains(&f.alpha) {
            return Err(configuration(format!("filter.alpha: {} not in [0, 1]", f.alpha)));
        }
        if f.rollouts_per_round == 0 {
            return Err(configuration("filter.rollouts_per_round: must be at least 1"));
        }
        if f.discriminator_rollouts == 0 {
            return Err(configuration("filter.discriminator_rollouts: must be at least 1"));
        }
        let m = &self.mmdp;
        if !(m.hoeffding_eps > 0.0) || !(m.hoeffding_delta > 0.0 && m.hoeffding_delta < 1.0) {
            return Err(configuration("mmdp: hoeffding_eps > 0 and hoeffding_delta in (0, 1) required"));
        }
        if m.samples == Some(0) {
            return Err(configuration("mmdp.samples: must be at least 1"));
        }
        if !(m.game_epsilon > 0.0) {
            return Err(configuration("mmdp.game_epsilon: must be positive"));
        }
        if let PolicyOracle::Soft { temperature } = self.policy_oracle {
            if !(temperature > 0.0) {
                return Err(configuration("policy_oracle.temperature: must be positive"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anneal_runs_from_one_to_zero() {
        let f = FilterConfig {
            alpha_schedule: AlphaSchedule::LinearAnneal,
            ..FilterConfig::default()
        };
        assert_eq!(f.alpha_at(1, 5), 1.0);
        assert_eq!(f.alpha_at(5, 5), 0.0);
        assert_eq!(f.alpha_at(3, 5), 0.5);
    }

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(Algorithm::parse(a.name()).unwrap(), a);
        }
        assert!(Algorithm::parse("gail").is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = RunConfig::default();
        c.filter.alpha = 1.5;
        assert!(c.validate().unwrap_err().to_string().contains("filter.alpha"));
    }
}
