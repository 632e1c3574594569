//! Behavioral cloning: per-timestep action matching on expert data, with no
//! environment interaction.

use super::config::RunConfig;
use super::payoff::Evaluator;
use super::transcript::{IterateRecord, PolicyChoice, RunTranscript, StopReason};
use crate::envs::Instance;
use crate::error::{configuration, Result};
use crate::game::SimplexWeights;
use crate::mdp::{
    argmax, empirical_expert_visitation, PolicySequence, StationaryPolicy, TabularMdp,
    Trajectory, VisitationProfile,
};

/// Expected agreement `sum_{s,a} rho^t(s, a) pi(a | s)` of a policy with
/// the profile at `t`.
fn agreement(profile: &VisitationProfile, t: usize, pi: &StationaryPolicy) -> f64 {
    let na = profile.num_actions();
    profile
        .at(t)
        .iter()
        .enumerate()
        .map(|(idx, &m)| m * pi.prob(idx / na, idx % na))
        .sum()
}

/// Class member with the highest expert agreement at `t`.
pub fn bc_class_choice(profile: &VisitationProfile, t: usize, class: &[StationaryPolicy]) -> usize {
    let scores: Vec<f64> = class.iter().map(|pi| agreement(profile, t, pi)).collect();
    argmax(&scores)
}

/// Fits one policy per timestep. With a class, each step is the member of
/// highest agreement; without one, the maximum-likelihood tabular policy
/// (uniform on states the profile never visits).
pub fn behavioral_cloning_from_profile(
    profile: &VisitationProfile,
    class: Option<&[StationaryPolicy]>,
) -> Result<PolicySequence> {
    match class {
        None => Ok(profile.implied_policy(None)),
        Some([]) => Err(configuration("empty policy class")),
        Some(class) => PolicySequence::new(
            (1..=profile.horizon())
                .map(|t| class[bc_class_choice(profile, t, class)].clone())
                .collect(),
        ),
    }
}

pub fn run_behavioral_cloning(
    mdp: &TabularMdp,
    demos: &[Trajectory],
    class: Option<&[StationaryPolicy]>,
) -> Result<PolicySequence> {
    let profile =
        empirical_expert_visitation(demos, mdp.num_states(), mdp.num_actions(), mdp.horizon())?;
    behavioral_cloning_from_profile(&profile, class)
}

/// Transcript wrapper: one record for the fitted sequence. With
/// `fixed_suffix`, only the first step is cloned.
pub(crate) fn run_bc(
    inst: &Instance,
    cfg: &RunConfig,
    seed: u64,
    expert_profile: &VisitationProfile,
) -> Result<RunTranscript> {
    let ev = Evaluator::new(&inst.mdp, expert_profile, &inst.reward_class, &inst.policy_class)?;
    let k1 = bc_class_choice(expert_profile, 1, &inst.policy_class);
    let output = if cfg.fixed_suffix {
        let suffix = inst
            .fixed_suffix
            .as_ref()
            .ok_or_else(|| configuration("fixed_suffix: environment has no fixed suffix"))?;
        suffix.clone().with_step(1, inst.policy_class[k1].clone())?
    } else {
        behavioral_cloning_from_profile(expert_profile, Some(&inst.policy_class))?
    };
    let losses = ev.losses(&output);
    let reward_index = argmax(&losses);
    let record = IterateRecord {
        round: 1,
        timestep: None,
        policy: PolicyChoice::Sequence(output.clone()),
        reward_index,
        reward_weights: SimplexWeights::point(losses.len(), reward_index),
        learner_loss: 0.0,
        adversary_loss: 0.0,
        env_interactions: 0,
        validation_gap: losses[reward_index],
        gap: ev.gap(&inst.expert, &output),
        alpha: 1.0,
    };
    Ok(RunTranscript {
        algorithm: cfg.algorithm,
        env: inst.spec.clone(),
        config: cfg.clone(),
        seed,
        iterates: vec![record],
        returned_policy: 0,
        output: Some(output),
        stop_reason: StopReason::Rounds,
        total_interactions: 0,
        games: Vec::new(),
    })
}
