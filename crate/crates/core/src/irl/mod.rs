//! The algorithm family and its error accounting.
//!
//! Every algorithm is reached through [`run`], which returns a
//! [`RunTranscript`] that is a pure function of `(instance, config, seed)`.
//! Sign convention: a discriminator `f` favors the expert, so the loss of a
//! policy is `L(pi, f) = J(pi_E, f) - J(pi, f)`. The discriminator maximizes
//! it and the learner minimizes it.

mod bc;
mod config;
mod errors;
mod mmdp;
mod payoff;
mod stationary;
mod transcript;
mod variance;

pub use bc::{bc_class_choice, behavioral_cloning_from_profile, run_behavioral_cloning};
pub use config::{
    AdversaryMode, Algorithm, AlphaSchedule, Decode, DiscriminatorLossMode, EvalMode,
    FilterConfig, LearnerConfig, MmdpConfig, Play, PolicyOracle, RunConfig,
};
pub use errors::{
    audit_transcript, compute_run_errors, sequence_errors, stationary_errors,
    stationary_errors_by_round, BoundAudit, BoundCheck, RunErrors, AUDIT_TOL,
};
pub use mmdp::{exact_timestep_payoffs, hoeffding_samples, mmdp_step_errors};
pub use payoff::{expert_reset_payoff, reset_payoff, Evaluator};
pub use transcript::{
    IterateRecord, PolicyChoice, RunTranscript, StopReason, TimestepGame,
};
pub use variance::{
    chain_variance_closed_form, chain_variance_ratio, discriminator_estimator_variance,
    variance_chain, VarianceChain, MIN_VARIANCE_SAMPLES,
};

use crate::envs::Instance;
use crate::error::Result;
use crate::mdp::{empirical_expert_visitation, Simulator, VisitationProfile};
use crate::rng::child_rng;

/// The expert profile a run sees: exact, or the empirical profile of
/// `config.demos` seeded expert rollouts.
pub fn expert_profile_for(inst: &Instance, config: &RunConfig, seed: u64) -> Result<VisitationProfile> {
    if config.demos == 0 {
        return inst.expert_profile();
    }
    let mut sim = Simulator::new(&inst.mdp);
    let mut rng = child_rng(seed, 0xde30);
    let demos: Vec<_> = (0..config.demos)
        .map(|_| sim.rollout(&inst.expert, &mut rng))
        .collect();
    empirical_expert_visitation(
        &demos,
        inst.mdp.num_states(),
        inst.mdp.num_actions(),
        inst.horizon(),
    )
}

/// Runs `config.algorithm` on `inst`.
pub fn run(inst: &Instance, config: &RunConfig, seed: u64) -> Result<RunTranscript> {
    config.validate()?;
    let profile = expert_profile_for(inst, config, seed)?;
    run_with_profile(inst, config, seed, &profile)
}

/// As [`run`], with an explicit expert profile.
pub fn run_with_profile(
    inst: &Instance,
    config: &RunConfig,
    seed: u64,
    profile: &VisitationProfile,
) -> Result<RunTranscript> {
    config.validate()?;
    let transcript = match config.algorithm {
        Algorithm::Mmdp => mmdp::run_mmdp(inst, config, seed, profile)?,
        Algorithm::BehavioralCloning => bc::run_bc(inst, config, seed, profile)?,
        _ => stationary::run_stationary(inst, config, seed, profile)?,
    };
    log::debug!(
        "{} on {}: {} rounds, {} interactions",
        config.algorithm.name(),
        inst.spec.label(),
        transcript.iterates.len(),
        transcript.total_interactions
    );
    Ok(transcript)
}
