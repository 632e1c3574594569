//! Variance of the two discriminator-loss estimators.
//!
//! Both estimate `sum_t (E_{rho_E^t}[f] - E_{rho_pi^t}[f])`, one term per
//! timestep:
//!
//! * trajectory level: one single-step sample from a fresh learner rollout
//!   and one from the expert visitation;
//! * suffix level: reset at an expert state-action pair and sum `f` along
//!   the learner's suffix `tau = t..T`, minus the same sum from an expert
//!   state with the learner's own action.

use super::config::DiscriminatorLossMode;
use crate::error::{configuration, Result};
use crate::mdp::{
    sample_index, PolicySequence, RewardFn, Simulator, StationaryPolicy, TabularMdp,
    VisitationProfile,
};
use crate::rng::rng_from_seed;

/// Smallest sample count accepted by [`discriminator_estimator_variance`].
pub const MIN_VARIANCE_SAMPLES: usize = 1000;

fn sample_pair(profile: &VisitationProfile, t: usize, rng: &mut crate::rng::LabRng) -> (usize, usize) {
    let idx = sample_index(profile.at(t), rng);
    (idx / profile.num_actions(), idx % profile.num_actions())
}

/// Empirical variance (unbiased) of the chosen estimator over `samples`
/// independent draws.
pub fn discriminator_estimator_variance(
    mdp: &TabularMdp,
    expert_profile: &VisitationProfile,
    policy: &PolicySequence,
    f: &RewardFn,
    mode: DiscriminatorLossMode,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples < MIN_VARIANCE_SAMPLES {
        return Err(configuration(format!(
            "samples: need at least {MIN_VARIANCE_SAMPLES}, got {samples}"
        )));
    }
    mdp.check_policy(policy)?;
    mdp.check_reward(f)?;
    let horizon = mdp.horizon();
    let mut sim = Simulator::new(mdp);
    let mut rng = rng_from_seed(seed);
    let mut draws = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut total = 0.0;
        for t in 1..=horizon {
            match mode {
                DiscriminatorLossMode::TrajectoryLevel => {
                    let s = sim.roll_in(policy, t, &mut rng);
                    let a = sample_index(policy.at(t).row(s), &mut rng);
                    let (se, ae) = sample_pair(expert_profile, t, &mut rng);
                    total += f.get(se, ae) - f.get(s, a);
                }
                DiscriminatorLossMode::SuffixLevel => {
                    let (se, ae) = sample_pair(expert_profile, t, &mut rng);
                    let expert_suffix = sim.reset_rollout((t, se), ae, policy, &mut rng)?;
                    let (sl, _) = sample_pair(expert_profile, t, &mut rng);
                    let al = sample_index(policy.at(t).row(sl), &mut rng);
                    let learner_suffix = sim.reset_rollout((t, sl), al, policy, &mut rng)?;
                    total += expert_suffix.suffix_return(f, t) - learner_suffix.suffix_return(f, t);
                }
            }
        }
        draws.push(total);
    }
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    Ok(draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0))
}

/// Two-state chain with one action whose per-step reward is `+1` or `-1`
/// with equal probability (unit variance). Independent steps redraw the
/// state every step; dependent steps keep the first state forever.
#[derive(Clone, Debug)]
pub struct VarianceChain {
    pub mdp: TabularMdp,
    pub policy: PolicySequence,
    pub reward: RewardFn,
    pub profile: VisitationProfile,
}

pub fn variance_chain(horizon: usize, dependent: bool) -> Result<VarianceChain> {
    if horizon == 0 {
        return Err(configuration("horizon: must be at least 1"));
    }
    let rows = if dependent {
        vec![vec![(0, 1.0)], vec![(1, 1.0)]]
    } else {
        vec![vec![(0, 0.5), (1, 0.5)]; 2]
    };
    let mdp = TabularMdp::from_sparse(2, 1, horizon, false, rows, vec![0.5, 0.5], None)?;
    let policy = PolicySequence::repeat(&StationaryPolicy::uniform(2, 1), horizon);
    let reward = RewardFn::new(2, 1, vec![1.0, -1.0])?;
    let profile = crate::mdp::exact_visitation(&mdp, &policy)?;
    Ok(VarianceChain {
        mdp,
        policy,
        reward,
        profile,
    })
}

/// Closed forms for the chain at unit variance: `(suffix, trajectory)`.
/// The suffix from `t` carries `T - t + 1` rewards on both sides.
pub fn chain_variance_closed_form(horizon: usize, dependent: bool) -> (f64, f64) {
    let t = horizon as f64;
    let suffix = if dependent {
        t * (t + 1.0) * (2.0 * t + 1.0) / 3.0
    } else {
        t * (t + 1.0)
    };
    (suffix, 2.0 * t)
}

/// Simulated `(suffix, trajectory)` variances on the chain.
pub fn chain_variance_ratio(horizon: usize, dependent: bool, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let c = variance_chain(horizon, dependent)?;
    let suffix = discriminator_estimator_variance(
        &c.mdp,
        &c.profile,
        &c.policy,
        &c.reward,
        DiscriminatorLossMode::SuffixLevel,
        samples,
        seed,
    )?;
    let traj = discriminator_estimator_variance(
        &c.mdp,
        &c.profile,
        &c.policy,
        &c.reward,
        DiscriminatorLossMode::TrajectoryLevel,
        samples,
        seed ^ 0x9e37_79b9_7f4a_7c15,
    )?;
    Ok((suffix, traj))
}
