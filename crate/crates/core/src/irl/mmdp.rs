//! Moment matching by dynamic programming: one zero-sum game per timestep,
//! solved backwards in time against the already chosen suffix.

use rand::Rng;

use super::config::{Decode, EvalMode, RunConfig};
use super::payoff::Evaluator;
use super::transcript::{IterateRecord, PolicyChoice, RunTranscript, StopReason, TimestepGame};
use crate::envs::Instance;
use crate::error::{configuration, Result};
use crate::game::{duality_gap, solve_matrix_game, SimplexWeights};
use crate::mdp::{
    sample_index, PolicySequence, Simulator, StationaryPolicy, ValueTable, VisitationProfile,
};
use crate::rng::child_rng;

/// Reset rollouts per timestep that estimate every entry of a
/// `num_policies x num_rewards` payoff matrix within `eps` with probability
/// at least `1 - delta`: `ceil(ln(2C / delta) R^2 / (2 eps^2))` with
/// `C = num_policies * num_rewards` and range `R = 2 |A| bound` of the
/// importance-weighted, `1/T`-normalized estimator.
pub fn hoeffding_samples(
    num_policies: usize,
    num_rewards: usize,
    num_actions: usize,
    reward_bound: f64,
    eps: f64,
    delta: f64,
) -> Result<usize> {
    if !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(configuration("hoeffding: eps > 0 and delta in (0, 1) required"));
    }
    let c = (num_policies * num_rewards) as f64;
    let range = 2.0 * num_actions as f64 * reward_bound;
    Ok(((2.0 * c / delta).ln() * range * range / (2.0 * eps * eps)).ceil() as usize)
}

/// Placeholder-prefixed sequence whose steps `t+1..=T` are `suffix`.
fn with_prefix(suffix: &[StationaryPolicy], horizon: usize, ns: usize, na: usize) -> Result<PolicySequence> {
    let mut steps = vec![StationaryPolicy::uniform(ns, na); horizon - suffix.len()];
    steps.extend_from_slice(suffix);
    PolicySequence::new(steps)
}

/// Exact payoff `(1/T) E_{s ~ rho_E^t}[sum_a (pi_E(a|s) - pi(a|s)) Q_f(t, s, a)]`
/// of every class member (rows) against every reward (columns).
pub fn exact_timestep_payoffs(ev: &Evaluator<'_>, t: usize, q: &[ValueTable]) -> Vec<Vec<f64>> {
    ev.class
        .iter()
        .map(|pi| policy_timestep_payoffs(ev, t, q, pi.at(t)))
        .collect()
}

/// Payoffs of an arbitrary per-step policy against every reward.
fn policy_timestep_payoffs(ev: &Evaluator<'_>, t: usize, q: &[ValueTable], pi: &StationaryPolicy) -> Vec<f64> {
    let na = ev.mdp.num_actions();
    let horizon = ev.horizon() as f64;
    let marg = &ev.expert_marginals()[t - 1];
    let profile = ev.expert.at(t);
    q.iter()
        .map(|qj| {
            let mut total = 0.0;
            for (idx, &m) in profile.iter().enumerate() {
                if m != 0.0 {
                    total += m * qj.q(t, idx / na, idx % na);
                }
            }
            for (s, &m) in marg.iter().enumerate() {
                if m != 0.0 {
                    let row = qj.q_row(t, s);
                    total -= m * (0..na).map(|a| pi.prob(s, a) * row[a]).sum::<f64>();
                }
            }
            total / horizon
        })
        .collect()
}

/// Optimization error `eps_t = max_f payoff_t(pi^t, f)` of every step of
/// `seq`, each against its own suffix.
pub fn mmdp_step_errors(ev: &Evaluator<'_>, seq: &PolicySequence) -> Vec<f64> {
    let q = ev.q_tables(seq);
    (1..=ev.horizon())
        .map(|t| {
            policy_timestep_payoffs(ev, t, &q, seq.at(t))
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Monte-Carlo estimate of the payoff matrix at `t` from `samples` expert
/// resets with a uniform first action.
#[allow(clippy::too_many_arguments)]
fn sampled_timestep_payoffs(
    ev: &Evaluator<'_>,
    t: usize,
    continuation: &PolicySequence,
    samples: usize,
    expert_conditionals: &[Option<Vec<f64>>],
    sim: &mut Simulator<'_>,
    rng: &mut crate::rng::LabRng,
) -> Result<Vec<Vec<f64>>> {
    let na = ev.mdp.num_actions();
    let scale = na as f64 / ev.horizon() as f64 / samples as f64;
    let members = ev.rewards.members();
    let mut out = vec![vec![0.0; members.len()]; ev.class.len()];
    for _ in 0..samples {
        let s = sample_index(&ev.expert_marginals()[t - 1], rng);
        let a = rng.gen_range(0..na);
        let traj = sim.reset_rollout((t, s), a, continuation, rng)?;
        let pe = expert_conditionals[s].as_ref().map_or(0.0, |row| row[a]);
        let returns: Vec<f64> = members.iter().map(|f| traj.suffix_return(f, t)).collect();
        for (row, pi) in out.iter_mut().zip(&ev.class) {
            let w = scale * (pe - pi.at(t).prob(s, a));
            for (x, q) in row.iter_mut().zip(&returns) {
                *x += w * q;
            }
        }
    }
    Ok(out)
}

fn decode(class: &[StationaryPolicy], row: &SimplexWeights, mode: Decode) -> Result<StationaryPolicy> {
    match mode {
        Decode::Mixture => StationaryPolicy::mixture(class, row.as_slice()),
        Decode::Greedy => Ok(class[row.mode()].clone()),
    }
}

pub(crate) fn run_mmdp(
    inst: &Instance,
    cfg: &RunConfig,
    seed: u64,
    expert_profile: &VisitationProfile,
) -> Result<RunTranscript> {
    let ev = Evaluator::new(&inst.mdp, expert_profile, &inst.reward_class, &inst.policy_class)?;
    let (ns, na, horizon) = (inst.mdp.num_states(), inst.mdp.num_actions(), inst.horizon());
    for t in 1..=horizon {
        if ev.expert_marginals()[t - 1].iter().sum::<f64>() <= 0.0 {
            return Err(configuration(format!("expert never reaches timestep {t}")));
        }
    }
    let first_free = if cfg.fixed_suffix {
        let suffix = inst
            .fixed_suffix
            .as_ref()
            .ok_or_else(|| configuration("fixed_suffix: environment has no fixed suffix"))?;
        Some(suffix)
    } else {
        None
    };
    let samples = match cfg.mmdp.samples {
        Some(m) => m,
        None => hoeffding_samples(
            inst.policy_class.len(),
            inst.reward_class.len(),
            na,
            inst.reward_class.bound(),
            cfg.mmdp.hoeffding_eps,
            cfg.mmdp.hoeffding_delta,
        )?,
    };
    let mut sim = Simulator::new(&inst.mdp);
    let mut rng = child_rng(seed, 0xd9);
    // chosen steps for timesteps t..=T, in time order
    let mut suffix: Vec<StationaryPolicy> = Vec::new();
    let last_t = match first_free {
        Some(fixed) => {
            suffix.extend(fixed.steps()[1..].iter().cloned());
            1
        }
        None => horizon,
    };
    let expert_prefix = expert_profile.implied_policy(None);
    let true_expert_value = inst
        .mdp
        .true_reward()
        .map(|r| ev.value(&inst.expert, r));
    let mut iterates = Vec::new();
    let mut games = Vec::new();
    for (round, t) in (1..=last_t).rev().enumerate() {
        let continuation = with_prefix(&suffix, horizon, ns, na)?;
        let q = ev.q_tables(&continuation);
        let exact = exact_timestep_payoffs(&ev, t, &q);
        let payoff = match cfg.eval {
            EvalMode::Exact => exact.clone(),
            EvalMode::Sampled => {
                let conditionals: Vec<Option<Vec<f64>>> =
                    (0..ns).map(|s| expert_profile.action_conditional(t, s)).collect();
                let est = sampled_timestep_payoffs(
                    &ev,
                    t,
                    &continuation,
                    samples,
                    &conditionals,
                    &mut sim,
                    &mut rng,
                )?;
                games.push(TimestepGame {
                    timestep: t,
                    estimated: est.clone(),
                    exact: exact.clone(),
                    samples,
                });
                est
            }
        };
        let sol = solve_matrix_game(&payoff, cfg.mmdp.game_epsilon, cfg.mmdp.max_game_rounds)?;
        let step = decode(&inst.policy_class, &sol.row, cfg.mmdp.decode)?;
        let own = policy_timestep_payoffs(&ev, t, &q, &step);
        let eps_t = own.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let played = sol.col.expect(&own);
        suffix.insert(0, step);

        // current sequence: expert-implied prefix, chosen steps from t on
        let mut steps: Vec<StationaryPolicy> = expert_prefix.steps()[..t - 1].to_vec();
        steps.extend(suffix.iter().cloned());
        let seq = PolicySequence::new(steps)?;
        let gap = match (true_expert_value, inst.mdp.true_reward()) {
            (Some(je), Some(r)) => je - ev.value(&seq, r),
            _ => f64::NAN,
        };
        let policy = match cfg.mmdp.decode {
            Decode::Mixture => PolicyChoice::Mixture(sol.row.clone()),
            Decode::Greedy => PolicyChoice::Member(sol.row.mode()),
        };
        iterates.push(IterateRecord {
            round: round + 1,
            timestep: Some(t),
            policy,
            reward_index: sol.col.mode(),
            reward_weights: sol.col.clone(),
            learner_loss: eps_t,
            adversary_loss: eps_t - played,
            env_interactions: sim.interactions(),
            validation_gap: ev.validation_gap(&seq),
            gap,
            alpha: 1.0,
        });
        debug_assert!(duality_gap(&payoff, sol.row.as_slice(), sol.col.as_slice()) <= sol.gap + 1e-9);
    }
    let output = with_prefix(&suffix, horizon, ns, na)?;
    let returned_policy = iterates.len() - 1;
    Ok(RunTranscript {
        algorithm: cfg.algorithm,
        env: inst.spec.clone(),
        config: cfg.clone(),
        seed,
        iterates,
        returned_policy,
        output: Some(output),
        stop_reason: StopReason::Rounds,
        total_interactions: sim.interactions(),
        games,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{EnvSpec, DANTE_UP};
    use crate::irl::config::Algorithm;

    fn cfg() -> RunConfig {
        RunConfig::for_algorithm(Algorithm::Mmdp)
    }

    #[test]
    fn hoeffding_formula() {
        // ln(2 * 6 / 0.1) * (2 * 3 * 4)^2 / (2 * 0.01)
        let m = hoeffding_samples(3, 2, 3, 4.0, 0.1, 0.1).unwrap();
        let oracle = (120f64).ln() * 576.0 / 0.02;
        assert_eq!(m, oracle.ceil() as usize);
    }

    #[test]
    fn forked_tree_exact_matches_expert_value() {
        let inst = EnvSpec::ForkedTree.build().unwrap();
        let rho = inst.expert_profile().unwrap();
        let t = run_mmdp(&inst, &cfg(), 0, &rho).unwrap();
        assert_eq!(t.iterates.len(), 2);
        assert_eq!(t.iterates[0].timestep, Some(2));
        assert!(t.returned().gap.abs() < 1e-9);
        assert!(t.returned().validation_gap.abs() < 1e-9);
        assert_eq!(t.total_interactions, 0);
    }

    #[test]
    fn dante_goes_up_against_the_erring_suffix() {
        let inst = EnvSpec::Dante { horizon: 10, eps: 0.05 }.build().unwrap();
        let rho = inst.expert_profile().unwrap();
        let mut c = cfg();
        c.fixed_suffix = true;
        let t = run_mmdp(&inst, &c, 0, &rho).unwrap();
        assert_eq!(t.iterates.len(), 1);
        assert_eq!(t.iterates[0].policy.member(), Some(DANTE_UP));
        assert!(t.returned().gap.abs() < 1e-9);
    }

    #[test]
    fn sampled_estimates_stay_close() {
        let inst = EnvSpec::Cliff { horizon: 3 }.build().unwrap();
        let rho = inst.expert_profile().unwrap();
        let mut c = cfg();
        c.eval = EvalMode::Sampled;
        c.mmdp.samples = Some(20_000);
        let t = run_mmdp(&inst, &c, 7, &rho).unwrap();
        assert_eq!(t.games.len(), 3);
        for g in &t.games {
            assert!(g.max_abs_error() < 0.1, "{}", g.max_abs_error());
        }
        // each reset at t costs T - t + 1 steps
        assert_eq!(t.total_interactions, 20_000 * (3 + 2 + 1));
    }

    #[test]
    fn step_errors_vanish_on_the_expert() {
        let inst = EnvSpec::Cliff { horizon: 4 }.build().unwrap();
        let rho = inst.expert_profile().unwrap();
        let ev = Evaluator::new(&inst.mdp, &rho, &inst.reward_class, &inst.policy_class).unwrap();
        assert!(mmdp_step_errors(&ev, &inst.expert).iter().all(|e| e.abs() < 1e-12));
    }
}
