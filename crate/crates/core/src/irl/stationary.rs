//! Algorithms over a finite class of stationary policies: the dual and
//! primal IRL baselines, NRMM (best-response and no-regret discriminators),
//! its dual variant and FILTER.

use rand::Rng;

use super::config::{AdversaryMode, Algorithm, DiscriminatorLossMode, EvalMode, Play, PolicyOracle, RunConfig};
use super::payoff::Evaluator;
use super::transcript::{lowest_validation, IterateRecord, PolicyChoice, RunTranscript, StopReason};
use crate::envs::Instance;
use crate::error::{configuration, Result};
use crate::game::{
    class_best_response, explore_best_response, no_regret_step, soft_best_response_policy,
    OnlineLearnerState, SimplexWeights,
};
use crate::mdp::{
    argmax, exact_visitation, sample_index, PolicySequence, RewardFn, Simulator,
    VisitationProfile,
};
use crate::rng::child_rng;

fn dot(w: &SimplexWeights, v: &[f64]) -> f64 {
    w.expect(v)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// One sampled reset: timestep, state, uniform first action, suffix return
/// under every reward member, and whether the state came from the expert.
struct ResetSample {
    t: usize,
    state: usize,
    action: usize,
    returns: Vec<f64>,
    expert_reset: bool,
}

struct Runner<'a> {
    inst: &'a Instance,
    cfg: &'a RunConfig,
    ev: Evaluator<'a>,
    sim: Simulator<'a>,
    rng: crate::rng::LabRng,
    /// `L(pi_k, f_j)` for every class member.
    class_losses: Vec<Vec<f64>>,
}

impl<'a> Runner<'a> {
    fn reward_fn(&self, w: &SimplexWeights) -> Result<RewardFn> {
        RewardFn::combination(self.ev.rewards.members(), w.as_slice())
    }

    fn play(&self, learner: &OnlineLearnerState) -> SimplexWeights {
        match self.cfg.reward_play {
            Play::Leader => SimplexWeights::point(learner.num_strategies(), learner.weights().mode()),
            Play::Mixed => learner.weights(),
        }
    }

    /// Discriminator loss estimate from full learner rollouts.
    fn trajectory_losses(&mut self, pi: &PolicySequence) -> Vec<f64> {
        let k = self.cfg.filter.discriminator_rollouts;
        let members = self.ev.rewards.members();
        let mut mean = vec![0.0; members.len()];
        for _ in 0..k {
            let traj = self.sim.rollout(pi, &mut self.rng);
            for (m, f) in mean.iter_mut().zip(members) {
                *m += traj.total_return(f) / k as f64;
            }
        }
        self.ev.expert_values().iter().zip(mean).map(|(je, j)| je - j).collect()
    }

    fn reset_samples(&mut self, pi: &PolicySequence, alpha: f64) -> Result<Vec<ResetSample>> {
        let (horizon, na) = (self.ev.horizon(), self.inst.mdp.num_actions());
        let m = self.cfg.filter.rollouts_per_round;
        let mut out = Vec::with_capacity(m);
        for _ in 0..m {
            let t = self.rng.gen_range(1..=horizon);
            let expert_reset = alpha >= 1.0 || self.rng.gen::<f64>() < alpha;
            let state = if expert_reset {
                sample_index(&self.ev.expert_marginals()[t - 1], &mut self.rng)
            } else {
                self.sim.roll_in(pi, t, &mut self.rng)
            };
            let action = self.rng.gen_range(0..na);
            let traj = self.sim.reset_rollout((t, state), action, pi, &mut self.rng)?;
            let returns = self
                .ev
                .rewards
                .members()
                .iter()
                .map(|f| traj.suffix_return(f, t))
                .collect();
            out.push(ResetSample {
                t,
                state,
                action,
                returns,
                expert_reset,
            });
        }
        Ok(out)
    }

    /// Suffix-level discriminator loss `T * mean |A| (pi_E - pi)(a|s) Q_hat`
    /// over expert resets.
    fn suffix_losses(&self, pi: &PolicySequence, samples: &[ResetSample]) -> Option<Vec<f64>> {
        let (horizon, na) = (self.ev.horizon() as f64, self.inst.mdp.num_actions() as f64);
        let used: Vec<&ResetSample> = samples.iter().filter(|s| s.expert_reset).collect();
        if used.is_empty() {
            return None;
        }
        let mut out = vec![0.0; self.ev.num_rewards()];
        for s in &used {
            let pe = self
                .ev
                .expert
                .action_conditional(s.t, s.state)
                .map_or(0.0, |row| row[s.action]);
            let w = na * (pe - pi.at(s.t).prob(s.state, s.action));
            for (o, q) in out.iter_mut().zip(&s.returns) {
                *o += horizon * w * q / used.len() as f64;
            }
        }
        Some(out)
    }

    fn record(
        &self,
        round: usize,
        policy: &PolicyChoice,
        pi: &PolicySequence,
        f: &SimplexWeights,
        alpha: f64,
        reset_based: bool,
    ) -> IterateRecord {
        let horizon = self.ev.horizon() as f64;
        let (learner_loss, adversary_loss) = if reset_based {
            let q = self.ev.q_tables(pi);
            let expert_row = self.ev.expert_reset_row(&q);
            let class_g: Vec<f64> = self
                .ev
                .reset_matrix(&q)
                .iter()
                .map(|row| {
                    let g: Vec<f64> = expert_row.iter().zip(row).map(|(e, p)| e - p).collect();
                    dot(f, &g)
                })
                .collect();
            let own = self.ev.reset_losses(&q, pi);
            (
                (dot(f, &own) - min_of(&class_g)) / horizon,
                (max_of(&own) - dot(f, &own)) / horizon,
            )
        } else {
            let own = self.ev.losses(pi);
            let class_l: Vec<f64> = self.class_losses.iter().map(|l| dot(f, l)).collect();
            (
                (dot(f, &own) - min_of(&class_l)) / horizon,
                (max_of(&own) - dot(f, &own)) / horizon,
            )
        };
        IterateRecord {
            round,
            timestep: None,
            policy: policy.clone(),
            reward_index: f.mode(),
            reward_weights: f.clone(),
            learner_loss,
            adversary_loss,
            env_interactions: self.sim.interactions(),
            validation_gap: self.ev.validation_gap(pi),
            gap: self.ev.gap(&self.inst.expert, pi),
            alpha,
        }
    }

    /// Next policy of the IRL baselines for reward `f`.
    fn rl_oracle(&mut self, f: &RewardFn) -> Result<Option<PolicyChoice>> {
        if self.cfg.eval == EvalMode::Sampled {
            let br = explore_best_response(
                &mut self.sim,
                &self.inst.policy_class,
                f,
                &self.cfg.exploration,
                &mut self.rng,
            )?;
            return Ok(br.map(|b| PolicyChoice::Member(b.index)));
        }
        Ok(Some(match self.cfg.policy_oracle {
            PolicyOracle::Class => {
                PolicyChoice::Member(class_best_response(&self.inst.mdp, &self.inst.policy_class, f)?.index)
            }
            PolicyOracle::Soft { temperature } => {
                PolicyChoice::Sequence(soft_best_response_policy(&self.inst.mdp, f, temperature)?)
            }
        }))
    }

    /// Exact per-class reset payoffs `sum_j w_j J^{pi_i}_nu(pi_k, f_j)` with
    /// roll-in `nu^t = alpha rho_E^t + (1 - alpha) rho_{pi_i}^t`.
    fn exact_policy_payoffs(&self, pi: &PolicySequence, f: &SimplexWeights, alpha: f64) -> Result<Vec<f64>> {
        let q = self.ev.q_tables(pi);
        let matrix = if alpha >= 1.0 {
            self.ev.reset_matrix(&q)
        } else {
            let own = exact_visitation(&self.inst.mdp, pi)?;
            let rollin: Vec<Vec<f64>> = (1..=self.ev.horizon())
                .map(|t| {
                    self.ev.expert_marginals()[t - 1]
                        .iter()
                        .zip(own.state_marginal(t))
                        .map(|(e, l)| alpha * e + (1.0 - alpha) * l)
                        .collect()
                })
                .collect();
            self.ev.rollin_matrix(&rollin, &q)
        };
        Ok(matrix.iter().map(|row| dot(f, row)).collect())
    }

    fn sampled_policy_payoffs(&self, samples: &[ResetSample], f: &SimplexWeights) -> Vec<f64> {
        let na = self.inst.mdp.num_actions() as f64;
        let n = samples.len() as f64;
        self.ev
            .class
            .iter()
            .map(|pi_k| {
                samples
                    .iter()
                    .map(|s| na * pi_k.at(s.t).prob(s.state, s.action) * dot(f, &s.returns))
                    .sum::<f64>()
                    / n
            })
            .collect()
    }
}

/// Runs one of the stationary-policy algorithms.
pub(crate) fn run_stationary(
    inst: &Instance,
    cfg: &RunConfig,
    seed: u64,
    expert_profile: &VisitationProfile,
) -> Result<RunTranscript> {
    let ev = Evaluator::new(&inst.mdp, expert_profile, &inst.reward_class, &inst.policy_class)?;
    let class_losses = ev.class.iter().map(|pi| ev.losses(pi)).collect();
    let num_policies = inst.policy_class.len();
    let num_rewards = inst.reward_class.len();
    let initial = cfg.initial_policy.unwrap_or(inst.initial_policy);
    if initial >= num_policies {
        return Err(configuration(format!("initial_policy: {initial} outside the class")));
    }
    let mut runner = Runner {
        inst,
        cfg,
        ev,
        sim: Simulator::new(&inst.mdp),
        rng: child_rng(seed, 0x5eed),
        class_losses,
    };
    let algorithm = cfg.algorithm;
    let reset_based = !matches!(algorithm, Algorithm::DualIrl | Algorithm::PrimalIrl);
    let adversary = match algorithm {
        Algorithm::NrmmBr | Algorithm::PrimalIrl => AdversaryMode::BestResponse,
        Algorithm::NrmmNr | Algorithm::NrmmDual | Algorithm::DualIrl => AdversaryMode::NoRegret,
        _ => cfg.filter.adversary_mode,
    };
    let mut policy_learner = OnlineLearnerState::new(
        cfg.policy_learner.algorithm,
        num_policies,
        cfg.policy_learner.step_size,
    )?;
    let mut reward_learner = OnlineLearnerState::new(
        cfg.reward_learner.algorithm,
        num_rewards,
        cfg.reward_learner.step_size,
    )?;
    let mut reward_sum = vec![0.0; num_rewards];
    let mut current = PolicyChoice::Member(initial);
    let mut iterates = Vec::new();
    let mut eps_total = 0.0;
    let mut stop = StopReason::Rounds;
    let horizon = inst.horizon();

    for round in 1..=cfg.rounds {
        let alpha = match algorithm {
            Algorithm::Filter => cfg.filter.alpha_at(round, cfg.rounds),
            Algorithm::DualIrl | Algorithm::PrimalIrl => 0.0,
            _ => 1.0,
        };
        let pi = current.resolve(&inst.policy_class, horizon)?;
        let sampled = cfg.eval == EvalMode::Sampled && reset_based;

        // discriminator loss estimates for this round
        let samples = if sampled {
            runner.reset_samples(&pi, alpha)?
        } else {
            Vec::new()
        };
        let losses = if !sampled {
            runner.ev.losses(&pi)
        } else {
            match cfg.filter.discriminator_loss_mode {
                DiscriminatorLossMode::SuffixLevel => match runner.suffix_losses(&pi, &samples) {
                    Some(l) => l,
                    None => runner.trajectory_losses(&pi),
                },
                DiscriminatorLossMode::TrajectoryLevel => runner.trajectory_losses(&pi),
            }
        };
        let f = match adversary {
            AdversaryMode::BestResponse => SimplexWeights::point(num_rewards, argmax(&losses)),
            AdversaryMode::NoRegret => {
                let (next, _) = no_regret_step(reward_learner, &losses)?;
                reward_learner = next;
                runner.play(&reward_learner)
            }
        };

        let record = runner.record(round, &current, &pi, &f, alpha, reset_based);
        eps_total += record.learner_loss;
        let gap = record.gap;
        iterates.push(record);
        if cfg.gap_threshold.is_some_and(|thr| gap <= thr) {
            stop = StopReason::GapThreshold;
            break;
        }
        if cfg.eps_threshold.is_some_and(|thr| eps_total / round as f64 <= thr) {
            stop = StopReason::EpsThreshold;
            break;
        }
        if runner.sim.interactions() > cfg.exploration.budget {
            stop = StopReason::Budget;
            break;
        }
        if round == cfg.rounds {
            break;
        }

        // next policy
        let next = match algorithm {
            Algorithm::DualIrl => {
                let fr = runner.reward_fn(&f)?;
                runner.rl_oracle(&fr)?
            }
            Algorithm::PrimalIrl => {
                for (acc, w) in reward_sum.iter_mut().zip(f.as_slice()) {
                    *acc += w;
                }
                let avg = SimplexWeights::new(reward_sum.iter().map(|x| x / round as f64).collect())?;
                let fr = runner.reward_fn(&avg)?;
                if cfg.eval == EvalMode::Sampled || matches!(cfg.policy_oracle, PolicyOracle::Soft { .. }) {
                    runner.rl_oracle(&fr)?
                } else {
                    let payoff: Vec<f64> = runner.class_losses.iter().map(|l| -dot(&f, l)).collect();
                    let (next, w) = no_regret_step(policy_learner, &payoff)?;
                    policy_learner = next;
                    Some(PolicyChoice::Member(w.mode()))
                }
            }
            _ => {
                let payoff = if sampled {
                    runner.sampled_policy_payoffs(&samples, &f)
                } else {
                    runner.exact_policy_payoffs(&pi, &f, alpha)?
                };
                if algorithm == Algorithm::NrmmDual {
                    Some(PolicyChoice::Member(argmax(&payoff)))
                } else {
                    let (next, w) = no_regret_step(policy_learner, &payoff)?;
                    policy_learner = next;
                    Some(PolicyChoice::Member(w.mode()))
                }
            }
        };
        match next {
            Some(choice) => current = choice,
            None => {
                stop = StopReason::Budget;
                break;
            }
        }
    }

    let returned_policy = lowest_validation(&iterates);
    Ok(RunTranscript {
        algorithm,
        env: inst.spec.clone(),
        config: cfg.clone(),
        seed,
        iterates,
        returned_policy,
        output: None,
        stop_reason: stop,
        total_interactions: runner.sim.interactions(),
        games: Vec::new(),
    })
}
