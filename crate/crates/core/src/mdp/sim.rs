//! Sampled simulator with reset-to-(timestep, state) support and an
//! interaction counter.

use rand::Rng;

use super::model::TabularMdp;
use super::types::{PolicySequence, Step, Trajectory};
use crate::error::{configuration, structural, Result};
use crate::rng::{rng_from_seed, LabRng};

/// Draws an index from a probability vector.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

fn sample_successor<R: Rng + ?Sized>(succ: &[(usize, f64)], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(sp, p) in succ {
        acc += p;
        if u < acc {
            return sp;
        }
    }
    succ.last().map(|&(sp, _)| sp).unwrap_or(0)
}

/// Wraps an MDP and counts every environment step taken through it.
#[derive(Debug)]
pub struct Simulator<'a> {
    mdp: &'a TabularMdp,
    steps: u64,
    tremble: f64,
}

impl<'a> Simulator<'a> {
    pub fn new(mdp: &'a TabularMdp) -> Self {
        Self {
            mdp,
            steps: 0,
            tremble: 0.0,
        }
    }

    /// With probability `tremble` per step, the executed action is uniform.
    pub fn with_tremble(mut self, tremble: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tremble) {
            return Err(configuration(format!("tremble must be in [0, 1], got {tremble}")));
        }
        self.tremble = tremble;
        Ok(self)
    }

    pub fn mdp(&self) -> &'a TabularMdp {
        self.mdp
    }

    /// Environment steps taken so far.
    pub fn interactions(&self) -> u64 {
        self.steps
    }

    /// Full-horizon rollout from the start distribution.
    pub fn rollout(&mut self, policy: &PolicySequence, rng: &mut LabRng) -> Trajectory {
        let s0 = sample_index(self.mdp.start_dist(), rng);
        self.run(1, s0, None, policy, rng)
    }

    /// Rollout from `(t, s)`: `first_action` is forced, then `continuation`
    /// acts until the end of the horizon.
    pub fn reset_rollout(
        &mut self,
        start: (usize, usize),
        first_action: usize,
        continuation: &PolicySequence,
        rng: &mut LabRng,
    ) -> Result<Trajectory> {
        let (t, s) = start;
        if t == 0 || t > self.mdp.horizon() {
            return Err(structural(format!(
                "reset timestep {t} outside 1..={}",
                self.mdp.horizon()
            )));
        }
        if s >= self.mdp.num_states() || first_action >= self.mdp.num_actions() {
            return Err(structural("reset state or action out of range"));
        }
        let mut traj = self.run(t, s, Some(first_action), continuation, rng);
        traj.reset_point = Some((t, s));
        Ok(traj)
    }

    /// Rolls `policy` out from the start distribution for steps `1..t` and
    /// returns the state reached at `t` (consumes `t - 1` interactions).
    pub fn roll_in(&mut self, policy: &PolicySequence, t: usize, rng: &mut LabRng) -> usize {
        let mut s = sample_index(self.mdp.start_dist(), rng);
        for tau in 1..t {
            let a = self.act(policy, tau, s, rng);
            self.steps += 1;
            s = sample_successor(self.mdp.successors(tau, s, a), rng);
        }
        s
    }

    fn act(&self, policy: &PolicySequence, t: usize, s: usize, rng: &mut LabRng) -> usize {
        if self.tremble > 0.0 && rng.gen::<f64>() < self.tremble {
            rng.gen_range(0..self.mdp.num_actions())
        } else {
            sample_index(policy.at(t).row(s), rng)
        }
    }

    fn run(
        &mut self,
        t0: usize,
        s0: usize,
        first_action: Option<usize>,
        policy: &PolicySequence,
        rng: &mut LabRng,
    ) -> Trajectory {
        let horizon = self.mdp.horizon();
        let mut steps = Vec::with_capacity(horizon + 1 - t0);
        let mut s = s0;
        for t in t0..=horizon {
            let a = match first_action {
                Some(a) if t == t0 => a,
                _ => self.act(policy, t, s, rng),
            };
            steps.push(Step {
                t,
                state: s,
                action: a,
            });
            self.steps += 1;
            if t < horizon {
                s = sample_successor(self.mdp.successors(t, s, a), rng);
            }
        }
        Trajectory {
            steps,
            reset_point: None,
            suffix_return_under: Default::default(),
        }
    }
}

/// Full-horizon rollout of `policy` from the start distribution. With
/// probability `tremble` per step the executed (and recorded) action is
/// uniform over actions.
pub fn sample_trajectory(
    mdp: &TabularMdp,
    policy: &PolicySequence,
    rng_seed: u64,
    tremble: f64,
) -> Result<Trajectory> {
    mdp.check_policy(policy)?;
    let mut sim = Simulator::new(mdp).with_tremble(tremble)?;
    let mut rng = rng_from_seed(rng_seed);
    Ok(sim.rollout(policy, &mut rng))
}

/// Rollout from a reset point with a forced first action.
pub fn reset_rollout(
    mdp: &TabularMdp,
    start: (usize, usize),
    first_action: usize,
    continuation: &PolicySequence,
    rng_seed: u64,
) -> Result<Trajectory> {
    mdp.check_policy(continuation)?;
    let mut sim = Simulator::new(mdp);
    let mut rng = rng_from_seed(rng_seed);
    sim.reset_rollout(start, first_action, continuation, &mut rng)
}
