//! Sample-based RL oracle: explore with uniformly random actions until
//! every reachable `(t, s)` has had each action tried, then plan over the
//! class on the empirical model.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::oracles::BestResponse;
use crate::error::{configuration, Result};
use crate::mdp::{argmax, PolicySequence, RewardFn, Simulator, StationaryPolicy};
use crate::rng::LabRng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplorationConfig {
    /// Tries required per action at every discovered `(t, s)`.
    pub min_visits: usize,
    /// Interaction budget for the whole run; exceeding it censors the run.
    pub budget: u64,
}

impl Default for ExplorationConfig {
    fn default() -> Self {
        Self {
            min_visits: 1,
            budget: 10_000_000,
        }
    }
}

type Counts = BTreeMap<usize, u64>;

/// Empirical model gathered by exploration.
#[derive(Debug, Default)]
struct EmpiricalModel {
    start: Counts,
    // (t, s) -> per-action successor counts
    edges: HashMap<(usize, usize), Vec<Counts>>,
}

impl EmpiricalModel {
    fn covered(&self, min_visits: usize) -> bool {
        self.edges.values().all(|per_action| {
            per_action
                .iter()
                .all(|c| c.values().sum::<u64>() >= min_visits as u64)
        })
    }

    fn value(&self, horizon: usize, pi: &StationaryPolicy, f: &RewardFn) -> f64 {
        let mut next: HashMap<usize, f64> = HashMap::new();
        for t in (1..=horizon).rev() {
            let mut cur = HashMap::new();
            for (&(tt, s), per_action) in &self.edges {
                if tt != t {
                    continue;
                }
                let mut v = 0.0;
                for (a, succ) in per_action.iter().enumerate() {
                    let p = pi.prob(s, a);
                    if p == 0.0 {
                        continue;
                    }
                    let n: u64 = succ.values().sum();
                    let cont = if n == 0 {
                        0.0
                    } else {
                        succ.iter()
                            .map(|(sp, c)| *c as f64 * next.get(sp).copied().unwrap_or(0.0))
                            .sum::<f64>()
                            / n as f64
                    };
                    v += p * (f.get(s, a) + cont);
                }
                cur.insert(s, v);
            }
            next = cur;
        }
        let n: u64 = self.start.values().sum();
        self.start
            .iter()
            .map(|(s, c)| *c as f64 * next.get(s).copied().unwrap_or(0.0))
            .sum::<f64>()
            / n as f64
    }
}

/// Explores `sim`'s MDP from scratch and returns the class member with the
/// highest value under `f` on the empirical model. Returns `None` once the
/// simulator's interaction count exceeds `config.budget`.
pub fn explore_best_response(
    sim: &mut Simulator<'_>,
    class: &[StationaryPolicy],
    f: &RewardFn,
    config: &ExplorationConfig,
    rng: &mut LabRng,
) -> Result<Option<BestResponse>> {
    if class.is_empty() {
        return Err(configuration("empty policy class"));
    }
    let mdp = sim.mdp();
    let (ns, na, horizon) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let uniform = PolicySequence::repeat(&StationaryPolicy::uniform(ns, na), horizon);
    let mut model = EmpiricalModel::default();
    loop {
        if sim.interactions() > config.budget {
            return Ok(None);
        }
        let traj = sim.rollout(&uniform, rng);
        *model.start.entry(traj.steps[0].state).or_default() += 1;
        for (i, step) in traj.steps.iter().enumerate() {
            let per_action = model
                .edges
                .entry((step.t, step.state))
                .or_insert_with(|| vec![Counts::new(); na]);
            // the last step's successor is never observed, count the try only
            let next = traj.steps.get(i + 1).map_or(usize::MAX, |n| n.state);
            *per_action[step.action].entry(next).or_default() += 1;
        }
        if model.covered(config.min_visits) {
            break;
        }
    }
    let values: Vec<f64> = class.iter().map(|pi| model.value(horizon, pi, f)).collect();
    let index = argmax(&values);
    Ok(Some(BestResponse {
        index,
        value: values[index],
    }))
}
