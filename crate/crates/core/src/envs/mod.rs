//! Environment constructors and the serializable [`EnvSpec`] that names them.

mod constructions;
mod random;

pub use constructions::{
    cliff_adversarial_policy, cliff_policy_class, cliff_slip_policy, cliff_state,
    dante_erring_suffix, dante_policy_class, dante_state, forked_state, make_cliff, make_dante,
    make_forked_tree, make_tree, make_tree_capped, CliffMdp, DanteMdp, ForkedTreeMdp, TreeMdp,
    DANTE_DOWN, DANTE_STRAIGHT, DANTE_UP, DEFAULT_TREE_LEAF_CAP, FORK_CENTER, FORK_LEFT,
    FORK_RIGHT,
};
pub use random::{
    make_random_grid, random_mdp, RandomGrid, RandomMdp, DEFAULT_GRID_CELL_CAP, GRID_DOWN,
    GRID_LEFT, GRID_RIGHT, GRID_UP,
};

use serde::{Deserialize, Serialize};

use crate::error::{configuration, Result};
use crate::mdp::{
    exact_visitation, PolicySequence, RewardClass, RewardFn, StationaryPolicy, TabularMdp,
    VisitationProfile,
};

fn default_dante_eps() -> f64 {
    0.05
}

/// Names one environment and its parameters. Serialized with a `kind` tag,
/// e.g. `{"kind": "tree", "branching": 2, "horizon": 3}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSpec {
    Tree {
        branching: usize,
        horizon: usize,
    },
    Cliff {
        horizon: usize,
    },
    Dante {
        horizon: usize,
        /// Error rate of the fixed erring suffix.
        #[serde(default = "default_dante_eps")]
        eps: f64,
    },
    ForkedTree,
    RandomGrid {
        width: usize,
        height: usize,
        horizon: usize,
        #[serde(default)]
        slip: f64,
        seed: u64,
    },
    RandomMdp {
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        seed: u64,
    },
}

/// Everything an algorithm run needs about one environment.
#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: EnvSpec,
    pub mdp: TabularMdp,
    pub expert: PolicySequence,
    pub reward_class: RewardClass,
    pub reward_names: Vec<String>,
    pub policy_class: Vec<StationaryPolicy>,
    pub policy_names: Vec<String>,
    /// Index of the learner's initial policy in `policy_class`.
    pub initial_policy: usize,
    /// Fixed continuation for single-step games (Dante's erring suffix).
    pub fixed_suffix: Option<PolicySequence>,
}

impl Instance {
    pub fn expert_profile(&self) -> Result<VisitationProfile> {
        exact_visitation(&self.mdp, &self.expert)
    }

    pub fn horizon(&self) -> usize {
        self.mdp.horizon()
    }

    pub fn true_reward(&self) -> Result<&RewardFn> {
        self.mdp.require_true_reward()
    }
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

impl EnvSpec {
    /// Short file-name friendly label.
    pub fn label(&self) -> String {
        match self {
            EnvSpec::Tree { branching, horizon } => format!("tree-a{branching}-t{horizon}"),
            EnvSpec::Cliff { horizon } => format!("cliff-t{horizon}"),
            EnvSpec::Dante { horizon, .. } => format!("dante-t{horizon}"),
            EnvSpec::ForkedTree => "forked-tree".into(),
            EnvSpec::RandomGrid {
                width,
                height,
                horizon,
                seed,
                ..
            } => format!("grid-{width}x{height}-t{horizon}-s{seed}"),
            EnvSpec::RandomMdp {
                num_states,
                num_actions,
                horizon,
                seed,
            } => format!("mdp-s{num_states}-a{num_actions}-t{horizon}-r{seed}"),
        }
    }

    pub fn horizon(&self) -> usize {
        match *self {
            EnvSpec::Tree { horizon, .. }
            | EnvSpec::Cliff { horizon }
            | EnvSpec::Dante { horizon, .. }
            | EnvSpec::RandomGrid { horizon, .. }
            | EnvSpec::RandomMdp { horizon, .. } => horizon,
            EnvSpec::ForkedTree => 2,
        }
    }

    /// Builds the MDP, expert and strategy classes.
    pub fn build(&self) -> Result<Instance> {
        let spec = self.clone();
        match *self {
            EnvSpec::Tree { branching, horizon } => {
                let t = make_tree(branching, horizon)?;
                let n = t.policy_class.len();
                Ok(Instance {
                    spec,
                    mdp: t.mdp,
                    expert: t.expert,
                    reward_class: t.reward_class,
                    reward_names: numbered("leaf", n),
                    policy_class: t.policy_class,
                    policy_names: numbered("path", n),
                    initial_policy: n - 1,
                    fixed_suffix: None,
                })
            }
            EnvSpec::Cliff { horizon } => {
                let c = make_cliff(horizon)?;
                Ok(Instance {
                    spec,
                    mdp: c.mdp,
                    expert: c.expert,
                    reward_class: c.reward_class,
                    reward_names: vec!["r".into()],
                    policy_class: cliff_policy_class(horizon)?,
                    policy_names: ["a1", "a2-at-s0", "a2", "uniform"]
                        .map(String::from)
                        .to_vec(),
                    initial_policy: 1,
                    fixed_suffix: None,
                })
            }
            EnvSpec::Dante { horizon, eps } => {
                let d = make_dante(horizon)?;
                Ok(Instance {
                    spec,
                    mdp: d.mdp,
                    expert: d.expert,
                    reward_class: RewardClass::new(vec![d.reward])?,
                    reward_names: vec!["r".into()],
                    policy_class: dante_policy_class(horizon)?,
                    policy_names: ["up", "straight", "down"].map(String::from).to_vec(),
                    initial_policy: DANTE_DOWN,
                    fixed_suffix: Some(dante_erring_suffix(horizon, eps)?),
                })
            }
            EnvSpec::ForkedTree => {
                let ft = make_forked_tree()?;
                Ok(Instance {
                    spec,
                    mdp: ft.mdp,
                    expert: ft.expert,
                    reward_class: ft.reward_class,
                    reward_names: ["r", "r~"].map(String::from).to_vec(),
                    policy_class: ft.policy_class,
                    policy_names: ["pi_E", "pi_1", "pi_2"].map(String::from).to_vec(),
                    initial_policy: 1,
                    fixed_suffix: None,
                })
            }
            EnvSpec::RandomGrid {
                width,
                height,
                horizon,
                slip,
                seed,
            } => {
                let g = make_random_grid(width, height, horizon, slip, seed)?;
                let ns = g.mdp.num_states();
                let mut policy_class = (0..4)
                    .map(|a| StationaryPolicy::constant(ns, 4, a))
                    .collect::<Result<Vec<_>>>()?;
                policy_class.push(StationaryPolicy::uniform(ns, 4));
                policy_class.push(g.expert.at(1).clone());
                let r = g.mdp.require_true_reward()?.clone();
                Ok(Instance {
                    spec,
                    reward_class: RewardClass::new(vec![r.clone(), r.scaled(-1.0)])?,
                    reward_names: vec!["goal".into(), "avoid-goal".into()],
                    policy_class,
                    policy_names: ["up", "down", "left", "right", "uniform", "greedy"]
                        .map(String::from)
                        .to_vec(),
                    mdp: g.mdp,
                    expert: g.expert,
                    initial_policy: 4,
                    fixed_suffix: None,
                })
            }
            EnvSpec::RandomMdp {
                num_states,
                num_actions,
                horizon,
                seed,
            } => {
                let m = random_mdp(num_states, num_actions, horizon, seed)?;
                let mut rewards = vec![m.mdp.require_true_reward()?.clone()];
                rewards.extend(m.distractor_rewards);
                let mut policy_class = vec![m.expert.clone()];
                policy_class.extend((0..num_actions).map(|a| {
                    StationaryPolicy::constant(num_states, num_actions, a)
                        .expect("action index in range")
                }));
                policy_class.push(StationaryPolicy::uniform(num_states, num_actions));
                policy_class.extend(m.distractor_policies);
                let mut policy_names = vec!["expert".to_string()];
                policy_names.extend((0..num_actions).map(|a| format!("const{a}")));
                policy_names.push("uniform".into());
                policy_names.extend(numbered("random", policy_class.len() - policy_names.len()));
                let reward_names = {
                    let mut v = vec!["r".to_string()];
                    v.extend(numbered("f", rewards.len() - 1));
                    v
                };
                Ok(Instance {
                    spec,
                    expert: PolicySequence::repeat(&m.expert, horizon),
                    mdp: m.mdp,
                    reward_class: RewardClass::new(rewards)?,
                    reward_names,
                    initial_policy: policy_class.len() - 1,
                    policy_class,
                    policy_names,
                    fixed_suffix: None,
                })
            }
        }
    }

    /// Parses a spec from JSON, naming the offending field on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| configuration(format!("env spec: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_round_trips_through_json() {
        let spec = EnvSpec::Tree {
            branching: 2,
            horizon: 3,
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"kind":"tree","branching":2,"horizon":3}"#);
        assert_eq!(EnvSpec::from_json(&text).unwrap(), spec);
    }

    #[test]
    fn unknown_field_is_named() {
        let err = EnvSpec::from_json(r#"{"kind":"cliff","horizn":4}"#).unwrap_err();
        assert!(err.to_string().contains("horizn"), "{err}");
    }

    #[test]
    fn every_kind_builds() {
        let specs = [
            EnvSpec::Tree {
                branching: 2,
                horizon: 3,
            },
            EnvSpec::Cliff { horizon: 4 },
            EnvSpec::Dante {
                horizon: 5,
                eps: 0.05,
            },
            EnvSpec::ForkedTree,
            EnvSpec::RandomGrid {
                width: 3,
                height: 3,
                horizon: 6,
                slip: 0.1,
                seed: 1,
            },
            EnvSpec::RandomMdp {
                num_states: 5,
                num_actions: 2,
                horizon: 3,
                seed: 2,
            },
        ];
        for spec in specs {
            let inst = spec.build().unwrap();
            assert_eq!(inst.policy_class.len(), inst.policy_names.len());
            assert_eq!(inst.reward_class.len(), inst.reward_names.len());
            assert_eq!(inst.horizon(), spec.horizon());
            inst.expert_profile().unwrap();
        }
    }
}
