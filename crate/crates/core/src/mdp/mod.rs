//! Finite-horizon MDPs, exact DP oracles and the sampled simulator.

mod demos;
mod dp;
mod model;
mod sim;
mod types;

pub use demos::{empirical_expert_visitation, read_trajectories_jsonl, write_trajectories_jsonl};
pub use dp::{
    evaluate, evaluate_stationary, exact_policy_value, exact_visitation, optimal_policy,
    performance_gap, ValueTable,
};
pub(crate) use dp::{evaluate_unchecked, start_value};
pub(crate) use types::normalize_distribution;
pub use model::{MdpDocument, TabularMdp, TransitionTensor};
pub use sim::{reset_rollout, sample_index, sample_trajectory, Simulator};
pub use types::{
    argmax, argmin, PolicySequence, RewardClass, RewardFn, StationaryPolicy, Step, Trajectory,
    VisitationProfile, PROB_TOL,
};
