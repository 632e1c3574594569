//! A finite-horizon MDP laboratory for moment-matching imitation learning.
//!
//! The crate is organized bottom-up:
//!
//! * [`mdp`]: tabular MDPs, exact DP oracles and a resettable simulator.
//! * [`envs`]: the tree, cliff, dante and forked-tree constructions plus
//!   seeded random environments.
//! * [`game`]: online learners, best responses and a matrix-game solver.
//! * [`irl`]: the algorithm family (IRL, MMDP, NRMM, FILTER, BC) and the
//!   error accounting used to audit their guarantees.
//! * [`bench`]: configuration, sweeps, golden tables and report emission.

pub mod bench;
pub mod envs;
pub mod error;
pub mod game;
pub mod irl;
pub mod mdp;
pub mod rng;

pub use error::{LabError, Result};
