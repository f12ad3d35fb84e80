//! Tabular safe reinforcement learning under step-wise violation constraints.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! core: models, exact safety structures, the learners and the oracles used
//! to check them. File formats, experiment orchestration and the CLI live in
//! the `safe-rl-harness` crate.

#![no_std]
#![warn(rust_2018_idioms)]

extern crate alloc;

pub mod baselines;
pub mod env;
mod error;
pub mod game;
pub mod mdp;
pub mod metrics;
pub mod nash;
pub mod oracle;
pub mod safety;
pub mod stats;
pub mod srf_ucrl;
pub mod sucbvi;

pub use error::{Error, Result};
pub use mdp::{
    episode_return, episode_violation, sample_episode, DeterministicPolicy, MixedPolicy, NoiseModel, Policy,
    SafetySpec, Step, TabularMdp, Trajectory,
};
pub use safety::{
    check_feasibility, compute_safe_actions, compute_supports, compute_unsafe_sets, safe_optimal_plan,
    unconstrained_plan, Plan, SafetyStructures, Supports,
};
pub use metrics::{EpisodeRecord, RfeCheckpoint, RunMetrics};
pub use stats::{LearnerStats, TieBreak};
pub use sucbvi::{Sucbvi, SucbviBonuses, SucbviConfig};
pub use srf_ucrl::{plan_from_output, RfeBonuses, RfeConfig, RfeExplorer, RfeOutput};
pub use game::{AdversaryMode, GameConfig, GamePolicy, GameSafetyStructures, TabularGame};
pub use nash::{solve_matrix_game, NashSolution};
