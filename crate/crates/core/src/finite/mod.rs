//! Two-digit version of the prefix-guessing game with a finite action set.
//!
//! Actions are the integers `0..=99` read as decimal strings, so `0..=9` guess
//! the first digit and `10..=99` guess both. The unknown goal is one of the 90
//! two-digit numbers. Feedback is deterministic, so the posterior evolves by
//! elimination.

mod agent;
mod env;
mod posterior;
mod rd;

pub use agent::{
    adaptive_threshold, rdts_select, run_finite_experiment, ts_select, Episode, ExperimentRun, FiniteAgent, FiniteStep,
    RdCache, Selection,
};
pub use env::{finite_reward, FinitePiEnv, ACTION_COUNT, HYPOTHESES};
pub use posterior::Posterior;
pub use rd::{distortion_matrix, rate_distortion, DistortionMatrix, RDSolution, BA_MAX_ITERATIONS, BA_TOLERANCE};
