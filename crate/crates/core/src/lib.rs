//! Simulation and analysis workbench for a curricular bandit with infinitely
//! many actions and unbounded rewards.
//!
//! The hidden goal is an infinite sequence of positive integers. Guessing its
//! length-`k` prefix pays `alpha^k`, a wrong length-`k` guess costs
//! `(alpha+1)/(tau-1) alpha^(k-1)`, and the empty guess pays 1. Goal digits
//! are geometric with mean `tau` a priori.
//!
//! * [`env`]: parameters, actions, goal sequence, reward rule.
//! * [`policy`]: agent state and the explore-then-commit, always-explore,
//!   per-step randomised, exploit-`m`-times and enumerative policies.
//! * [`enumeration`]: sum-then-lexicographic ordering of tuples.
//! * [`analytic`]: closed-form values and limits.
//! * [`lab`]: Monte-Carlo rollouts, value/regret estimators, the `m` sweep
//!   and the decoupling diagnostics.
//! * [`finite`]: a two-digit version of the game with exact posteriors,
//!   Thompson sampling, a Blahut-Arimoto rate-distortion solver and
//!   rate-distortion Thompson sampling.

pub mod analytic;
pub mod enumeration;
pub mod env;
pub mod error;
pub mod finite;
pub mod lab;
pub mod policy;
pub mod rng;
pub mod stats;

pub use env::{Action, Admissibility, EnvParams, GoalSequence, RewardOutcome};
pub use error::{Error, Result};
pub use policy::{ActionDistribution, AgentState, PolicySpec};

// The guide's chapters are compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/environment.md")]
    pub struct Environment;
    #[doc = include_str!("../../../book/src/policies.md")]
    pub struct Policies;
    #[doc = include_str!("../../../book/src/closed_forms.md")]
    pub struct ClosedForms;
    #[doc = include_str!("../../../book/src/monte_carlo.md")]
    pub struct MonteCarlo;
    #[doc = include_str!("../../../book/src/finite_experiment.md")]
    pub struct FiniteExperiment;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
