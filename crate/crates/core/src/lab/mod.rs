//! Monte-Carlo evaluation of the curricular bandit.
//!
//! Trial `i` of a run draws its goal digits from stream `(seed, i, Goal)` and
//! its policy coin flips from `(seed, i, Policy)`. Two policies evaluated with
//! the same seed therefore face the same goals (common random numbers), and
//! results do not depend on how trials are scheduled across threads.

mod diagnostics;
mod estimate;
mod rollout;
mod sweep;

pub use diagnostics::{conjecture_diagnostics, Diagnostics};
pub use estimate::{estimate_regret, estimate_value, RegretEstimate, ValueEstimate};
pub use rollout::{rollout, rollout_with_trace, GoalMode, RolloutConfig, RolloutSample, StepRecord};
pub use sweep::{golden_section_max, sweep_m, sweep_m_with, Refinement, SweepOptions, SweepResult};
