use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::policy::PolicySpec;
use crate::stats::{summarize, EstimateResult};

use super::rollout::{rollout, RolloutConfig, RolloutSample};

/// Monte-Carlo value of one policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValueEstimate {
    pub discounted: EstimateResult,
    pub undiscounted: EstimateResult,
}

impl ValueEstimate {
    pub fn trials(&self) -> usize {
        self.discounted.trials
    }
}

fn samples(config: &RolloutConfig) -> Result<Vec<RolloutSample>> {
    config.validate()?;
    // Indexed collect keeps trial order, so aggregation is schedule-independent.
    (0..config.trials)
        .into_par_iter()
        .map(|i| rollout(config, i))
        .collect()
}

fn summarize_pair(samples: &[RolloutSample]) -> ValueEstimate {
    let disc: Vec<f64> = samples.iter().map(|s| s.discounted).collect();
    let undisc: Vec<f64> = samples.iter().map(|s| s.undiscounted).collect();
    ValueEstimate {
        discounted: summarize(&disc),
        undiscounted: summarize(&undisc),
    }
}

/// Mean return over `config.trials` independent rollouts.
pub fn estimate_value(config: &RolloutConfig) -> Result<ValueEstimate> {
    Ok(summarize_pair(&samples(config)?))
}

/// `V(policy_a) - V(policy_b)` under common random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegretEstimate {
    pub value_a: ValueEstimate,
    pub value_b: ValueEstimate,
    /// Per-trial differences of undiscounted returns.
    pub paired: EstimateResult,
    /// Per-trial differences of discounted returns.
    pub paired_discounted: EstimateResult,
    /// `sqrt(se_a^2 + se_b^2)` of the undiscounted values, ignoring the
    /// positive correlation induced by shared goals.
    pub pooled_stderr: f64,
}

impl RegretEstimate {
    pub fn mean(&self) -> f64 {
        self.paired.mean
    }
}

/// Regret of `policy_a` against `policy_b`, both run with `shared`'s
/// environment, horizon, trial count and seed.
pub fn estimate_regret(policy_a: PolicySpec, policy_b: PolicySpec, shared: &RolloutConfig) -> Result<RegretEstimate> {
    let a = samples(&shared.with_policy(policy_a))?;
    let b = samples(&shared.with_policy(policy_b))?;
    if a.len() != b.len() {
        return Err(invalid("trials", "paired runs produced different trial counts"));
    }
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.undiscounted - y.undiscounted).collect();
    let diff_disc: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.discounted - y.discounted).collect();
    let value_a = summarize_pair(&a);
    let value_b = summarize_pair(&b);
    Ok(RegretEstimate {
        value_a,
        value_b,
        paired: summarize(&diff),
        paired_discounted: summarize(&diff_disc),
        pooled_stderr: value_a.undiscounted.stderr.hypot(value_b.undiscounted.stderr),
    })
}
