use rand::Rng;
use serde::Serialize;

use crate::env::{Action, EnvParams, GoalSequence};
use crate::error::{invalid, Result};
use crate::policy::{move_law, AgentState, Move, PolicySpec};
use crate::rng::{self, StreamRole};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GoalMode {
    /// Goal digits drawn from the prior, one stream per trial.
    Sampled,
    /// The same injected goal in every trial.
    Fixed(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RolloutConfig {
    pub params: EnvParams,
    pub policy: PolicySpec,
    pub horizon: u64,
    pub trials: u64,
    pub master_seed: u64,
    pub goal_mode: GoalMode,
}

impl RolloutConfig {
    pub fn new(params: EnvParams, policy: PolicySpec, horizon: u64, trials: u64, master_seed: u64) -> Result<Self> {
        let config = Self {
            params,
            policy,
            horizon,
            trials,
            master_seed,
            goal_mode: GoalMode::Sampled,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_goal(mut self, goal_mode: GoalMode) -> Self {
        self.goal_mode = goal_mode;
        self
    }

    pub fn with_policy(&self, policy: PolicySpec) -> Self {
        Self {
            policy,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials", "at least one trial is required"));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon", "must be at least 1"));
        }
        self.policy.validate()
    }

    fn goal(&self, trial_index: u64) -> Result<GoalSequence> {
        match &self.goal_mode {
            GoalMode::Sampled => Ok(GoalSequence::for_trial(
                self.params.tau(),
                self.master_seed,
                trial_index,
            )),
            GoalMode::Fixed(digits) => GoalSequence::fixed(digits.clone()),
        }
    }
}

/// Returns of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RolloutSample {
    pub discounted: f64,
    pub undiscounted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: u64,
    pub action: Action,
    pub reward: f64,
    pub exploiting: bool,
    /// Length of the confirmed prefix after the step.
    pub known_len: usize,
}

/// Plays trial `trial_index` of `config` for `horizon` steps.
pub fn rollout(config: &RolloutConfig, trial_index: u64) -> Result<RolloutSample> {
    run(config, trial_index, None)
}

/// As [`rollout`], also returning the per-step log.
pub fn rollout_with_trace(config: &RolloutConfig, trial_index: u64) -> Result<(RolloutSample, Vec<StepRecord>)> {
    let mut trace = Vec::with_capacity(config.horizon as usize);
    let sample = run(config, trial_index, Some(&mut trace))?;
    Ok((sample, trace))
}

fn run(config: &RolloutConfig, trial_index: u64, mut trace: Option<&mut Vec<StepRecord>>) -> Result<RolloutSample> {
    debug_assert!(trial_index < config.trials);
    let params = &config.params;
    let gamma = params.gamma();
    let mut goal = config.goal(trial_index)?;
    let mut coins = rng::stream(config.master_seed, trial_index, StreamRole::Policy);
    let mut state = AgentState::new();
    let mut discount = 1.0;
    let mut discounted = 0.0;
    let mut undiscounted = 0.0;

    for step in 0..config.horizon {
        // One coin per step keeps the policy stream aligned across policies.
        let u: f64 = coins.random();
        let mv = move_law(&config.policy, &state).choose(u);
        let known = state.known_prefix.len();
        let (value, matched) = match &mv {
            Move::Exploit => (params.hit_reward(known)?, true),
            Move::Explore(d) => {
                if goal.digit(known)? == *d {
                    (params.hit_reward(known + 1)?, true)
                } else {
                    (params.miss_reward(known + 1)?, false)
                }
            }
            Move::Guess(a) => {
                let out = crate::env::reward(a, &mut goal, params)?;
                (out.value, out.matched)
            }
        };
        discounted += discount * value;
        undiscounted += value;
        if let Some(log) = trace.as_deref_mut() {
            log.push(StepRecord {
                step,
                action: mv.action(&state),
                reward: value,
                exploiting: mv == Move::Exploit,
                known_len: known + usize::from(matched && mv != Move::Exploit),
            });
        }
        state.advance(&mv, matched)?;
        discount *= gamma;
    }
    if !(discounted.is_finite() && undiscounted.is_finite()) {
        return Err(crate::error::Error::Overflow {
            what: format!("return of trial {trial_index}"),
        });
    }
    Ok(RolloutSample {
        discounted,
        undiscounted,
    })
}
