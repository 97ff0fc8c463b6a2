//! The curricular bandit: parameters, actions, the hidden goal sequence and
//! the deterministic reward rule.
//!
//! An action is a finite tuple of positive integers ("digits"). Playing the
//! length-`k` prefix of the hidden goal `a*` pays `alpha^k`; any other
//! length-`k` tuple costs `(alpha + 1) / (tau - 1) * alpha^(k-1)`. The empty
//! action always pays 1.

use std::fmt;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::rng::{self, StreamRole};

/// Reward base `alpha`, prior mean `tau` and discount `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvParams {
    alpha: f64,
    tau: f64,
    gamma: f64,
}

/// Outcome of the admissibility range check `tau < gamma (alpha-1) / (2 (1-gamma))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// Upper end of the admissible `tau` range; infinite when `gamma = 1`.
    pub bound: f64,
    /// `bound - tau`; negative when the check fails.
    pub margin: f64,
}

impl EnvParams {
    pub fn new(alpha: f64, tau: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(invalid("alpha", format!("must be finite and > 1, got {alpha}")));
        }
        if !(tau.is_finite() && tau > 1.0) {
            return Err(invalid("tau", format!("must be finite and > 1, got {tau}")));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(invalid("gamma", format!("must lie in (0, 1], got {gamma}")));
        }
        Ok(Self { alpha, tau, gamma })
    }

    /// Undiscounted instance, `gamma = 1`.
    pub fn undiscounted(alpha: f64, tau: f64) -> Result<Self> {
        Self::new(alpha, tau, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.alpha, self.tau, gamma)
    }

    /// Per-unit cost multiplier `(alpha + 1) / (tau - 1)`.
    pub fn miss_cost_scale(&self) -> f64 {
        (self.alpha + 1.0) / (self.tau - 1.0)
    }

    /// `alpha^k`, the payoff of the correct length-`k` prefix.
    pub fn hit_reward(&self, k: usize) -> Result<f64> {
        finite(self.alpha.powi(len_exponent(k)?), || format!("alpha^{k}"))
    }

    /// Payoff of a wrong length-`k` guess (`k >= 1`).
    pub fn miss_reward(&self, k: usize) -> Result<f64> {
        debug_assert!(k >= 1);
        let value = -self.miss_cost_scale() * self.alpha.powi(len_exponent(k)? - 1);
        finite(value, || format!("miss cost at length {k}"))
    }

    /// Checks the admissible `tau` range. Violations are reported, not rejected.
    pub fn admissibility(&self) -> Admissibility {
        admissibility_check(self)
    }
}

pub fn admissibility_check(params: &EnvParams) -> Admissibility {
    if params.gamma >= 1.0 {
        return Admissibility {
            admissible: true,
            bound: f64::INFINITY,
            margin: f64::INFINITY,
        };
    }
    let bound = params.gamma * (params.alpha - 1.0) / (2.0 * (1.0 - params.gamma));
    Admissibility {
        admissible: params.tau < bound,
        bound,
        margin: bound - params.tau,
    }
}

fn len_exponent(k: usize) -> Result<i32> {
    i32::try_from(k).map_err(|_| Error::Overflow {
        what: format!("action length {k}"),
    })
}

fn finite(value: f64, what: impl FnOnce() -> String) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow { what: what() })
    }
}

/// A tuple of positive integers; the empty tuple is the action `∅`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize)]
pub struct Action(Vec<u32>);

impl Action {
    pub fn new(digits: Vec<u32>) -> Result<Self> {
        if digits.iter().any(|&d| d == 0) {
            return Err(invalid("action", "digits must be positive integers"));
        }
        Ok(Self(digits))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// This action with one more digit appended.
    pub fn extended(&self, digit: u32) -> Self {
        debug_assert!(digit >= 1);
        let mut digits = self.0.clone();
        digits.push(digit);
        Self(digits)
    }

    pub(crate) fn from_digits_unchecked(digits: Vec<u32>) -> Self {
        Self(digits)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("()");
        }
        f.write_str("(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone)]
enum GoalSource {
    Sampled { rng: Box<ChaCha8Rng>, mean: f64 },
    Fixed { digits: Vec<u32> },
}

/// The hidden goal `a*`, materialised one digit at a time.
///
/// In sampled mode digit `k` is always the `k`-th draw of the goal stream, so
/// the realised prefix does not depend on which rewards were queried first.
#[derive(Debug, Clone)]
pub struct GoalSequence {
    realized: Vec<u32>,
    source: GoalSource,
}

impl GoalSequence {
    /// Digits drawn i.i.d. geometric with mean `tau` from `rng`.
    pub fn sampled(tau: f64, rng: ChaCha8Rng) -> Self {
        Self {
            realized: Vec::new(),
            source: GoalSource::Sampled {
                rng: Box::new(rng),
                mean: tau,
            },
        }
    }

    /// Goal stream of trial `trial_index` under `master_seed`.
    pub fn for_trial(tau: f64, master_seed: u64, trial_index: u64) -> Self {
        Self::sampled(tau, rng::stream(master_seed, trial_index, StreamRole::Goal))
    }

    /// A goal with injected digits; asking past the end is a configuration error.
    pub fn fixed(digits: Vec<u32>) -> Result<Self> {
        if digits.iter().any(|&d| d == 0) {
            return Err(invalid("goal", "injected digits must be positive"));
        }
        Ok(Self {
            realized: Vec::new(),
            source: GoalSource::Fixed { digits },
        })
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self.source, GoalSource::Sampled { .. })
    }

    pub fn realized_prefix(&self) -> &[u32] {
        &self.realized
    }

    /// Materialises and returns the next goal digit.
    pub fn sample_next_goal_digit(&mut self) -> Result<u32> {
        let next = self.realized.len();
        let digit = match &mut self.source {
            GoalSource::Sampled { rng, mean } => rng::geometric(rng.as_mut(), *mean),
            GoalSource::Fixed { digits } => *digits.get(next).ok_or(Error::GoalExhausted {
                available: digits.len(),
            })?,
        };
        self.realized.push(digit);
        Ok(digit)
    }

    /// Goal digit at zero-based `position`, sampling on demand.
    pub fn digit(&mut self, position: usize) -> Result<u32> {
        while self.realized.len() <= position {
            self.sample_next_goal_digit()?;
        }
        Ok(self.realized[position])
    }

    /// Whether `action` equals the goal prefix of the same length. Stops
    /// materialising at the first mismatch.
    pub fn matches(&mut self, action: &Action) -> Result<bool> {
        for (i, &d) in action.digits().iter().enumerate() {
            if self.digit(i)? != d {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Realised reward of one action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RewardOutcome {
    pub value: f64,
    /// The action equals the goal prefix of its length.
    pub matched: bool,
}

/// Reward of playing `action` against `goal`.
pub fn reward(action: &Action, goal: &mut GoalSequence, params: &EnvParams) -> Result<RewardOutcome> {
    let k = action.len();
    if k == 0 {
        return Ok(RewardOutcome {
            value: 1.0,
            matched: true,
        });
    }
    if goal.matches(action)? {
        Ok(RewardOutcome {
            value: params.hit_reward(k)?,
            matched: true,
        })
    } else {
        Ok(RewardOutcome {
            value: params.miss_reward(k)?,
            matched: false,
        })
    }
}
