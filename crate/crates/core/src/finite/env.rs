use serde::Serialize;

use crate::error::{invalid, Result};

/// Number of actions, `0..=99`.
pub const ACTION_COUNT: usize = 100;
/// Two-digit hypotheses `10..=99`.
pub const HYPOTHESES: std::ops::RangeInclusive<u8> = 10..=99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinitePiEnv {
    alpha: f64,
    tau: f64,
    truth: u8,
}

impl Default for FinitePiEnv {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            tau: 4.0,
            truth: 31,
        }
    }
}

impl FinitePiEnv {
    pub fn new(alpha: f64, tau: f64, truth: u8) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(invalid("alpha", format!("must be finite and > 1, got {alpha}")));
        }
        if !(tau.is_finite() && tau > 1.0) {
            return Err(invalid("tau", format!("must be finite and > 1, got {tau}")));
        }
        if !HYPOTHESES.contains(&truth) {
            return Err(invalid("truth", format!("must be a two-digit number, got {truth}")));
        }
        Ok(Self { alpha, tau, truth })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn truth(&self) -> u8 {
        self.truth
    }

    pub fn with_truth(&self, truth: u8) -> Result<Self> {
        Self::new(self.alpha, self.tau, truth)
    }

    /// Reward of the optimal action, `alpha^2`.
    pub fn optimal_reward(&self) -> f64 {
        self.alpha * self.alpha
    }
}

/// Reward of action `a` when the goal is `theta`.
///
/// Panics if `a > 99` or `theta` is not two-digit.
pub fn finite_reward(a: u8, theta: u8, env: &FinitePiEnv) -> f64 {
    assert!((a as usize) < ACTION_COUNT, "action {a} is outside 0..=99");
    assert!(HYPOTHESES.contains(&theta), "hypothesis {theta} is not two-digit");
    let (k, matched) = if a < 10 { (1, a == theta / 10) } else { (2, a == theta) };
    if matched {
        env.alpha.powi(k)
    } else {
        -(env.alpha + 1.0) / (env.tau - 1.0) * env.alpha.powi(k - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reward_examples() {
        let env = FinitePiEnv::default();
        assert_eq!(finite_reward(31, 31, &env), 4.0);
        assert_eq!(finite_reward(3, 31, &env), 2.0);
        assert_eq!(finite_reward(7, 31, &env), -1.0);
        assert_eq!(finite_reward(0, 31, &env), -1.0);
        assert_eq!(finite_reward(32, 31, &env), -2.0);
    }

    #[test]
    fn truth_must_be_two_digit() {
        assert!(FinitePiEnv::new(2.0, 4.0, 9).is_err());
        assert!(FinitePiEnv::new(2.0, 4.0, 100).is_err());
        assert!(FinitePiEnv::new(1.0, 4.0, 31).is_err());
    }
}
