use serde::Serialize;

use super::env::{finite_reward, FinitePiEnv, HYPOTHESES};
use crate::error::{Error, Result};

const COUNT: usize = 90;

/// Beliefs over the 90 two-digit hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Posterior {
    weights: Vec<f64>,
}

fn slot(theta: u8) -> usize {
    (theta - 10) as usize
}

impl Posterior {
    pub fn uniform() -> Self {
        Self {
            weights: vec![1.0 / COUNT as f64; COUNT],
        }
    }

    /// Normalizes nonnegative weights indexed by `theta - 10`.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.len() != COUNT {
            return Err(Error::LengthMismatch {
                expected: COUNT,
                actual: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(crate::error::invalid("weights", "must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(crate::error::invalid("weights", "must not all be zero"));
        }
        Ok(Self {
            weights: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn point(theta: u8) -> Self {
        let mut weights = vec![0.0; COUNT];
        weights[slot(theta)] = 1.0;
        Self { weights }
    }

    pub fn weight(&self, theta: u8) -> f64 {
        if HYPOTHESES.contains(&theta) {
            self.weights[slot(theta)]
        } else {
            0.0
        }
    }

    /// Hypotheses with positive weight, ascending.
    pub fn support(&self) -> Vec<u8> {
        HYPOTHESES.filter(|&t| self.weights[slot(t)] > 0.0).collect()
    }

    pub fn support_weights(&self) -> Vec<f64> {
        self.weights.iter().copied().filter(|&w| w > 0.0).collect()
    }

    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    /// Bit `theta - 10` is set when `theta` is in the support.
    pub fn support_mask(&self) -> u128 {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .fold(0, |mask, (i, _)| mask | 1 << i)
    }

    pub fn identified(&self) -> Option<u8> {
        match self.support()[..] {
            [theta] => Some(theta),
            _ => None,
        }
    }

    /// First digits still in play.
    pub fn decades(&self) -> Vec<u8> {
        let mut d: Vec<u8> = self.support().iter().map(|t| t / 10).collect();
        d.dedup();
        d
    }

    /// Shannon entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        -self
            .weights
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|w| w * w.log2())
            .sum::<f64>()
    }

    /// Draws `theta` by inverting the CDF at `u` in `[0, 1)`.
    pub fn sample(&self, u: f64) -> u8 {
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                last = i;
                if u < acc {
                    break;
                }
            }
        }
        last as u8 + 10
    }

    /// Keeps the hypotheses under which `a` would have paid `observed`.
    pub fn update(&self, a: u8, observed: f64, env: &FinitePiEnv) -> Result<Self> {
        let consistent = |theta: u8| {
            let r = finite_reward(a, theta, env);
            (r - observed).abs() <= 1e-9 * r.abs().max(1.0)
        };
        let mut weights: Vec<f64> = HYPOTHESES
            .map(|t| if consistent(t) { self.weights[slot(t)] } else { 0.0 })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptyPosterior { action: a, reward: observed });
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { weights })
    }
}
