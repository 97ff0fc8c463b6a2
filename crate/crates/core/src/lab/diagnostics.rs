//! Decoupling diagnostics for the exploit-count value.
//!
//! `f_n(m; T)` is the expected contribution of the `n`-th discovery block of
//! the non-stationary policy:
//!
//! `E[ 1{1 + mu_1 + ... + mu_n + n m <= T} ((m+1) alpha^(n-1) - (mu_n - 1) c alpha^(n-1)) ]`
//!
//! with `c = (alpha+1)/(tau-1)`. `f~_n` replaces `mu_n` inside the indicator
//! by an independent copy, which makes it factor as
//! `P(1 + mu_1 + ... + mu_{n-1} + mu~_n + n m <= T) (m - alpha) alpha^(n-1)`.

use serde::Serialize;

use crate::env::EnvParams;
use crate::error::{invalid, Result};
use crate::rng::{self, StreamRole};
use crate::stats::{summarize, EstimateResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub n: u32,
    pub m: f64,
    pub horizon: u64,
    pub f_n: EstimateResult,
    pub f_tilde_n: EstimateResult,
    /// Empirical frequency of the decoupled indicator.
    pub probability_estimate: EstimateResult,
    /// Exact `P(1 + NB(n, 1/tau) + n m <= T)`.
    pub probability_term: f64,
    /// `(m - alpha) alpha^(n-1)`.
    pub analytic_factor: f64,
}

impl Diagnostics {
    /// Closed form of `f~_n`.
    pub fn f_tilde_analytic(&self) -> f64 {
        self.probability_term * self.analytic_factor
    }
}

/// `P(S <= budget)` where `S` is a sum of `n` geometric(mean `tau`) variables,
/// i.e. `P(Binomial(budget, 1/tau) >= n)`.
pub fn negative_binomial_cdf(n: u32, tau: f64, budget: f64) -> f64 {
    if budget < n as f64 {
        return 0.0;
    }
    let trials = budget.floor() as u64;
    let q = 1.0 / tau;
    let log_odds = (q / (1.0 - q)).ln();
    let mut log_pmf = trials as f64 * (1.0 - q).ln();
    let mut below = 0.0;
    for k in 0..n as u64 {
        below += log_pmf.exp();
        log_pmf += ((trials - k) as f64 / (k + 1) as f64).ln() + log_odds;
    }
    (1.0 - below).clamp(0.0, 1.0)
}

pub fn conjecture_diagnostics(
    params: &EnvParams,
    n: u32,
    m: f64,
    horizon: u64,
    trials: u64,
    seed: u64,
) -> Result<Diagnostics> {
    if n == 0 {
        return Err(invalid("n", "block index must be at least 1"));
    }
    if !(m.is_finite() && m >= 0.0) {
        return Err(invalid("m", format!("must be finite and >= 0, got {m}")));
    }
    if trials == 0 {
        return Err(invalid("trials", "at least one trial is required"));
    }
    let (alpha, tau) = (params.alpha(), params.tau());
    let level = alpha.powi(n as i32 - 1);
    let cost = params.miss_cost_scale();
    let budget = horizon as f64 - 1.0 - n as f64 * m;

    let mut f = Vec::with_capacity(trials as usize);
    let mut f_tilde = Vec::with_capacity(trials as usize);
    let mut hits = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let mut rng = rng::stream(seed, trial, StreamRole::Auxiliary);
        let mut earlier = 0.0;
        for _ in 1..n {
            earlier += rng::geometric(&mut rng, tau) as f64;
        }
        let last = rng::geometric(&mut rng, tau) as f64;
        let copy = rng::geometric(&mut rng, tau) as f64;
        let payoff = (m + 1.0) * level - (last - 1.0) * cost * level;
        let coupled = earlier + last <= budget;
        let decoupled = earlier + copy <= budget;
        f.push(if coupled { payoff } else { 0.0 });
        f_tilde.push(if decoupled { payoff } else { 0.0 });
        hits.push(if decoupled { 1.0 } else { 0.0 });
    }
    Ok(Diagnostics {
        n,
        m,
        horizon,
        f_n: summarize(&f),
        f_tilde_n: summarize(&f_tilde),
        probability_estimate: summarize(&hits),
        probability_term: negative_binomial_cdf(n, tau, budget),
        analytic_factor: (m - alpha) * level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force convolution of geometric pmfs.
    fn cdf_by_convolution(n: u32, tau: f64, budget: usize) -> f64 {
        let q = 1.0 / tau;
        let mut pmf = vec![0.0; budget + 1];
        pmf[0] = 1.0;
        for _ in 0..n {
            let mut next = vec![0.0; budget + 1];
            for (s, &p) in pmf.iter().enumerate() {
                for j in 1..=budget - s.min(budget) {
                    next[s + j] += p * q * (1.0 - q).powi(j as i32 - 1);
                }
            }
            pmf = next;
        }
        pmf.iter().sum()
    }

    #[test]
    fn nb_cdf_matches_convolution() {
        for (n, tau, budget) in [(1, 4.0, 10), (3, 4.0, 20), (5, 2.0, 12), (2, 1.5, 3)] {
            let exact = cdf_by_convolution(n, tau, budget);
            assert!((negative_binomial_cdf(n, tau, budget as f64) - exact).abs() < 1e-12);
        }
        assert_eq!(negative_binomial_cdf(3, 4.0, 2.0), 0.0);
    }

    #[test]
    fn m_equal_alpha_kills_the_factor() {
        let p = EnvParams::undiscounted(2.0, 4.0).unwrap();
        let d = conjecture_diagnostics(&p, 3, 2.0, 100, 2000, 1).unwrap();
        assert_eq!(d.analytic_factor, 0.0);
        assert_eq!(d.f_tilde_analytic(), 0.0);
        assert!(d.f_tilde_n.within(0.0, 3.0));
    }

    #[test]
    fn zero_block_index_is_rejected() {
        let p = EnvParams::undiscounted(2.0, 4.0).unwrap();
        assert!(conjecture_diagnostics(&p, 0, 1.0, 100, 10, 1).is_err());
    }
}
