//! Closed-form values of the curricular bandit.
//!
//! Notation used throughout: `g = E[gamma^mu]` is the expected discount
//! accrued while discovering one digit, and `r = alpha * g` is the growth
//! ratio of the expected discounted discovery reward from one digit to the
//! next. Every function here has a Monte-Carlo counterpart in [`crate::lab`].

use serde::Serialize;

use crate::env::EnvParams;
use crate::error::{invalid, Error, Result};

/// Assumption tag attached to values that ignore truncation of the
/// discovery phase by the horizon.
pub const LARGE_HORIZON: &str = "T >> sum of discovery times";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Horizon {
    Finite(u64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueResult {
    pub value: f64,
    pub horizon: Horizon,
    pub discounted: bool,
    pub assumptions: Vec<String>,
}

impl ValueResult {
    fn finite(value: f64, horizon: u64, discounted: bool, assumptions: &[&str]) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Overflow {
                what: format!("closed-form value at horizon {horizon}"),
            });
        }
        Ok(Self {
            value,
            horizon: Horizon::Finite(horizon),
            discounted,
            assumptions: assumptions.iter().map(|s| s.to_string()).collect(),
        })
    }
}

/// `E[gamma^mu]` for `mu` geometric with mean `tau`: `gamma / ((1-gamma) tau + gamma)`.
pub fn expected_discount_factor(gamma: f64, tau: f64) -> f64 {
    gamma / ((1.0 - gamma) * tau + gamma)
}

/// Undiscounted value of explore-`N`-then-commit:
/// `-alpha (alpha^N - 1)/(alpha - 1) + (T - N tau) alpha^N`. `N = 0` gives `T`.
pub fn value_pi_n_undiscounted(n: u32, horizon: u64, params: &EnvParams) -> Result<ValueResult> {
    if n == 0 {
        return ValueResult::finite(horizon as f64, horizon, false, &[]);
    }
    let (alpha, tau) = (params.alpha(), params.tau());
    let a_n = alpha.powi(n as i32);
    let value = -alpha * (a_n - 1.0) / (alpha - 1.0) + (horizon as f64 - n as f64 * tau) * a_n;
    ValueResult::finite(value, horizon, false, &[LARGE_HORIZON])
}

/// Expected discounted reward of discovering digit `k`: `(alpha g)^k`.
pub fn discovery_reward_term(k: u32, params: &EnvParams) -> f64 {
    let g = expected_discount_factor(params.gamma(), params.tau());
    (params.alpha() * g).powi(k as i32)
}

/// Expected discounted cost of the failed guesses made while searching for
/// digit `k`: `(alpha + 1) alpha^(k-1) g^k`.
pub fn exploration_cost_term(k: u32, params: &EnvParams) -> f64 {
    debug_assert!(k >= 1);
    let g = expected_discount_factor(params.gamma(), params.tau());
    let alpha = params.alpha();
    (alpha + 1.0) * alpha.powi(k as i32 - 1) * g.powi(k as i32)
}

/// Discounted value of explore-`N`-then-commit, `gamma < 1`.
///
/// Assembled from its parts: the opening `∅` play, the discovery rewards,
/// the exploration costs, and the exploitation tail
/// `alpha^N (gamma g^N - gamma^T) / (1 - gamma)`.
pub fn value_pi_n_discounted(n: u32, horizon: u64, params: &EnvParams) -> Result<ValueResult> {
    let gamma = params.gamma();
    if gamma >= 1.0 {
        return Err(invalid("gamma", "discounted value needs gamma < 1"));
    }
    let g = expected_discount_factor(gamma, params.tau());
    let gamma_t = gamma.powf(horizon as f64);
    if n == 0 {
        return ValueResult::finite((1.0 - gamma_t) / (1.0 - gamma), horizon, true, &[]);
    }
    let mut value = 1.0;
    for k in 1..=n {
        value += discovery_reward_term(k, params) - exploration_cost_term(k, params);
    }
    let a_n = params.alpha().powi(n as i32);
    value += a_n * (gamma * g.powi(n as i32) - gamma_t) / (1.0 - gamma);
    let mut tags = vec![LARGE_HORIZON];
    if !params.admissibility().admissible {
        tags.push("tau outside admissible range");
    }
    ValueResult::finite(value, horizon, true, &tags)
}

/// Dispatches on `gamma`.
pub fn value_pi_n(n: u32, horizon: u64, params: &EnvParams) -> Result<ValueResult> {
    if params.gamma() >= 1.0 {
        value_pi_n_undiscounted(n, horizon, params)
    } else {
        value_pi_n_discounted(n, horizon, params)
    }
}

/// `T -> infinity` limit of `V(pi_{N2}) - V(pi_{N1})` for `gamma < 1`.
pub fn value_gap_pi_n_limit(n1: u32, n2: u32, params: &EnvParams) -> Result<f64> {
    let gamma = params.gamma();
    if gamma >= 1.0 {
        return Err(invalid("gamma", "the limiting gap is defined for gamma < 1"));
    }
    if n1 == n2 {
        return Ok(0.0);
    }
    let (alpha, tau) = (params.alpha(), params.tau());
    let r = alpha * expected_discount_factor(gamma, tau);
    let coefficient = gamma * (1.0 / (1.0 - gamma) + 1.0 / ((1.0 - gamma) * tau + (1.0 - alpha) * gamma));
    let gap = coefficient * (r.powi(n2 as i32) - r.powi(n1 as i32));
    if gap.is_finite() {
        Ok(gap)
    } else {
        Err(Error::Overflow {
            what: format!("limiting gap between N={n1} and N={n2}"),
        })
    }
}

/// Upper bound on the value of the always-exploring policy.
///
/// For `gamma = 1` the bound is 0. For `gamma < 1` it is
/// `sum_N (1 - h sum_{k=1}^N r^(k-1)) P(N discoveries by T)`, with
/// `h = 1/((1-gamma) tau + gamma)`. Each exploration step succeeds with
/// probability `1/tau` independently, so the number of discoveries among the
/// `T - 1` steps after the opening play is binomial.
pub fn explore_value_bound(horizon: u64, params: &EnvParams) -> Result<ValueResult> {
    let gamma = params.gamma();
    if gamma >= 1.0 {
        return ValueResult::finite(0.0, horizon, false, &[]);
    }
    let tau = params.tau();
    let h = 1.0 / ((1.0 - gamma) * tau + gamma);
    let r = params.alpha() * gamma * h;
    let steps = horizon.saturating_sub(1);
    let q = 1.0 / tau;
    let log_odds = (q / (1.0 - q)).ln();
    let mut log_pmf = steps as f64 * (1.0 - q).ln();
    let mut bound = 0.0;
    for n in 0..=steps {
        let pmf = log_pmf.exp();
        // pmf * (1 - h * (r^n - 1)/(r - 1)), with r^n * pmf taken in log space.
        let geometric_sum = if (r - 1.0).abs() < 1e-15 {
            n as f64 * pmf
        } else {
            ((log_pmf + n as f64 * r.ln()).exp() - pmf) / (r - 1.0)
        };
        bound += pmf - h * geometric_sum;
        if n < steps {
            log_pmf += ((steps - n) as f64 / (n + 1) as f64).ln() + log_odds;
        }
    }
    ValueResult::finite(bound, horizon, true, &[])
}

/// `p = (m + 1) / (m + tau)`, the exploit probability matched to `m`.
pub fn p_from_m(m: f64, tau: f64) -> Result<f64> {
    if !(m.is_finite() && m >= 0.0) {
        return Err(invalid("m", format!("must be finite and >= 0, got {m}")));
    }
    Ok((m + 1.0) / (m + tau))
}

/// Inverse of [`p_from_m`]: `m = (p tau - 1) / (1 - p)` for `p` in `[1/tau, 1)`.
pub fn m_from_p(p: f64, tau: f64) -> Result<f64> {
    if !(p >= 1.0 / tau && p < 1.0) {
        return Err(invalid("p", format!("must lie in [1/tau, 1) = [{}, 1), got {p}", 1.0 / tau)));
    }
    Ok(((p * tau - 1.0) / (1.0 - p)).max(0.0))
}

/// Conjectured limit of the optimal exploit probability, `(alpha+1)/(alpha+tau)`.
pub fn conjecture_limit(params: &EnvParams) -> f64 {
    (params.alpha() + 1.0) / (params.alpha() + params.tau())
}

/// A truncated series with a bound on what was cut off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Upper bound on the omitted tail; infinite if the terms had not started
    /// to decay when the series was cut.
    pub remainder_bound: f64,
    pub terms_used: usize,
}

/// Expected number of guesses the non-curricular policy needs for a length-`n`
/// goal prefix under the geometric prior.
///
/// Shell `j` holds the `c_j = C(n+j-1, n-1)` tuples with digit sum `n + j`,
/// each with prior mass `tau^-n (1 - 1/tau)^j`, occupying enumeration
/// positions `s_j + 1 ..= s_j + c_j`.
pub fn expected_mu_prime(n: u32, tau: f64, max_terms: usize) -> Result<SeriesValue> {
    if n == 0 {
        return Err(invalid("N", "tuple length must be positive"));
    }
    if !(tau > 1.0) {
        return Err(invalid("tau", "must be > 1"));
    }
    let q = 1.0 - 1.0 / tau;
    let base = tau.powi(-(n as i32));
    let mut shell = 1.0_f64; // c_0
    let mut before = 0.0_f64; // s_j
    let mut decay = 1.0_f64; // q^j
    let mut sum = 0.0;
    let mut previous = 0.0;
    let mut ratio = f64::INFINITY;
    let mut used = 0;
    for j in 0..max_terms {
        let position_sum = shell * (2.0 * before + shell + 1.0) / 2.0;
        let term = base * decay * position_sum;
        if !term.is_finite() {
            return Err(Error::Overflow {
                what: format!("binomial shell {j} of the enumeration series"),
            });
        }
        sum += term;
        used = j + 1;
        if previous > 0.0 {
            ratio = term / previous;
        }
        previous = term;
        if term < 1e-12 * sum && ratio < 1.0 {
            break;
        }
        before += shell;
        shell *= (n as f64 + j as f64) / (j as f64 + 1.0);
        decay *= q;
    }
    let remainder_bound = if ratio < 1.0 {
        previous * ratio / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    Ok(SeriesValue {
        value: sum,
        remainder_bound,
        terms_used: used,
    })
}

/// Regret of a policy with expected total `sum_a` against a reference with
/// expected total `sum_b`; positive favours the first policy.
pub fn regret_definition(sum_a: f64, sum_b: f64) -> f64 {
    sum_a - sum_b
}

/// Exact value of the non-stationary policy by forward recursion over
/// `(digits found, position in the exploit/explore cycle)`.
///
/// Each state carries `P(state) alpha^k` rather than the probability itself,
/// so the recursion stays representable while rewards grow like `alpha^T`.
/// Uses `gamma` from `params`; the first step is undiscounted. Cost is
/// `O(T^2 / (floor(m) + 1))`.
pub fn value_nonstationary_exact(m: f64, horizon: u64, params: &EnvParams) -> Result<ValueResult> {
    if !(m.is_finite() && m >= 0.0) {
        return Err(invalid("m", format!("must be finite and >= 0, got {m}")));
    }
    if horizon == 0 {
        return Err(invalid("horizon", "must be at least 1"));
    }
    let whole = m.floor().min(horizon as f64) as usize;
    let frac = if (m.floor() as usize) > whole { 0.0 } else { m - m.floor() };
    // Phases 0..whole exploit, `coin` decides the fractional exploit, `search` explores.
    let (coin, search) = (whole, whole + 1);
    let width = whole + 2;
    let start = if whole > 0 {
        0
    } else if frac > 0.0 {
        coin
    } else {
        search
    };
    let (alpha, tau, gamma) = (params.alpha(), params.tau(), params.gamma());
    let hit = alpha / tau;
    let stay = 1.0 - 1.0 / tau;
    let miss = -params.miss_cost_scale() * stay;
    let levels = (horizon as usize - 1) / (whole + 1) + 2;

    let mut cur = vec![0.0; levels * width];
    let mut next = vec![0.0; levels * width];
    cur[start] = 1.0;
    let mut total = 1.0;
    let mut discount = 1.0;
    let mut reach = 1;
    for _ in 1..horizon {
        discount *= gamma;
        let mut step = 0.0;
        next[..reach.min(levels - 1) * width + width].iter_mut().for_each(|x| *x = 0.0);
        for k in 0..reach {
            let row = &cur[k * width..(k + 1) * width];
            let up = (k + 1) * width + start;
            for (phase, &u) in row.iter().enumerate() {
                if u == 0.0 {
                    continue;
                }
                let searching = if phase < whole {
                    step += u;
                    let to = if phase + 1 < whole || frac > 0.0 { phase + 1 } else { search };
                    next[k * width + to] += u;
                    0.0
                } else if phase == coin && frac > 0.0 {
                    step += frac * u;
                    next[k * width + search] += frac * u;
                    (1.0 - frac) * u
                } else {
                    u
                };
                if searching > 0.0 {
                    step += searching * (hit + miss);
                    next[k * width + search] += searching * stay;
                    next[up] += searching * hit;
                }
            }
        }
        total += discount * step;
        reach = (reach + 1).min(levels - 1);
        std::mem::swap(&mut cur, &mut next);
    }
    ValueResult::finite(total, horizon, gamma < 1.0, &[])
}

/// Exact value of the per-step randomized policy `pi^p`, by forward recursion
/// over the number of digits found. Same scaling and discounting conventions
/// as [`value_nonstationary_exact`].
pub fn value_stochastic_exact(p: f64, horizon: u64, params: &EnvParams) -> Result<ValueResult> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("must lie in [0, 1], got {p}")));
    }
    if horizon == 0 {
        return Err(invalid("horizon", "must be at least 1"));
    }
    let (alpha, tau, gamma) = (params.alpha(), params.tau(), params.gamma());
    let hit = (1.0 - p) * alpha / tau;
    let stay = p + (1.0 - p) * (1.0 - 1.0 / tau);
    let per_unit = p + hit - params.miss_cost_scale() * (1.0 - p) * (1.0 - 1.0 / tau);
    let mut cur = vec![0.0; horizon as usize + 1];
    cur[0] = 1.0;
    let mut total = 1.0;
    let mut discount = 1.0;
    for t in 1..horizon as usize {
        discount *= gamma;
        total += discount * per_unit * cur[..t].iter().sum::<f64>();
        for k in (0..t).rev() {
            cur[k + 1] += cur[k] * hit;
            cur[k] *= stay;
        }
    }
    ValueResult::finite(total, horizon, gamma < 1.0, &[])
}
