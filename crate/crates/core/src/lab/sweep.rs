//! Grid search for the best exploit count `m` of the non-stationary policy,
//! and the exploit probability `p = (m+1)/(m+tau)` it maps to.

use serde::Serialize;

use crate::analytic::p_from_m;
use crate::env::EnvParams;
use crate::error::{invalid, Result};
use crate::policy::PolicySpec;
use crate::stats::EstimateResult;

use super::estimate::estimate_value;
use super::rollout::RolloutConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepOptions {
    /// Run a golden-section pass over the interval bracketing the grid maximum.
    pub refine: bool,
    pub refine_evals: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            refine: true,
            refine_evals: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Refinement {
    pub m: f64,
    pub p: f64,
    pub value: EstimateResult,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub horizon: u64,
    pub m_grid: Vec<f64>,
    /// Undiscounted value of the non-stationary policy at each grid point.
    pub value_estimates: Vec<EstimateResult>,
    pub m_star: f64,
    pub p_star: f64,
    pub value_at_m_star: EstimateResult,
    /// The grid maximum sits on the first or last grid point.
    pub boundary_max: bool,
    /// Grid points with `m >= T - 1`: the policy never explores within the
    /// horizon and its value is exactly `T`.
    pub no_exploration: Vec<bool>,
    pub refined: Option<Refinement>,
}

impl SweepResult {
    /// The maximiser lies strictly inside the grid, so `p*` is in `(0, 1)`.
    pub fn interior(&self) -> bool {
        !self.boundary_max && self.p_star > 0.0 && self.p_star < 1.0
    }

    /// Refined `m*` if a refinement ran, the grid `m*` otherwise.
    pub fn best_m(&self) -> f64 {
        self.refined.map_or(self.m_star, |r| r.m)
    }

    pub fn best_p(&self) -> f64 {
        self.refined.map_or(self.p_star, |r| r.p)
    }
}

/// Maximises `f` on `[lo, hi]` with `evals` evaluations of golden-section search.
/// Returns the best point seen and its value.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, evals: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 2..evals.max(2) {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
            if f1 > best.1 {
                best = (x1, f1);
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
    }
    Ok(best)
}

/// Sweeps `m` over `m_grid` at horizon `horizon` with `gamma = 1`.
pub fn sweep_m(params: &EnvParams, horizon: u64, m_grid: &[f64], trials: u64, seed: u64) -> Result<SweepResult> {
    sweep_m_with(params, horizon, m_grid, trials, seed, SweepOptions::default())
}

pub fn sweep_m_with(
    params: &EnvParams,
    horizon: u64,
    m_grid: &[f64],
    trials: u64,
    seed: u64,
    options: SweepOptions,
) -> Result<SweepResult> {
    if m_grid.is_empty() {
        return Err(invalid("m_grid", "grid must not be empty"));
    }
    if let Some(bad) = m_grid.iter().find(|m| !(m.is_finite() && **m >= 0.0 && **m <= horizon as f64)) {
        return Err(invalid("m_grid", format!("grid values must lie in [0, T={horizon}], got {bad}")));
    }
    let mut grid = m_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let undiscounted = params.with_gamma(1.0)?;
    let base = RolloutConfig::new(undiscounted, PolicySpec::NonStationaryM(grid[0]), horizon, trials, seed)?;
    let evaluate = |m: f64| -> Result<EstimateResult> {
        Ok(estimate_value(&base.with_policy(PolicySpec::NonStationaryM(m)))?.undiscounted)
    };

    let values = grid.iter().map(|&m| evaluate(m)).collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if v.mean > values[best].mean { i } else { best });
    let boundary_max = grid.len() < 3 || best == 0 || best == grid.len() - 1;
    let m_star = grid[best];
    let tau = params.tau();

    let refined = if options.refine && !boundary_max {
        let bracket = (grid[best - 1], grid[best + 1]);
        let (m, _) = golden_section_max(|m| Ok(evaluate(m)?.mean), bracket.0, bracket.1, options.refine_evals)?;
        let value = evaluate(m)?;
        let (m, value) = if value.mean > values[best].mean {
            (m, value)
        } else {
            (m_star, values[best])
        };
        Some(Refinement {
            m,
            p: p_from_m(m, tau)?,
            value,
            bracket,
        })
    } else {
        None
    };

    Ok(SweepResult {
        horizon,
        no_exploration: grid.iter().map(|&m| m + 1.0 >= horizon as f64).collect(),
        m_grid: grid,
        value_at_m_star: values[best],
        value_estimates: values,
        m_star,
        p_star: p_from_m(m_star, tau)?,
        boundary_max,
        refined,
    })
}
