//! Rate-distortion solver: Blahut-Arimoto at a fixed slope, with bisection on
//! the slope to meet a distortion budget.

use std::f64::consts::LN_2;

use serde::Serialize;

use super::env::{finite_reward, FinitePiEnv, ACTION_COUNT};
use super::posterior::Posterior;
use crate::error::{invalid, Error, Result};

/// Stop iterating once successive rates (in bits) differ by less than this.
pub const BA_TOLERANCE: f64 = 1e-9;
pub const BA_MAX_ITERATIONS: usize = 10_000;
const BETA_RANGE: (f64, f64) = (1e-6, 1e6);
const BISECTION_STEPS: usize = 100;
/// Bisection stops once the bracket on `ln beta` is this narrow.
const BRACKET_WIDTH: f64 = 1e-2;

/// Row-major distortion `d(theta, a)` over the posterior support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionMatrix {
    /// Row labels.
    pub hypotheses: Vec<u8>,
    pub actions: usize,
    values: Vec<f64>,
}

impl DistortionMatrix {
    /// Arbitrary rectangular matrix; rows are labelled `0, 1, ...`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let actions = rows.first().map_or(0, Vec::len);
        if actions == 0 {
            return Err(invalid("dmat", "needs at least one row and one column"));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != actions) {
            return Err(Error::LengthMismatch {
                expected: actions,
                actual: bad.len(),
            });
        }
        if rows.iter().flatten().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(invalid("dmat", "entries must be finite and nonnegative"));
        }
        Ok(Self {
            hypotheses: (0..rows.len() as u8).collect(),
            actions,
            values: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn get(&self, row: usize, action: usize) -> f64 {
        self.values[row * self.actions + action]
    }

    fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.actions..(row + 1) * self.actions]
    }
}

/// Squared shortfall from the optimal action, `(r(theta, theta) - r(theta, a))^2`,
/// for every supported `theta` and every action.
pub fn distortion_matrix(post: &Posterior, env: &FinitePiEnv) -> DistortionMatrix {
    let hypotheses = post.support();
    let values = hypotheses
        .iter()
        .flat_map(|&t| {
            let best = finite_reward(t, t, env);
            (0..ACTION_COUNT as u8).map(move |a| (best - finite_reward(a, t, env)).powi(2))
        })
        .collect();
    DistortionMatrix {
        hypotheses,
        actions: ACTION_COUNT,
        values,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RDSolution {
    /// Mutual information between hypothesis and compressed action, in bits.
    pub rate: f64,
    /// `channel[i][a] = P(a | hypotheses[i])`.
    pub channel: Vec<Vec<f64>>,
    pub marginal: Vec<f64>,
    pub achieved_distortion: f64,
    /// Slope parameter of the returned solution: infinite for the lossless
    /// channel, zero for a constant one.
    pub lagrange_beta: f64,
}

impl RDSolution {
    /// Samples an action from row `row` by inverting its CDF at `u`.
    pub fn sample_action(&self, row: usize, u: f64) -> usize {
        let probs = &self.channel[row];
        let mut acc = 0.0;
        let mut last = 0;
        for (a, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last = a;
                if u < acc {
                    break;
                }
            }
        }
        last
    }
}

/// Smallest `I(theta; A~)` subject to `E[d(theta, A~)] <= d_max`, up to `tol` on
/// the distortion. `weights` are aligned with the rows of `dmat`.
pub fn rate_distortion(weights: &[f64], dmat: &DistortionMatrix, d_max: f64, tol: f64) -> Result<RDSolution> {
    if weights.len() != dmat.rows() {
        return Err(Error::LengthMismatch {
            expected: dmat.rows(),
            actual: weights.len(),
        });
    }
    if !(d_max.is_finite() && d_max >= 0.0) {
        return Err(invalid("D", format!("must be finite and >= 0, got {d_max}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(invalid("tol", format!("must be finite and > 0, got {tol}")));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) || total <= 0.0 {
        return Err(invalid("weights", "must be finite and positive on every row"));
    }
    let w: Vec<f64> = weights.iter().map(|x| x / total).collect();

    let (best_constant, constant_distortion) = (0..dmat.actions)
        .map(|a| (a, (0..w.len()).map(|i| w[i] * dmat.get(i, a)).sum::<f64>()))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    if d_max >= constant_distortion {
        let mut marginal = vec![0.0; dmat.actions];
        marginal[best_constant] = 1.0;
        return Ok(RDSolution {
            rate: 0.0,
            channel: vec![marginal.clone(); w.len()],
            marginal,
            achieved_distortion: constant_distortion,
            lagrange_beta: 0.0,
        });
    }
    if d_max == 0.0 {
        if let Some(exact) = lossless(&w, dmat) {
            return Ok(exact);
        }
    }

    let (mut lo, mut hi) = (BETA_RANGE.0.ln(), BETA_RANGE.1.ln());
    let top = blahut_arimoto(&w, dmat, hi.exp());
    if !top.converged {
        return Err(Error::NotConverged {
            beta: hi.exp(),
            iterations: BA_MAX_ITERATIONS,
            residual: top.residual,
        });
    }
    if top.solution.achieved_distortion > d_max + tol {
        return Err(invalid(
            "D",
            format!(
                "distortion {d_max} is below what beta={} reaches ({})",
                BETA_RANGE.1, top.solution.achieved_distortion
            ),
        ));
    }
    // Feasible and infeasible ends of the bracket. The constant channel is
    // a valid infeasible end until a probe replaces it.
    let mut feasible = top.solution;
    let mut infeasible = constant_channel(w.len(), dmat.actions, best_constant, constant_distortion);
    for _ in 0..BISECTION_STEPS {
        if d_max - feasible.achieved_distortion <= tol || hi - lo < BRACKET_WIDTH {
            break;
        }
        // Unconverged iterates are still valid channels with exact rate and
        // distortion, so they can serve as bracket ends.
        let mid = 0.5 * (lo + hi);
        let probe = blahut_arimoto(&w, dmat, mid.exp()).solution;
        if probe.achieved_distortion <= d_max + tol {
            hi = mid;
            feasible = probe;
        } else {
            lo = mid;
            infeasible = probe;
        }
    }
    if d_max - feasible.achieved_distortion <= tol {
        return Ok(feasible);
    }
    // The budget falls in a jump of D(beta), i.e. on a straight piece of
    // R(D). Time-sharing between the bracket ends lands on it exactly.
    let lambda = (d_max - feasible.achieved_distortion) / (infeasible.achieved_distortion - feasible.achieved_distortion);
    let channel: Vec<Vec<f64>> = feasible
        .channel
        .iter()
        .zip(&infeasible.channel)
        .map(|(f, i)| f.iter().zip(i).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect())
        .collect();
    Ok(evaluate(&w, dmat, channel, 0.5 * (lo + hi)).exp_beta())
}

fn constant_channel(rows: usize, actions: usize, action: usize, distortion: f64) -> RDSolution {
    let mut marginal = vec![0.0; actions];
    marginal[action] = 1.0;
    RDSolution {
        rate: 0.0,
        channel: vec![marginal.clone(); rows],
        marginal,
        achieved_distortion: distortion,
        lagrange_beta: 0.0,
    }
}

/// Rate, marginal and distortion of an explicit channel; `lagrange_beta`
/// temporarily holds `ln beta`.
fn evaluate(w: &[f64], dmat: &DistortionMatrix, channel: Vec<Vec<f64>>, log_beta: f64) -> RDSolution {
    let mut marginal = vec![0.0; dmat.actions];
    for (row, wi) in channel.iter().zip(w) {
        for (q, p) in marginal.iter_mut().zip(row) {
            *q += wi * p;
        }
    }
    let mut nats = 0.0;
    let mut achieved_distortion = 0.0;
    for (i, (row, wi)) in channel.iter().zip(w).enumerate() {
        for (a, &p) in row.iter().enumerate() {
            if p > 0.0 {
                nats += wi * p * (p / marginal[a]).ln();
                achieved_distortion += wi * p * dmat.get(i, a);
            }
        }
    }
    RDSolution {
        rate: (nats / LN_2).max(0.0),
        channel,
        marginal,
        achieved_distortion,
        lagrange_beta: log_beta,
    }
}

impl RDSolution {
    fn exp_beta(mut self) -> Self {
        self.lagrange_beta = self.lagrange_beta.exp();
        self
    }
}

/// Zero distortion with one zero-cost action per row; distinct actions give
/// rate equal to the source entropy.
fn lossless(w: &[f64], dmat: &DistortionMatrix) -> Option<RDSolution> {
    let targets: Vec<usize> = (0..w.len())
        .map(|i| dmat.row(i).iter().position(|&d| d == 0.0))
        .collect::<Option<_>>()?;
    let mut channel = vec![vec![0.0; dmat.actions]; w.len()];
    let mut marginal = vec![0.0; dmat.actions];
    for (i, &a) in targets.iter().enumerate() {
        channel[i][a] = 1.0;
        marginal[a] += w[i];
    }
    let rate = -marginal.iter().filter(|&&q| q > 0.0).map(|q| q * q.log2()).sum::<f64>();
    Some(RDSolution {
        rate,
        channel,
        marginal,
        achieved_distortion: 0.0,
        lagrange_beta: f64::INFINITY,
    })
}

struct Iterate {
    solution: RDSolution,
    converged: bool,
    residual: f64,
}

/// One Blahut-Arimoto map `q -> q'` at a fixed kernel.
struct Kernel<'a> {
    w: &'a [f64],
    dmat: &'a DistortionMatrix,
    beta: f64,
    floors: Vec<f64>,
    values: Vec<f64>,
}

struct Step {
    rate: f64,
    distortion: f64,
    /// `sum_i w_i ln sum_a q(a) exp(-beta d(i, a))` at the input marginal;
    /// each map never decreases it.
    objective: f64,
}

impl<'a> Kernel<'a> {
    fn new(w: &'a [f64], dmat: &'a DistortionMatrix, beta: f64) -> Self {
        // Shifted by each row's smallest distortion so its peak is 1.
        let floors: Vec<f64> = (0..w.len())
            .map(|i| dmat.row(i).iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        let values = (0..w.len())
            .flat_map(|i| {
                let floor = floors[i];
                dmat.row(i).iter().map(move |d| (-beta * (d - floor)).exp())
            })
            .collect();
        Self {
            w,
            dmat,
            beta,
            floors,
            values,
        }
    }

    fn apply(&self, q: &[f64], channel: &mut [Vec<f64>], next_q: &mut [f64]) -> Step {
        let m = q.len();
        next_q.iter_mut().for_each(|x| *x = 0.0);
        let mut objective = 0.0;
        let mut distortion = 0.0;
        for (i, row) in channel.iter_mut().enumerate() {
            let k = &self.values[i * m..(i + 1) * m];
            let d = self.dmat.row(i);
            let z: f64 = q.iter().zip(k).map(|(a, b)| a * b).sum();
            let mut row_distortion = 0.0;
            for a in 0..m {
                row[a] = q[a] * k[a] / z;
                next_q[a] += self.w[i] * row[a];
                row_distortion += row[a] * d[a];
            }
            distortion += self.w[i] * row_distortion;
            objective += self.w[i] * (z.ln() - self.beta * self.floors[i]);
        }
        // I = sum_a q'(a) ln(q(a)/q'(a)) - beta D + objective
        let shift: f64 = next_q
            .iter()
            .zip(q)
            .filter(|(&nq, _)| nq > 0.0)
            .map(|(&nq, &oq)| nq * (oq / nq).ln())
            .sum();
        Step {
            rate: ((shift - self.beta * distortion - objective) / LN_2).max(0.0),
            distortion,
            objective,
        }
    }
}

/// Squared extrapolation of three successive marginals in log space, or
/// `None` when the iterates have stalled.
fn extrapolate(q0: &[f64], q1: &[f64], q2: &[f64]) -> Option<Vec<f64>> {
    let mut r2 = 0.0;
    let mut v2 = 0.0;
    let mut parts = Vec::with_capacity(q0.len());
    for ((&a, &b), &c) in q0.iter().zip(q1).zip(q2) {
        if a > 0.0 && b > 0.0 && c > 0.0 {
            let r = b.ln() - a.ln();
            let v = c.ln() - b.ln() - r;
            r2 += r * r;
            v2 += v * v;
            parts.push(Some((a.ln(), r, v)));
        } else {
            parts.push(None);
        }
    }
    if v2 <= 0.0 || r2 <= 0.0 {
        return None;
    }
    let step = -(r2 / v2).sqrt().max(1.0);
    let mut next: Vec<f64> = parts
        .iter()
        .zip(q2)
        .map(|(p, &c)| match p {
            Some((l, r, v)) => (l - 2.0 * step * r + step * step * v).exp(),
            None => c,
        })
        .collect();
    let total: f64 = next.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return None;
    }
    next.iter_mut().for_each(|x| *x /= total);
    Some(next)
}

/// Fixed-point iteration at slope `beta`, started from the uniform marginal
/// and accelerated by squared extrapolation with a monotonicity safeguard.
fn blahut_arimoto(w: &[f64], dmat: &DistortionMatrix, beta: f64) -> Iterate {
    let (n, m) = (w.len(), dmat.actions);
    let kernel = Kernel::new(w, dmat, beta);
    let mut q0 = vec![1.0 / m as f64; m];
    let mut q1 = vec![0.0; m];
    let mut q2 = vec![0.0; m];
    let mut q3 = vec![0.0; m];
    let mut channel = vec![vec![0.0; m]; n];
    let mut rate = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut distortion = 0.0;
    let mut maps = 0;
    while maps + 3 <= BA_MAX_ITERATIONS {
        let first = kernel.apply(&q0, &mut channel, &mut q1);
        let last = kernel.apply(&q1, &mut channel, &mut q2);
        maps += 2;
        let mut state = (last, &mut q2);
        if let Some(jump) = extrapolate(&q0, &q1, state.1) {
            let tried = kernel.apply(&jump, &mut channel, &mut q3);
            maps += 1;
            if tried.objective >= first.objective {
                state = (tried, &mut q3);
            } else {
                // Rebuild the channel from the plain iterate.
                maps += 1;
                state = (kernel.apply(&q1, &mut channel, &mut q2), &mut q2);
            }
        }
        let (step, next) = state;
        std::mem::swap(&mut q0, next);
        residual = (step.rate - rate).abs();
        rate = step.rate;
        distortion = step.distortion;
        if residual < BA_TOLERANCE {
            break;
        }
    }
    Iterate {
        solution: RDSolution {
            rate,
            channel,
            marginal: q0,
            achieved_distortion: distortion,
            lagrange_beta: beta,
        },
        converged: residual < BA_TOLERANCE,
        residual,
    }
}
