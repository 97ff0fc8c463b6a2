//! Thompson Sampling and its rate-distortion variant on the finite game.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::env::{finite_reward, FinitePiEnv};
use super::posterior::Posterior;
use super::rd::{distortion_matrix, rate_distortion, RDSolution};
use crate::error::{invalid, Error, Result};
use crate::rng::{self, StreamRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FiniteAgent {
    Ts,
    Rdts,
}

impl fmt::Display for FiniteAgent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FiniteAgent::Ts => "ts",
            FiniteAgent::Rdts => "rdts",
        })
    }
}

impl FromStr for FiniteAgent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ts" => Ok(FiniteAgent::Ts),
            "rdts" => Ok(FiniteAgent::Rdts),
            _ => Err(invalid("agent", format!("expected `ts` or `rdts`, got `{s}`"))),
        }
    }
}

/// Probability matching: draw `theta` from the posterior and play it.
pub fn ts_select<R: Rng + ?Sized>(post: &Posterior, rng: &mut R) -> u8 {
    post.sample(rng.random())
}

/// `(alpha^2 - alpha)^2` while more than one first digit is possible, else 0.
///
/// The positive value is exactly the distortion of guessing the correct first
/// digit alone, so the compressed target becomes "learn the first digit".
pub fn adaptive_threshold(post: &Posterior, env: &FinitePiEnv) -> f64 {
    if post.decades().len() > 1 {
        let a = env.alpha();
        (a * a - a).powi(2)
    } else {
        0.0
    }
}

/// Memoized rate-distortion solutions keyed by posterior and threshold.
///
/// Safe to share across threads; the solution for a key does not depend on
/// which thread computes it first.
#[derive(Debug)]
pub struct RdCache {
    env: FinitePiEnv,
    tol: f64,
    solutions: Mutex<HashMap<(Vec<u64>, u64), Arc<RDSolution>>>,
}

impl RdCache {
    pub fn new(env: FinitePiEnv, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(invalid("tol", format!("must be finite and > 0, got {tol}")));
        }
        Ok(Self {
            env,
            tol,
            solutions: Mutex::new(HashMap::new()),
        })
    }

    pub fn solve(&self, post: &Posterior, d_max: f64) -> Result<Arc<RDSolution>> {
        let weights = post.support_weights();
        let key = (
            post.support().iter().map(|&t| t as u64).chain(weights.iter().map(|w| w.to_bits())).collect(),
            d_max.to_bits(),
        );
        if let Some(hit) = self.solutions.lock().expect("cache lock poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let dm = distortion_matrix(post, &self.env);
        let solution = Arc::new(rate_distortion(&weights, &dm, d_max, self.tol)?);
        self.solutions
            .lock()
            .expect("cache lock poisoned")
            .insert(key, Arc::clone(&solution));
        Ok(solution)
    }

    pub fn len(&self) -> usize {
        self.solutions.lock().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Selection {
    pub action: u8,
    pub sampled_theta: u8,
    pub threshold: f64,
    pub rate_bits: f64,
}

/// Draws `theta` from the posterior, then an action from the rate-distortion
/// channel row of `theta` at the adaptive threshold.
pub fn rdts_select<R: Rng + ?Sized>(post: &Posterior, cache: &RdCache, rng: &mut R) -> Result<Selection> {
    let threshold = adaptive_threshold(post, &cache.env);
    let solution = cache.solve(post, threshold)?;
    let theta = post.sample(rng.random());
    let row = post.support().iter().position(|&t| t == theta).expect("sampled theta is in the support");
    let action = solution.sample_action(row, rng.random()) as u8;
    Ok(Selection {
        action,
        sampled_theta: theta,
        threshold,
        rate_bits: solution.rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteStep {
    /// 1-based.
    pub step: u64,
    pub action: u8,
    pub reward: f64,
    pub cumulative_regret: f64,
    /// Support size when the action was chosen.
    pub posterior_support_size: usize,
    pub threshold: f64,
    pub rate_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Episode {
    pub seed: u64,
    pub truth: u8,
    pub steps: Vec<FiniteStep>,
    /// Observations needed until the posterior is a point mass.
    pub identification_time: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRun {
    pub agent: FiniteAgent,
    pub horizon: u64,
    pub episodes: Vec<Episode>,
    pub mean_cumulative_regret: Vec<f64>,
}

impl ExperimentRun {
    /// Mean over episodes that identified the truth within the horizon.
    pub fn mean_identification_time(&self) -> Option<f64> {
        let times: Vec<f64> = self
            .episodes
            .iter()
            .filter_map(|e| e.identification_time.map(|t| t as f64))
            .collect();
        (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64)
    }

    /// `None` if some episode never identified the truth.
    pub fn worst_identification_time(&self) -> Option<u64> {
        self.episodes
            .iter()
            .map(|e| e.identification_time)
            .try_fold(0, |worst, t| t.map(|t| worst.max(t)))
    }

    pub fn final_mean_regret(&self) -> f64 {
        self.mean_cumulative_regret.last().copied().unwrap_or(0.0)
    }
}

/// One episode per seed from the uniform prior, in parallel; the output order
/// follows `seeds`.
pub fn run_finite_experiment(
    env: &FinitePiEnv,
    agent: FiniteAgent,
    horizon: u64,
    seeds: &[u64],
    cache: &RdCache,
) -> Result<ExperimentRun> {
    if horizon == 0 {
        return Err(invalid("horizon", "must be at least 1"));
    }
    if seeds.is_empty() {
        return Err(invalid("seeds", "at least one seed is required"));
    }
    let episodes = seeds
        .par_iter()
        .map(|&seed| episode(env, agent, horizon, seed, cache))
        .collect::<Result<Vec<_>>>()?;
    let mean_cumulative_regret = (0..horizon as usize)
        .map(|t| episodes.iter().map(|e| e.steps[t].cumulative_regret).sum::<f64>() / episodes.len() as f64)
        .collect();
    Ok(ExperimentRun {
        agent,
        horizon,
        episodes,
        mean_cumulative_regret,
    })
}

fn episode(env: &FinitePiEnv, agent: FiniteAgent, horizon: u64, seed: u64, cache: &RdCache) -> Result<Episode> {
    let mut rng = rng::stream(seed, 0, StreamRole::Policy);
    let mut post = Posterior::uniform();
    let mut identification_time = post.identified().map(|_| 0);
    let mut regret = 0.0;
    let mut steps = Vec::with_capacity(horizon as usize);
    for step in 1..=horizon {
        let support = post.support_size();
        let selection = match agent {
            FiniteAgent::Ts => {
                let theta = ts_select(&post, &mut rng);
                Selection {
                    action: theta,
                    sampled_theta: theta,
                    threshold: 0.0,
                    rate_bits: post.entropy_bits(),
                }
            }
            FiniteAgent::Rdts => rdts_select(&post, cache, &mut rng)?,
        };
        let reward = finite_reward(selection.action, env.truth(), env);
        regret += env.optimal_reward() - reward;
        post = post.update(selection.action, reward, env)?;
        if identification_time.is_none() && post.identified().is_some() {
            identification_time = Some(step);
        }
        steps.push(FiniteStep {
            step,
            action: selection.action,
            reward,
            cumulative_regret: regret,
            posterior_support_size: support,
            threshold: selection.threshold,
            rate_bits: selection.rate_bits,
        });
    }
    Ok(Episode {
        seed,
        truth: env.truth(),
        steps,
        identification_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn thresholds() {
        let env = FinitePiEnv::default();
        assert_eq!(adaptive_threshold(&Posterior::uniform(), &env), 4.0);
        let decade = Posterior::uniform().update(3, 2.0, &env).unwrap();
        assert_eq!(adaptive_threshold(&decade, &env), 0.0);
        assert_eq!(adaptive_threshold(&Posterior::point(31), &env), 0.0);
    }

    #[test]
    fn point_mass_is_played() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cache = RdCache::new(FinitePiEnv::default(), 1e-9).unwrap();
        for _ in 0..20 {
            assert_eq!(ts_select(&Posterior::point(31), &mut rng), 31);
            assert_eq!(rdts_select(&Posterior::point(31), &cache, &mut rng).unwrap().action, 31);
        }
    }

    #[test]
    fn regret_stops_after_identification() {
        let env = FinitePiEnv::default();
        let cache = RdCache::new(env, 1e-9).unwrap();
        for agent in [FiniteAgent::Ts, FiniteAgent::Rdts] {
            let run = run_finite_experiment(&env, agent, 100, &[1, 2, 3], &cache).unwrap();
            for e in &run.episodes {
                let t = e.identification_time.unwrap() as usize;
                let settled = e.steps[t.saturating_sub(1)].cumulative_regret;
                assert!(e.steps[t..].iter().all(|s| s.cumulative_regret == settled && s.action == 31));
            }
        }
    }

    #[test]
    fn agent_names_round_trip() {
        for a in [FiniteAgent::Ts, FiniteAgent::Rdts] {
            assert_eq!(a.to_string().parse::<FiniteAgent>().unwrap(), a);
        }
        assert!("ucb".parse::<FiniteAgent>().is_err());
    }
}
