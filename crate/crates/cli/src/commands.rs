use anyhow::{anyhow, Result};
use serde_json::json;

use curriculum_bandit::analytic::{
    conjecture_limit, expected_mu_prime, value_nonstationary_exact, value_pi_n, value_stochastic_exact, LARGE_HORIZON,
};
use curriculum_bandit::finite::{
    distortion_matrix, rate_distortion, run_finite_experiment, FiniteAgent, Posterior, RdCache, HYPOTHESES,
};
use curriculum_bandit::lab::{conjecture_diagnostics, estimate_value, sweep_m_with, RolloutConfig, SweepOptions};
use curriculum_bandit::{EnvParams, PolicySpec};

use crate::config::ExperimentConfig;
use crate::output::{error_marker, num, Table};
use crate::svg::{Chart, Series};

/// Everything a subcommand produced, before it is written out.
#[derive(Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub charts: Vec<(&'static str, Chart)>,
    pub summaries: Vec<(&'static str, serde_json::Value)>,
}

/// Numeric parameter of a policy: `N`, `m` or `p`; empty for pure exploration.
fn policy_parameter(policy: &PolicySpec) -> String {
    match *policy {
        PolicySpec::PiN(n) | PolicySpec::NonCurricular(n) => n.to_string(),
        PolicySpec::StochasticP(x) | PolicySpec::NonStationaryM(x) => num(x),
        PolicySpec::Explore => String::new(),
    }
}

/// Closed-form or exact-recursion value, with the assumptions it rests on.
/// `None` when no closed form exists for the policy at this discount.
pub fn analytic_value(policy: &PolicySpec, horizon: u64, params: &EnvParams) -> Result<(Option<f64>, Vec<String>)> {
    let exact = |r: curriculum_bandit::analytic::ValueResult| {
        let mut tags = r.assumptions;
        tags.push("exact recursion".into());
        (Some(r.value), tags)
    };
    Ok(match *policy {
        PolicySpec::PiN(n) => {
            let r = value_pi_n(n, horizon, params)?;
            (Some(r.value), r.assumptions)
        }
        PolicySpec::Explore => exact(value_stochastic_exact(0.0, horizon, params)?),
        PolicySpec::StochasticP(p) => exact(value_stochastic_exact(p, horizon, params)?),
        PolicySpec::NonStationaryM(m) => exact(value_nonstationary_exact(m, horizon, params)?),
        PolicySpec::NonCurricular(n) if params.gamma() >= 1.0 => {
            // Linear in the number of guesses mu', so only its mean matters
            // while mu' <= T.
            let mu = expected_mu_prime(n, params.tau(), 1_000_000)?;
            let (alpha, c) = (params.alpha(), params.miss_cost_scale());
            let level = alpha.powi(n as i32 - 1);
            let v = 1.0 - (mu.value - 1.0) * c * level + (horizon as f64 - mu.value) * alpha * level;
            if !v.is_finite() {
                return Err(anyhow!("non-curricular value overflows at N={n}"));
            }
            (Some(v), vec![LARGE_HORIZON.to_string()])
        }
        PolicySpec::NonCurricular(_) => (None, vec!["no closed form for gamma < 1".into()]),
    })
}

pub fn values(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params = cfg.params()?;
    let policies = ExperimentConfig::policies(&cfg.values.policies, "values.policies")?;
    let mut table = Table::new(
        "values",
        &["policy", "N_or_m", "T", "gamma", "analytic_value", "assumptions"],
    );
    for policy in &policies {
        for t in cfg.value_horizons() {
            let (value, tags) = match analytic_value(policy, t, &params) {
                Ok((v, tags)) => (v.map(num).unwrap_or_default(), tags.join("; ")),
                Err(e) => (error_marker(&e), String::new()),
            };
            table.push(vec![
                policy.label(),
                policy_parameter(policy),
                t.to_string(),
                num(params.gamma()),
                value,
                tags,
            ]);
        }
    }
    Ok(RunOutput {
        tables: vec![table],
        ..RunOutput::default()
    })
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params = cfg.params()?;
    let policies = ExperimentConfig::policies(&cfg.sim.policies, "sim.policies")?;
    let (t, trials, seed) = (cfg.sim.horizon, cfg.sim.trials, cfg.sim.master_seed);
    let mut table = Table::new(
        "simulate",
        &["policy", "T", "trials", "mc_mean", "mc_stderr", "analytic_value", "z_score"],
    );
    for policy in &policies {
        let estimate = RolloutConfig::new(params, *policy, t, trials, seed)
            .and_then(|c| estimate_value(&c))
            .map_err(anyhow::Error::from);
        let mut row = vec![policy.label(), t.to_string(), trials.to_string()];
        match estimate {
            Ok(e) => {
                let e = if params.gamma() < 1.0 { e.discounted } else { e.undiscounted };
                row.push(num(e.mean));
                row.push(if e.stderr_available { num(e.stderr) } else { String::new() });
                match analytic_value(policy, t, &params) {
                    Ok((Some(a), _)) => {
                        row.push(num(a));
                        row.push(e.z_score(a).map(num).unwrap_or_default());
                    }
                    Ok((None, _)) => row.extend([String::new(), String::new()]),
                    Err(err) => row.extend([error_marker(&err), String::new()]),
                }
            }
            Err(err) => row.extend([error_marker(&err), String::new(), String::new(), String::new()]),
        }
        table.push(row);
    }
    Ok(RunOutput {
        tables: vec![table],
        ..RunOutput::default()
    })
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params = cfg.params()?.with_gamma(1.0)?;
    let grid = cfg.sweep.m_grid.points();
    let options = SweepOptions {
        refine: cfg.sweep.refine,
        refine_evals: cfg.sweep.refine_evals,
    };
    let mut summary = Table::new(
        "sweep",
        &["T", "m_star", "p_star", "value_at_m_star", "stderr", "boundary_max", "grid_m_star", "grid_p_star"],
    );
    let mut detail = Table::new("sweep_grid", &["T", "m", "p", "mean", "stderr", "no_exploration"]);
    let mut curve = Vec::new();
    for &t in &cfg.sweep.horizons {
        match sweep_m_with(&params, t, &grid, cfg.sweep_trials(), cfg.sim.master_seed, options) {
            Ok(s) => {
                let best = s.refined.map_or(s.value_at_m_star, |r| r.value);
                summary.push(vec![
                    t.to_string(),
                    num(s.best_m()),
                    num(s.best_p()),
                    num(best.mean),
                    num(best.stderr),
                    s.boundary_max.to_string(),
                    num(s.m_star),
                    num(s.p_star),
                ]);
                for ((m, e), never) in s.m_grid.iter().zip(&s.value_estimates).zip(&s.no_exploration) {
                    let tau = params.tau();
                    detail.push(vec![
                        t.to_string(),
                        num(*m),
                        num((m + 1.0) / (m + tau)),
                        num(e.mean),
                        num(e.stderr),
                        never.to_string(),
                    ]);
                }
                curve.push((t as f64, s.best_p()));
            }
            Err(e) => {
                let mut row = vec![t.to_string(), error_marker(&e.into())];
                row.resize(summary.header.len(), String::new());
                summary.push(row);
            }
        }
    }
    let limit = conjecture_limit(&params);
    let chart = Chart {
        title: format!("Best exploit probability, alpha={} tau={}", num(params.alpha()), num(params.tau())),
        x_label: "horizon T".into(),
        y_label: "p*_T".into(),
        series: vec![Series {
            label: "p*_T (sweep)".into(),
            points: curve,
        }],
        reference: Some((format!("(alpha+1)/(alpha+tau) = {}", num(limit)), limit)),
    };
    Ok(RunOutput {
        tables: vec![summary, detail],
        charts: vec![("sweep", chart)],
        summaries: Vec::new(),
    })
}

pub fn finite(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let env = cfg.finite_env()?;
    let agents = cfg.agents()?;
    let seeds = cfg.finite_seeds();
    let cache = RdCache::new(env, cfg.finite.rd_tolerance)?;
    let mut steps = Table::new(
        "finite_steps",
        &[
            "step",
            "agent",
            "seed",
            "action",
            "reward",
            "cumulative_regret",
            "posterior_support_size",
            "D_t",
            "rate_bits",
        ],
    );
    let mut mean = Table::new("finite_mean", &["step", "agent", "mean_cumulative_regret"]);
    let mut series = Vec::new();
    let mut worst = serde_json::Map::new();
    let mut mean_id = serde_json::Map::new();
    let mut final_regret = serde_json::Map::new();
    let mut unidentified = serde_json::Map::new();
    for agent in agents {
        let run = run_finite_experiment(&env, agent, cfg.finite.horizon, &seeds, &cache)?;
        let name = agent.to_string();
        for ep in &run.episodes {
            for s in &ep.steps {
                steps.push(vec![
                    s.step.to_string(),
                    name.clone(),
                    ep.seed.to_string(),
                    s.action.to_string(),
                    num(s.reward),
                    num(s.cumulative_regret),
                    s.posterior_support_size.to_string(),
                    num(s.threshold),
                    num(s.rate_bits),
                ]);
            }
        }
        for (i, r) in run.mean_cumulative_regret.iter().enumerate() {
            mean.push(vec![(i + 1).to_string(), name.clone(), num(*r)]);
        }
        series.push(Series {
            label: match agent {
                FiniteAgent::Ts => "Thompson sampling".into(),
                FiniteAgent::Rdts => "rate-distortion Thompson sampling".into(),
            },
            points: run
                .mean_cumulative_regret
                .iter()
                .enumerate()
                .map(|(i, r)| ((i + 1) as f64, *r))
                .collect(),
        });
        worst.insert(name.clone(), json!(run.worst_identification_time()));
        mean_id.insert(name.clone(), json!(run.mean_identification_time()));
        final_regret.insert(name.clone(), json!(run.final_mean_regret()));
        let missing = run.episodes.iter().filter(|e| e.identification_time.is_none()).count();
        unidentified.insert(name, json!(missing));
    }
    let summary = json!({
        "truth": env.truth(),
        "horizon": cfg.finite.horizon,
        "seeds": seeds.len(),
        "worst_case": worst,
        "mean_identification_time": mean_id,
        "final_mean_cumulative_regret": final_regret,
        "unidentified_episodes": unidentified,
    });
    let chart = Chart {
        title: format!("Mean cumulative regret over {} seeds, truth {}", seeds.len(), env.truth()),
        x_label: "step".into(),
        y_label: "cumulative regret".into(),
        series,
        reference: None,
    };
    Ok(RunOutput {
        tables: vec![steps, mean],
        charts: vec![("finite", chart)],
        summaries: vec![("finite_summary", summary)],
    })
}

pub fn diagnostics(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params = cfg.params()?;
    let mut table = Table::new(
        "diagnostics",
        &[
            "n",
            "m",
            "T",
            "f_n_mean",
            "f_n_stderr",
            "f_tilde_mean",
            "f_tilde_stderr",
            "analytic_factor",
            "probability_term",
        ],
    );
    for &n in &cfg.diagnostics.n {
        for &m in &cfg.diagnostics.m {
            for t in cfg.diagnostic_horizons() {
                let mut row = vec![n.to_string(), num(m), t.to_string()];
                match conjecture_diagnostics(&params, n, m, t, cfg.diagnostic_trials(), cfg.sim.master_seed) {
                    Ok(d) => row.extend([
                        num(d.f_n.mean),
                        num(d.f_n.stderr),
                        num(d.f_tilde_n.mean),
                        num(d.f_tilde_n.stderr),
                        num(d.analytic_factor),
                        num(d.probability_term),
                    ]),
                    Err(e) => {
                        row.push(error_marker(&e.into()));
                        row.resize(table.header.len(), String::new());
                    }
                }
                table.push(row);
            }
        }
    }
    Ok(RunOutput {
        tables: vec![table],
        ..RunOutput::default()
    })
}

pub fn rd_curve(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let env = cfg.finite_env()?;
    let post = match &cfg.rd.support {
        Some(support) => {
            let weights: Vec<f64> = HYPOTHESES.map(|t| if support.contains(&t) { 1.0 } else { 0.0 }).collect();
            Posterior::from_weights(&weights)?
        }
        None => Posterior::uniform(),
    };
    let dmat = distortion_matrix(&post, &env);
    let w = post.support_weights();
    let top = cfg.rd.d_max.unwrap_or_else(|| {
        (0..dmat.actions)
            .map(|a| w.iter().enumerate().map(|(i, wi)| wi * dmat.get(i, a)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    });
    let mut table = Table::new(
        "rd_curve",
        &["D", "rate_bits", "achieved_distortion", "lagrange_beta", "one_digit_mass"],
    );
    let mut points = Vec::new();
    for i in 0..cfg.rd.points {
        let d = top * i as f64 / (cfg.rd.points - 1) as f64;
        match rate_distortion(&w, &dmat, d, cfg.finite.rd_tolerance) {
            Ok(sol) => {
                table.push(vec![
                    num(d),
                    num(sol.rate),
                    num(sol.achieved_distortion),
                    num(sol.lagrange_beta),
                    num(sol.marginal[..10].iter().sum()),
                ]);
                points.push((d, sol.rate));
            }
            Err(e) => {
                let mut row = vec![num(d), error_marker(&e.into())];
                row.resize(table.header.len(), String::new());
                table.push(row);
            }
        }
    }
    let chart = Chart {
        title: format!("Rate-distortion function over {} hypotheses", w.len()),
        x_label: "distortion D".into(),
        y_label: "R(D) in bits".into(),
        series: vec![Series {
            label: "R(D)".into(),
            points,
        }],
        reference: None,
    };
    Ok(RunOutput {
        tables: vec![table],
        charts: vec![("rd_curve", chart)],
        summaries: Vec::new(),
    })
}
