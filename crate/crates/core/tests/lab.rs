use curriculum_bandit::analytic::{value_pi_n_undiscounted, value_stochastic_exact};
use curriculum_bandit::lab::{
    conjecture_diagnostics, estimate_regret, estimate_value, rollout, sweep_m, GoalMode, RolloutConfig,
};
use curriculum_bandit::{EnvParams, PolicySpec};

fn base() -> EnvParams {
    EnvParams::undiscounted(2.0, 4.0).unwrap()
}

fn config(policy: PolicySpec, horizon: u64, trials: u64, seed: u64) -> RolloutConfig {
    RolloutConfig::new(base(), policy, horizon, trials, seed).unwrap()
}

#[test]
fn always_exploiting_the_empty_prefix_earns_one_per_step() {
    let s = rollout(&config(PolicySpec::PiN(0), 10, 3, 8), 2).unwrap();
    assert_eq!(s.undiscounted, 10.0);
}

#[test]
fn explore_against_all_ones_doubles_every_step() {
    let c = config(PolicySpec::Explore, 20, 1, 0).with_goal(GoalMode::Fixed(vec![1; 20]));
    let s = rollout(&c, 0).unwrap();
    let expected: f64 = (1..=20).map(|k| 2f64.powi(k - 1)).sum();
    assert_eq!(s.undiscounted, expected);
}

#[test]
fn pi_one_matches_190() {
    let e = estimate_value(&config(PolicySpec::PiN(1), 100, 100_000, 3)).unwrap();
    let exact = value_pi_n_undiscounted(1, 100, &base()).unwrap().value;
    assert_eq!(exact, 190.0);
    assert!(e.undiscounted.within(exact, 3.0), "{:?}", e.undiscounted);
}

#[test]
fn single_trial_has_no_stderr() {
    let e = estimate_value(&config(PolicySpec::PiN(1), 100, 1, 3)).unwrap();
    assert_eq!(e.undiscounted.stderr, 0.0);
    assert!(!e.undiscounted.stderr_available);
    assert!(RolloutConfig::new(base(), PolicySpec::PiN(1), 100, 0, 3).is_err());
}

#[test]
fn quadrupling_trials_halves_stderr() {
    let small = estimate_value(&config(PolicySpec::PiN(2), 200, 10_000, 4)).unwrap();
    let large = estimate_value(&config(PolicySpec::PiN(2), 200, 40_000, 4)).unwrap();
    let ratio = small.undiscounted.stderr / large.undiscounted.stderr;
    assert!((ratio - 2.0).abs() <= 0.2 * 2.0, "ratio {ratio}");
}

#[test]
fn pure_exploration_stays_below_zero() {
    let e = estimate_value(&config(PolicySpec::Explore, 500, 100_000, 6)).unwrap();
    let u = e.undiscounted;
    assert!(u.mean <= 3.0 * u.stderr, "{u:?}");
}

#[test]
fn identical_policies_have_exactly_zero_regret() {
    for policy in [PolicySpec::Explore, PolicySpec::NonStationaryM(1.5), PolicySpec::NonCurricular(2)] {
        let r = estimate_regret(policy, policy, &config(policy, 300, 2_000, 9)).unwrap();
        assert_eq!(r.paired.mean, 0.0);
        assert_eq!(r.paired.stderr, 0.0);
    }
}

#[test]
fn regret_of_pi_two_over_pi_one_grows_linearly() {
    // Exact difference is 2T - 10 for T >= 8.
    let mut means = Vec::new();
    for t in [200, 400, 800] {
        let r = estimate_regret(PolicySpec::PiN(2), PolicySpec::PiN(1), &config(PolicySpec::PiN(1), t, 20_000, 12)).unwrap();
        let exact = value_pi_n_undiscounted(2, t, &base()).unwrap().value - value_pi_n_undiscounted(1, t, &base()).unwrap().value;
        assert!(r.paired.within(exact, 3.0), "T={t}: {:?} vs {exact}", r.paired);
        means.push(r.paired);
    }
    let slope = (means[2].mean - means[0].mean) / 600.0;
    let slope_se = means[2].stderr.hypot(means[0].stderr) / 600.0;
    assert!(slope > 3.0 * slope_se, "slope {slope} se {slope_se}");
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let c = config(PolicySpec::StochasticP(0.4), 300, 5_000, 21);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_value(&c).unwrap())
    };
    let one = run(1);
    let eight = run(8);
    assert_eq!(one.undiscounted.mean.to_bits(), eight.undiscounted.mean.to_bits());
    assert_eq!(one.undiscounted.stderr.to_bits(), eight.undiscounted.stderr.to_bits());
    assert_eq!(one.discounted.mean.to_bits(), eight.discounted.mean.to_bits());
}

#[test]
fn stochastic_policy_matches_exact_recursion() {
    let e = estimate_value(&config(PolicySpec::StochasticP(0.5), 40, 200_000, 2)).unwrap();
    let exact = value_stochastic_exact(0.5, 40, &base()).unwrap().value;
    assert!(e.undiscounted.within(exact, 3.0), "{:?} vs {exact}", e.undiscounted);
}

#[test]
fn sweep_at_m_equal_t_never_explores() {
    let s = sweep_m(&base(), 50, &[50.0], 100, 1).unwrap();
    assert_eq!(s.no_exploration, vec![true]);
    assert_eq!(s.value_estimates[0].mean, 50.0);
    assert!(s.boundary_max);
    assert!(sweep_m(&base(), 50, &[], 100, 1).is_err());
    assert!(sweep_m(&base(), 50, &[51.0], 100, 1).is_err());
}

#[test]
fn sweep_reports_the_grid_maximum() {
    let grid = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0];
    let s = sweep_m(&base(), 200, &grid, 2_000, 5).unwrap();
    let best = s.value_estimates.iter().map(|e| e.mean).fold(f64::NEG_INFINITY, f64::max);
    let i = s.value_estimates.iter().position(|e| e.mean == best).unwrap();
    assert_eq!(s.m_star, grid[i]);
    assert_eq!(s.p_star, (s.m_star + 1.0) / (s.m_star + 4.0));
    assert_eq!(s.boundary_max, i == 0 || i == grid.len() - 1);
}

#[test]
fn diagnostics_vanish_at_m_equal_alpha() {
    let d = conjecture_diagnostics(&base(), 3, 2.0, 60, 20_000, 4).unwrap();
    assert_eq!(d.analytic_factor, 0.0);
    assert_eq!(d.f_tilde_analytic(), 0.0);
    assert!(d.f_tilde_n.within(0.0, 3.0) || d.f_tilde_n.stderr == 0.0, "{:?}", d.f_tilde_n);
}

#[test]
fn diagnostics_at_large_horizon_recover_the_factor() {
    for (n, m) in [(1, 0.5), (2, 1.0), (4, 3.0)] {
        let horizon = (100.0 * n as f64 * (4.0 + m)) as u64;
        let d = conjecture_diagnostics(&base(), n, m, horizon, 50_000, 8).unwrap();
        assert!(d.probability_term > 1.0 - 1e-12);
        assert!(d.f_tilde_n.within(d.analytic_factor, 3.0), "n={n}: {:?} vs {}", d.f_tilde_n, d.analytic_factor);
    }
}

#[test]
fn decoupled_summand_factorises() {
    let d = conjecture_diagnostics(&base(), 2, 1.0, 12, 100_000, 10).unwrap();
    let product = d.probability_estimate.mean * d.analytic_factor;
    assert!(d.f_tilde_n.within(product, 3.0), "{:?} vs {product}", d.f_tilde_n);
    assert!(d.f_tilde_n.within(d.f_tilde_analytic(), 3.0));
    assert!((d.probability_estimate.mean - d.probability_term).abs() <= 3.0 * d.probability_estimate.stderr);
    assert!(conjecture_diagnostics(&base(), 0, 1.0, 12, 10, 10).is_err());
}
