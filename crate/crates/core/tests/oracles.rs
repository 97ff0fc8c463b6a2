//! Closed forms against their Monte-Carlo counterparts.

use curriculum_bandit::analytic::*;
use curriculum_bandit::enumeration::enumeration_index;
use curriculum_bandit::lab::{estimate_value, RolloutConfig};
use curriculum_bandit::rng::{self, StreamRole};
use curriculum_bandit::stats::{summarize, EstimateResult};
use curriculum_bandit::{Action, EnvParams, GoalSequence, PolicySpec};

const TRIALS: u64 = 100_000;

fn mc(params: EnvParams, policy: PolicySpec, horizon: u64, seed: u64) -> EstimateResult {
    mc_with(params, policy, horizon, seed, TRIALS)
}

fn mc_with(params: EnvParams, policy: PolicySpec, horizon: u64, seed: u64, trials: u64) -> EstimateResult {
    let est = estimate_value(&RolloutConfig::new(params, policy, horizon, trials, seed).unwrap()).unwrap();
    if params.gamma() < 1.0 {
        est.discounted
    } else {
        est.undiscounted
    }
}

#[test]
fn discount_factor_matches_sampled_mean() {
    let (gamma, tau) = (0.9f64, 4.0);
    let samples: Vec<f64> = (0..TRIALS)
        .map(|i| {
            let mut r = rng::stream(31, i, StreamRole::Auxiliary);
            gamma.powi(rng::geometric(&mut r, tau) as i32)
        })
        .collect();
    let est = summarize(&samples);
    assert!(est.within(expected_discount_factor(gamma, tau), 3.0), "{est:?}");
}

#[test]
fn explore_then_commit_undiscounted() {
    let p = EnvParams::undiscounted(2.0, 4.0).unwrap();
    for (n, horizon) in [(1, 100), (3, 500), (2, 300)] {
        let exact = value_pi_n_undiscounted(n, horizon, &p).unwrap().value;
        let est = mc(p, PolicySpec::PiN(n), horizon, 5);
        assert!(est.within(exact, 3.0), "N={n}, T={horizon}: {exact} vs {est:?}");
    }
}

#[test]
fn explore_then_commit_discounted() {
    for (n, horizon, alpha, tau, gamma) in [
        (1, 200, 2.0, 2.0, 0.9),
        (2, 300, 2.0, 4.0, 0.95),
        (3, 400, 1.5, 3.0, 0.97),
    ] {
        let p = EnvParams::new(alpha, tau, gamma).unwrap();
        let exact = value_pi_n_discounted(n, horizon, &p).unwrap().value;
        let est = mc(p, PolicySpec::PiN(n), horizon, 6);
        assert!(est.within(exact, 3.0), "N={n}, gamma={gamma}: {exact} vs {est:?}");
    }
}

#[test]
fn exploration_stays_below_its_bound() {
    let p = EnvParams::new(2.0, 2.0, 0.9).unwrap();
    let bound = explore_value_bound(200, &p).unwrap().value;
    let est = mc(p, PolicySpec::Explore, 200, 7);
    assert!(est.mean - 3.0 * est.stderr <= bound, "{est:?} vs bound {bound}");
}

// Returns under small m are skewed by rare fast discoveries, hence the
// larger sample.
#[test]
fn exact_recursions_match_rollouts() {
    for gamma in [1.0, 0.9] {
        let p = EnvParams::new(2.0, 4.0, gamma).unwrap();
        for m in [0.5, 1.7, 3.0] {
            let exact = value_nonstationary_exact(m, 20, &p).unwrap().value;
            let est = mc_with(p, PolicySpec::NonStationaryM(m), 20, 8, 1_000_000);
            assert!(est.within(exact, 3.0), "m={m}, gamma={gamma}: {exact} vs {est:?}");
        }
        for q in [0.3, 0.6] {
            let exact = value_stochastic_exact(q, 20, &p).unwrap().value;
            let est = mc_with(p, PolicySpec::StochasticP(q), 20, 9, 1_000_000);
            assert!(est.within(exact, 3.0), "p={q}, gamma={gamma}: {exact} vs {est:?}");
        }
    }
}

#[test]
fn enumeration_series_matches_sampled_positions() {
    let tau = 4.0;
    let one = expected_mu_prime(1, tau, 200).unwrap();
    assert!((one.value - tau).abs() <= one.remainder_bound.max(1e-9));

    let series = expected_mu_prime(2, tau, 10_000).unwrap();
    let positions: Vec<f64> = (0..TRIALS)
        .map(|i| {
            let mut goal = GoalSequence::for_trial(tau, 77, i);
            let prefix = vec![goal.digit(0).unwrap(), goal.digit(1).unwrap()];
            enumeration_index(&Action::new(prefix).unwrap(), 2).unwrap() as f64
        })
        .collect();
    let est = summarize(&positions);
    assert!(est.within(series.value, 3.0), "{} vs {est:?}", series.value);
}

#[test]
fn non_curricular_value_matches_rollouts() {
    // One opening play of the empty action, mu' - 1 misses, then the hit and
    // every remaining step pay alpha^N.
    let p = EnvParams::undiscounted(2.0, 4.0).unwrap();
    let (n, horizon) = (2u32, 3000u64);
    let mu = expected_mu_prime(n, p.tau(), 10_000).unwrap().value;
    let alpha = p.alpha();
    let exact = 1.0 - (mu - 1.0) * p.miss_cost_scale() * alpha.powi(n as i32 - 1)
        + (horizon as f64 - mu) * alpha.powi(n as i32);
    let est = mc(p, PolicySpec::NonCurricular(n), horizon, 10);
    assert!(est.within(exact, 3.0), "{exact} vs {est:?}");
}
