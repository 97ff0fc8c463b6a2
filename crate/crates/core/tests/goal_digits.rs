use curriculum_bandit::env::reward;
use curriculum_bandit::lab::{rollout_with_trace, GoalMode, RolloutConfig};
use curriculum_bandit::{EnvParams, GoalSequence, PolicySpec};

const SAMPLES: u64 = 100_000;
// Bins 1..=15 plus a tail bin: 15 degrees of freedom.
const BINS: usize = 16;
const CHI2_CRITICAL_DF15_P001: f64 = 37.697;

fn chi_square(counts: &[u64], tau: f64) -> f64 {
    let q = 1.0 - 1.0 / tau;
    let n = counts.iter().sum::<u64>() as f64;
    let mut stat = 0.0;
    for (j, &c) in counts.iter().enumerate() {
        let p = if j + 1 < BINS { q.powi(j as i32) / tau } else { q.powi(BINS as i32 - 1) };
        let expected = n * p;
        stat += (c as f64 - expected).powi(2) / expected;
    }
    stat
}

fn bin(d: u32) -> usize {
    (d as usize).min(BINS) - 1
}

#[test]
fn first_digits_across_trials_are_geometric() {
    let mut counts = [0u64; BINS];
    for trial in 0..SAMPLES {
        let mut goal = GoalSequence::for_trial(4.0, 99, trial);
        counts[bin(goal.sample_next_goal_digit().unwrap())] += 1;
    }
    let stat = chi_square(&counts, 4.0);
    assert!(stat < CHI2_CRITICAL_DF15_P001, "chi2 = {stat}");
}

#[test]
fn digits_within_one_goal_are_geometric() {
    let mut goal = GoalSequence::for_trial(4.0, 99, 0);
    let mut counts = [0u64; BINS];
    for _ in 0..SAMPLES {
        counts[bin(goal.sample_next_goal_digit().unwrap())] += 1;
    }
    let stat = chi_square(&counts, 4.0);
    assert!(stat < CHI2_CRITICAL_DF15_P001, "chi2 = {stat}");
}

#[test]
fn discovery_time_equals_goal_digit() {
    // With curricular guesses 1, 2, 3, ... digit k is found on guess a*_k.
    let digits = vec![3, 1, 5, 2, 7, 1, 4];
    let p = EnvParams::undiscounted(2.0, 4.0).unwrap();
    let config = RolloutConfig::new(p, PolicySpec::Explore, 24, 1, 0)
        .unwrap()
        .with_goal(GoalMode::Fixed(digits.clone()));
    let (_, trace) = rollout_with_trace(&config, 0).unwrap();
    let mut guesses = 0;
    let mut found = Vec::new();
    for rec in trace.iter().skip(1) {
        guesses += 1;
        if rec.known_len > found.len() {
            found.push(guesses);
            guesses = 0;
        }
    }
    assert_eq!(found, digits);
}

#[test]
fn goal_replays_from_seed() {
    let draw = |seed| {
        let mut g = GoalSequence::for_trial(4.0, seed, 17);
        (0..50).map(|_| g.sample_next_goal_digit().unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(draw(5), draw(5));
    assert_ne!(draw(5), draw(6));
}

#[test]
fn digits_do_not_depend_on_query_order() {
    let p = EnvParams::undiscounted(2.0, 4.0).unwrap();
    let mut a = GoalSequence::for_trial(4.0, 1, 3);
    let mut b = GoalSequence::for_trial(4.0, 1, 3);
    let deep = curriculum_bandit::Action::new(vec![1; 6]).unwrap();
    reward(&deep, &mut a, &p).unwrap();
    let first: Vec<u32> = (0..6).map(|i| a.digit(i).unwrap()).collect();
    let second: Vec<u32> = (0..6).map(|i| b.digit(i).unwrap()).collect();
    assert_eq!(first, second);
}

#[test]
fn exhausted_fixed_goal_is_an_error() {
    let mut g = GoalSequence::fixed(vec![2]).unwrap();
    g.sample_next_goal_digit().unwrap();
    assert!(g.sample_next_goal_digit().is_err());
    assert!(GoalSequence::fixed(vec![1, 0]).is_err());
}
