use std::collections::HashSet;

use proptest::prelude::*;

use curriculum_bandit::analytic::{m_from_p, p_from_m};
use curriculum_bandit::enumeration::{compositions, enumeration_index, sequence_at};
use curriculum_bandit::env::reward;
use curriculum_bandit::finite::{finite_reward, FinitePiEnv, Posterior};
use curriculum_bandit::policy::{apply_outcome, is_exploiting, next_action_distribution};
use curriculum_bandit::rng::geometric_from_uniform;
use curriculum_bandit::stats::summarize;
use curriculum_bandit::{Action, AgentState, EnvParams, GoalSequence, PolicySpec};

fn params() -> impl Strategy<Value = EnvParams> {
    (1.05f64..4.0, 1.1f64..8.0, 0.5f64..=1.0).prop_map(|(a, t, g)| EnvParams::new(a, t, g).unwrap())
}

fn policy() -> impl Strategy<Value = PolicySpec> {
    prop_oneof![
        (0u32..5).prop_map(PolicySpec::PiN),
        Just(PolicySpec::Explore),
        (0.0f64..1.0).prop_map(PolicySpec::StochasticP),
        (0.0f64..4.0).prop_map(PolicySpec::NonStationaryM),
        (1u32..4).prop_map(PolicySpec::NonCurricular),
    ]
}

proptest! {
    #[test]
    fn empty_action_always_pays_one(p in params(), digits in prop::collection::vec(1u32..9, 1..5)) {
        let mut goal = GoalSequence::fixed(digits).unwrap();
        let out = reward(&Action::empty(), &mut goal, &p).unwrap();
        prop_assert_eq!(out.value, 1.0);
        prop_assert!(out.matched);
    }

    #[test]
    fn one_positive_action_per_length(p in params(), digits in prop::collection::vec(1u32..5, 3), k in 1usize..=3) {
        let mut goal = GoalSequence::fixed(digits.clone()).unwrap();
        // Every length-k tuple over {1..5}.
        let mut values = Vec::new();
        for code in 0..5usize.pow(k as u32) {
            let tuple: Vec<u32> = (0..k).map(|i| (code / 5usize.pow(i as u32) % 5) as u32 + 1).collect();
            values.push((tuple.clone(), reward(&Action::new(tuple).unwrap(), &mut goal, &p).unwrap().value));
        }
        let positive: Vec<_> = values.iter().filter(|(_, v)| *v > 0.0).collect();
        prop_assert_eq!(positive.len(), 1);
        prop_assert_eq!(&positive[0].0[..], &digits[..k]);
        let miss = p.miss_reward(k).unwrap();
        prop_assert!(values.iter().filter(|(_, v)| *v <= 0.0).all(|(_, v)| *v == miss));
    }

    #[test]
    fn action_laws_are_proper_and_skip_failed_guesses(
        spec in policy(),
        digits in prop::collection::vec(1u32..5, 40),
        coins in prop::collection::vec(0.0f64..1.0, 30),
    ) {
        let p = EnvParams::undiscounted(2.0, 4.0).unwrap();
        let mut goal = GoalSequence::fixed(digits).unwrap();
        let mut state = AgentState::new();
        let mut failed: HashSet<Action> = HashSet::new();
        for u in coins {
            let law = next_action_distribution(&spec, &state);
            prop_assert!((law.total_mass() - 1.0).abs() < 1e-12);
            for (a, _) in &law.support {
                prop_assert!(!failed.contains(a), "{} was already refuted", a);
            }
            prop_assert!(is_exploiting(&state.known_prefix, &state));
            let action = law.sample(u).clone();
            let out = reward(&action, &mut goal, &p).unwrap();
            if !out.matched {
                failed.insert(action.clone());
            }
            state = apply_outcome(&state, &action, &out).unwrap();
        }
    }

    #[test]
    fn only_the_known_prefix_is_exploitation(prefix in prop::collection::vec(1u32..9, 0..4), d in 1u32..9) {
        let mut state = AgentState::new();
        state.known_prefix = Action::new(prefix.clone()).unwrap();
        state.opened = true;
        prop_assert!(is_exploiting(&state.known_prefix, &state));
        prop_assert!(!is_exploiting(&state.known_prefix.extended(d), &state));
        if !prefix.is_empty() {
            prop_assert!(!is_exploiting(&Action::new(prefix[..prefix.len() - 1].to_vec()).unwrap(), &state));
        }
    }

    #[test]
    fn enumeration_round_trips(len in 1usize..=6, offset in 0u128..5000) {
        let index = offset + 1;
        let a = sequence_at(index, len).unwrap();
        prop_assert_eq!(a.len(), len);
        prop_assert_eq!(enumeration_index(&a, len).unwrap(), index);
        // Sum-then-lex order: the shell of the index matches the digit sum.
        let sum: u32 = a.digits().iter().sum();
        let before: u128 = (len as u64..sum as u64).map(|s| compositions(s, len as u64).unwrap()).sum();
        prop_assert!(index > before && index <= before + compositions(sum as u64, len as u64).unwrap());
    }

    #[test]
    fn inverse_cdf_is_monotone(u in 1e-12f64..1.0, v in 1e-12f64..1.0, mean in 1.01f64..20.0) {
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        prop_assert!(geometric_from_uniform(lo, mean) >= geometric_from_uniform(hi, mean));
        prop_assert!(geometric_from_uniform(hi, mean) >= 1);
    }

    #[test]
    fn exploit_probability_mapping_inverts(m in 0.0f64..50.0, tau in 1.1f64..10.0) {
        let p = p_from_m(m, tau).unwrap();
        prop_assert!((1.0 / tau..1.0).contains(&p));
        prop_assert!((m_from_p(p, tau).unwrap() - m).abs() <= 1e-9 * m.max(1.0));
    }

    #[test]
    fn summaries_ignore_order(mut xs in prop::collection::vec(-1e6f64..1e6, 2..200), seed in any::<u64>()) {
        let a = summarize(&xs);
        let k = (seed % xs.len() as u64) as usize;
        xs.rotate_left(k);
        xs.reverse();
        let b = summarize(&xs);
        prop_assert!((a.mean - b.mean).abs() <= 1e-9 * a.mean.abs().max(1.0));
        prop_assert!((a.stderr - b.stderr).abs() <= 1e-9 * a.stderr.max(1.0));
    }

    #[test]
    fn eliminated_hypotheses_stay_eliminated(truth in 10u8..=99, actions in prop::collection::vec(0u8..100, 1..40)) {
        let env = FinitePiEnv::new(2.0, 4.0, truth).unwrap();
        let mut post = Posterior::uniform();
        let mut dead: HashSet<u8> = HashSet::new();
        for a in actions {
            post = post.update(a, finite_reward(a, truth, &env), &env).unwrap();
            let total: f64 = post.support_weights().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(post.weight(truth) > 0.0);
            for &t in &dead {
                prop_assert_eq!(post.weight(t), 0.0);
            }
            dead.extend((10..=99).filter(|&t| post.weight(t) == 0.0));
        }
    }
}
