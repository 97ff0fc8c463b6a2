//! Agent state and the five policy classes.
//!
//! The agent state is a sufficient statistic of the history: the confirmed
//! goal prefix, how many guesses at the next position have failed, and how
//! many times the prefix has been exploited since it was discovered.
//!
//! Every policy opens with a single play of `∅`. That opening play is the
//! "discovery" of the level-0 prefix; it is what makes the first step of the
//! always-exploring agent pay 1 and what the closed-form values assume.
//! Curricular exploration guesses the next digit in ascending order
//! `1, 2, 3, ...`, so discovering digit `k` takes exactly `a*_k` guesses.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::enumeration::sequence_at;
use crate::env::{Action, RewardOutcome};
use crate::error::{invalid, Error, Result};

/// One of the policy classes of the curricular bandit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PolicySpec {
    /// Explore until `N` digits are known, then exploit forever.
    PiN(u32),
    /// Always explore the next digit.
    Explore,
    /// Exploit with probability `p`, explore otherwise, at every step.
    StochasticP(f64),
    /// After each discovery exploit `m` times, then explore until the next one.
    NonStationaryM(f64),
    /// Guess whole length-`N` tuples in sum-then-lex order, then exploit.
    NonCurricular(u32),
}

impl PolicySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PolicySpec::StochasticP(p) if !(0.0..1.0).contains(&p) => {
                Err(invalid("p", format!("exploit probability must lie in [0, 1), got {p}")))
            }
            PolicySpec::NonStationaryM(m) if !(m.is_finite() && m >= 0.0) => {
                Err(invalid("m", format!("exploit count must be finite and >= 0, got {m}")))
            }
            PolicySpec::NonCurricular(0) => Err(invalid("N", "non-curricular length must be positive")),
            _ => Ok(()),
        }
    }

    /// Short tag used in tables, e.g. `pi_N:3` or `p:0.5`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::PiN(n) => write!(f, "pi_N:{n}"),
            PolicySpec::Explore => f.write_str("explore"),
            PolicySpec::StochasticP(p) => write!(f, "p:{p}"),
            PolicySpec::NonStationaryM(m) => write!(f, "ns:{m}"),
            PolicySpec::NonCurricular(n) => write!(f, "nc:{n}"),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (tag, arg) = match s.split_once(':') {
            Some((t, a)) => (t.trim(), Some(a.trim())),
            None => (s, None),
        };
        let bad = || invalid("policy", format!("cannot parse `{s}`"));
        let int = |a: Option<&str>| a.and_then(|v| v.parse::<u32>().ok()).ok_or_else(bad);
        let real = |a: Option<&str>| a.and_then(|v| v.parse::<f64>().ok()).ok_or_else(bad);
        let spec = match tag {
            "pi_N" | "piN" | "pi" => PolicySpec::PiN(int(arg)?),
            "explore" if arg.is_none() => PolicySpec::Explore,
            "p" | "stochastic" => PolicySpec::StochasticP(real(arg)?),
            "ns" | "nonstationary" => PolicySpec::NonStationaryM(real(arg)?),
            "nc" | "noncurricular" => PolicySpec::NonCurricular(int(arg)?),
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Sufficient statistic of the history under curricular or enumerative play.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct AgentState {
    /// Goal digits confirmed so far.
    pub known_prefix: Action,
    /// Failed guesses since the last discovery. For curricular exploration
    /// these are the digits `1..=failed_count` at the next position; for the
    /// non-curricular policy it is the enumeration cursor.
    pub failed_count: u64,
    /// Exploit plays since the last discovery.
    pub exploit_streak: u64,
    pub step: u64,
    /// The opening play of `∅` has happened.
    pub opened: bool,
}

impl AgentState {
    pub fn new() -> Self {
        Self::default()
    }

    /// The curricular candidate: known prefix extended by `failed_count + 1`.
    pub fn next_curricular_guess(&self) -> Action {
        let digit = u32::try_from(self.failed_count + 1).unwrap_or(u32::MAX);
        self.known_prefix.extended(digit)
    }
}

/// Finite-support distribution over actions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionDistribution {
    pub support: Vec<(Action, f64)>,
    pub degenerate: bool,
}

impl ActionDistribution {
    pub fn point(action: Action) -> Self {
        Self {
            support: vec![(action, 1.0)],
            degenerate: true,
        }
    }

    /// Two-point mixture; zero-mass entries are dropped.
    pub fn mix(first: Action, p_first: f64, second: Action) -> Self {
        if p_first <= 0.0 {
            Self::point(second)
        } else if p_first >= 1.0 {
            Self::point(first)
        } else {
            Self {
                support: vec![(first, p_first), (second, 1.0 - p_first)],
                degenerate: false,
            }
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.support.iter().map(|(_, p)| p).sum()
    }

    pub fn probability_of(&self, action: &Action) -> f64 {
        self.support
            .iter()
            .filter(|(a, _)| a == action)
            .map(|(_, p)| p)
            .sum()
    }

    /// Selects an action from a uniform draw `u` in `[0, 1)`.
    pub fn sample(&self, u: f64) -> &Action {
        let mut acc = 0.0;
        for (a, p) in &self.support {
            acc += p;
            if u < acc {
                return a;
            }
        }
        &self.support[self.support.len() - 1].0
    }
}

/// Compact description of a play relative to the agent state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    /// Replay the confirmed prefix (the opening `∅` play included).
    Exploit,
    /// Confirmed prefix extended by one candidate digit.
    Explore(u32),
    /// A whole tuple, as played by the non-curricular policy.
    Guess(Action),
}

impl Move {
    pub fn action(&self, state: &AgentState) -> Action {
        match self {
            Move::Exploit => state.known_prefix.clone(),
            Move::Explore(d) => state.known_prefix.extended(*d),
            Move::Guess(a) => a.clone(),
        }
    }

    /// Recovers the move that plays `action` in `state`.
    pub fn classify(action: &Action, state: &AgentState) -> Move {
        let known = &state.known_prefix;
        if action == known {
            Move::Exploit
        } else if action.len() == known.len() + 1 && action.digits().starts_with(known.digits()) {
            Move::Explore(action.digits()[known.len()])
        } else {
            Move::Guess(action.clone())
        }
    }
}

/// At most two moves; the first is taken when the uniform draw falls below `p_first`.
#[derive(Debug, Clone, PartialEq)]
pub enum MoveLaw {
    Point(Move),
    Mix(Move, f64, Move),
}

impl MoveLaw {
    fn mix(first: Move, p_first: f64, second: Move) -> Self {
        if p_first <= 0.0 {
            MoveLaw::Point(second)
        } else if p_first >= 1.0 {
            MoveLaw::Point(first)
        } else {
            MoveLaw::Mix(first, p_first, second)
        }
    }

    /// Move selected by a uniform draw `u` in `[0, 1)`.
    pub fn choose(self, u: f64) -> Move {
        match self {
            MoveLaw::Point(m) => m,
            MoveLaw::Mix(a, p, b) => {
                if u < p {
                    a
                } else {
                    b
                }
            }
        }
    }
}

/// Law of the next move of `spec` in `state`.
pub fn move_law(spec: &PolicySpec, state: &AgentState) -> MoveLaw {
    if !state.opened {
        return MoveLaw::Point(Move::Exploit);
    }
    let explore = || Move::Explore(u32::try_from(state.failed_count + 1).unwrap_or(u32::MAX));
    match *spec {
        PolicySpec::PiN(n) => {
            if state.known_prefix.len() < n as usize {
                MoveLaw::Point(explore())
            } else {
                MoveLaw::Point(Move::Exploit)
            }
        }
        PolicySpec::Explore => MoveLaw::Point(explore()),
        PolicySpec::StochasticP(p) => MoveLaw::mix(Move::Exploit, p, explore()),
        PolicySpec::NonStationaryM(m) => {
            // floor(m) exploits, then one more with probability frac(m),
            // decided before the first guess at the new level.
            let whole = m.floor();
            let frac = m - whole;
            let streak = state.exploit_streak as f64;
            if streak < whole {
                MoveLaw::Point(Move::Exploit)
            } else if streak == whole && frac > 0.0 && state.failed_count == 0 {
                MoveLaw::mix(Move::Exploit, frac, explore())
            } else {
                MoveLaw::Point(explore())
            }
        }
        PolicySpec::NonCurricular(n) => {
            if state.known_prefix.len() >= n as usize {
                MoveLaw::Point(Move::Exploit)
            } else {
                let guess = sequence_at(state.failed_count as u128 + 1, n as usize)
                    .expect("enumeration cursor within u128 range");
                MoveLaw::Point(Move::Guess(guess))
            }
        }
    }
}

/// Action law of `spec` in `state`.
pub fn next_action_distribution(spec: &PolicySpec, state: &AgentState) -> ActionDistribution {
    match move_law(spec, state) {
        MoveLaw::Point(m) => ActionDistribution::point(m.action(state)),
        MoveLaw::Mix(a, p, b) => ActionDistribution::mix(a.action(state), p, b.action(state)),
    }
}

impl AgentState {
    /// In-place transition after `mv` was played and its match status observed.
    pub fn advance(&mut self, mv: &Move, matched: bool) -> Result<()> {
        if !self.opened {
            if *mv != Move::Exploit || !self.known_prefix.is_empty() {
                return Err(Error::InconsistentOutcome(
                    "first play must be the empty action".to_string(),
                ));
            }
            self.opened = true;
            self.step += 1;
            return Ok(());
        }
        match mv {
            Move::Exploit => {
                if !matched {
                    return Err(Error::InconsistentOutcome(format!(
                        "exploiting the confirmed prefix {} cannot miss",
                        self.known_prefix
                    )));
                }
                self.exploit_streak += 1;
            }
            Move::Explore(d) if matched => {
                self.known_prefix = self.known_prefix.extended(*d);
                self.failed_count = 0;
                self.exploit_streak = 0;
            }
            Move::Guess(a) if matched => {
                let extends =
                    a.len() > self.known_prefix.len() && a.digits().starts_with(self.known_prefix.digits());
                if !extends {
                    return Err(Error::InconsistentOutcome(format!(
                        "matched action {a} does not extend the known prefix {}",
                        self.known_prefix
                    )));
                }
                self.known_prefix = a.clone();
                self.failed_count = 0;
                self.exploit_streak = 0;
            }
            Move::Explore(_) | Move::Guess(_) => self.failed_count += 1,
        }
        self.step += 1;
        Ok(())
    }
}

/// State transition after playing `action` and observing `outcome`.
pub fn apply_outcome(state: &AgentState, action: &Action, outcome: &RewardOutcome) -> Result<AgentState> {
    let mut next = state.clone();
    next.advance(&Move::classify(action, state), outcome.matched)?;
    Ok(next)
}

/// Whether `action` is the best action known in `state`.
pub fn is_exploiting(action: &Action, state: &AgentState) -> bool {
    action == &state.known_prefix
}
