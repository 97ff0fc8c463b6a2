//! Counter-based random streams.
//!
//! Every trial owns independent ChaCha8 streams keyed by the master seed and
//! addressed by `(trial_index, role)`. Because a stream is selected by its
//! counter rather than by the order in which trials are scheduled, serial and
//! parallel runs draw identical numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Which consumer a stream belongs to inside one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamRole {
    /// Goal digits `a*_k`. Shared across policies for common random numbers.
    Goal = 0,
    /// Randomisation inside the policy (exploit/explore coin flips).
    Policy = 1,
    /// Independent copies used by diagnostics.
    Auxiliary = 2,
}

const ROLES: u64 = 4;

/// Deterministic generator for `(master_seed, trial_index, role)`.
pub fn stream(master_seed: u64, trial_index: u64, role: StreamRole) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index.wrapping_mul(ROLES).wrapping_add(role as u64));
    rng
}

/// Uniform draw on the half-open interval `(0, 1]`.
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Geometric variate on `{1, 2, ...}` with mean `mean`, by inverse CDF.
///
/// `P(X = j) = (1 - 1/mean)^(j-1) / mean`.
pub fn geometric<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u32 {
    let u = open_unit(rng);
    geometric_from_uniform(u, mean)
}

/// Inverse CDF of the geometric law: smallest `j` with `1 - q^j >= 1 - u`.
pub fn geometric_from_uniform(u: f64, mean: f64) -> u32 {
    debug_assert!(u > 0.0 && u <= 1.0);
    if mean <= 1.0 {
        return 1;
    }
    let log_q = (-1.0 / mean).ln_1p();
    // P(X > j) = q^j; X = 1 + floor(ln u / ln q).
    let draw = (u.ln() / log_q).floor();
    if draw >= (u32::MAX - 1) as f64 {
        u32::MAX
    } else {
        1 + draw as u32
    }
}
