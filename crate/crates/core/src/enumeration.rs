//! Sum-then-lexicographic ordering of length-`N` positive-integer tuples.
//!
//! Tuples are listed by ascending digit sum; inside one sum shell they are
//! ordered lexicographically. This is the guessing order of the
//! non-curricular policy, and the position of the goal prefix in it is the
//! number of guesses that policy needs.

use crate::env::Action;
use crate::error::{invalid, Error, Result};

/// `C(n, k)` in u128, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Number of length-`parts` positive tuples with digit sum `sum`.
pub fn compositions(sum: u64, parts: u64) -> Option<u128> {
    match (sum, parts) {
        (0, 0) => Some(1),
        (_, 0) => Some(0),
        (s, p) if s < p => Some(0),
        (s, p) => binomial(s - 1, p - 1),
    }
}

/// 1-based position of `action` among all length-`len` tuples.
pub fn enumeration_index(action: &Action, len: usize) -> Result<u128> {
    if action.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: action.len(),
        });
    }
    if len == 0 {
        return Err(invalid("len", "enumeration length must be positive"));
    }
    let overflow = || Error::EnumerationOverflow { len };
    let digits = action.digits();
    let total: u64 = digits.iter().map(|&d| d as u64).sum();
    let n = len as u64;

    // Tuples in lighter shells.
    let mut index: u128 = 0;
    for s in n..total {
        index = index.checked_add(compositions(s, n).ok_or_else(overflow)?).ok_or_else(overflow)?;
    }
    // Lexicographic rank inside the shell.
    let mut remaining = total;
    for (pos, &d) in digits.iter().enumerate() {
        let parts_after = n - pos as u64 - 1;
        for smaller in 1..d as u64 {
            let count = compositions(remaining - smaller, parts_after).ok_or_else(overflow)?;
            index = index.checked_add(count).ok_or_else(overflow)?;
        }
        remaining -= d as u64;
    }
    index.checked_add(1).ok_or_else(overflow)
}

/// Inverse of [`enumeration_index`].
pub fn sequence_at(index: u128, len: usize) -> Result<Action> {
    if len == 0 {
        return Err(invalid("len", "enumeration length must be positive"));
    }
    if index == 0 {
        return Err(invalid("index", "enumeration indices start at 1"));
    }
    let overflow = || Error::EnumerationOverflow { len };
    let n = len as u64;
    let mut rank = index - 1;
    let mut total = n;
    loop {
        let shell = compositions(total, n).ok_or_else(overflow)?;
        if rank < shell {
            break;
        }
        rank -= shell;
        total += 1;
    }
    let mut digits = Vec::with_capacity(len);
    let mut remaining = total;
    for pos in 0..n {
        let parts_after = n - pos - 1;
        let mut d = 1u64;
        loop {
            let count = compositions(remaining - d, parts_after).ok_or_else(overflow)?;
            if rank < count {
                break;
            }
            rank -= count;
            d += 1;
        }
        digits.push(d as u32);
        remaining -= d;
    }
    Ok(Action::from_digits_unchecked(digits))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(d: &[u32]) -> Action {
        Action::new(d.to_vec()).unwrap()
    }

    /// Brute force: all tuples with entries in 1..=max_digit, sorted by (sum, lex).
    fn brute_order(len: usize, max_sum: u32) -> Vec<Vec<u32>> {
        let mut all: Vec<Vec<u32>> = vec![vec![]];
        for _ in 0..len {
            let mut next = Vec::new();
            for prefix in &all {
                for d in 1..=max_sum {
                    let mut t = prefix.clone();
                    t.push(d);
                    next.push(t);
                }
            }
            all = next;
        }
        all.retain(|t| t.iter().sum::<u32>() <= max_sum);
        all.sort_by(|a, b| (a.iter().sum::<u32>(), a).cmp(&(b.iter().sum::<u32>(), b)));
        all
    }

    #[test]
    fn all_ones_is_first() {
        for n in 1..6 {
            assert_eq!(enumeration_index(&act(&vec![1; n]), n).unwrap(), 1);
        }
    }

    #[test]
    fn length_two_examples() {
        assert_eq!(enumeration_index(&act(&[1, 2]), 2).unwrap(), 2);
        assert_eq!(enumeration_index(&act(&[2, 1]), 2).unwrap(), 3);
    }

    #[test]
    fn single_digit_index_is_the_digit() {
        for d in 1..50 {
            assert_eq!(enumeration_index(&act(&[d]), 1).unwrap(), d as u128);
        }
    }

    #[test]
    fn matches_brute_force_and_round_trips() {
        for len in 1..=3 {
            for (i, t) in brute_order(len, 9).iter().enumerate() {
                let a = act(t);
                let idx = enumeration_index(&a, len).unwrap();
                assert_eq!(idx, i as u128 + 1, "{t:?}");
                assert_eq!(sequence_at(idx, len).unwrap(), a);
            }
        }
    }

    #[test]
    fn length_mismatch() {
        assert_eq!(
            enumeration_index(&act(&[1, 2]), 3),
            Err(Error::LengthMismatch { expected: 3, actual: 2 })
        );
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), Some(10));
        assert_eq!(binomial(0, 0), Some(1));
        assert_eq!(binomial(3, 4), Some(0));
        assert_eq!(compositions(4, 2), Some(3));
    }
}
