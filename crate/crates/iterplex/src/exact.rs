//! Exact combinatorial helpers shared across the crate.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

/// Binomial coefficient `C(n, r)`, zero when `r > n`.
pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// The number of distinct arrangements of the multiset holding each of `n`
/// symbols `k` times: `(kn)! / (k!)^n`. This is the constant row sum of the
/// signature step matrix.
pub fn multiset_permutation_count(n: u64, k: u64) -> BigUint {
    // Build as ∏ C(ik, k), which keeps every intermediate value integral.
    let mut acc = BigUint::one();
    for i in 1..=n {
        acc *= binomial(i * k, k);
    }
    acc
}

/// The number of admissible columns in the partial recurrence: choose which
/// `l` of the `n` symbols appear, each `k` times: `C(n, l) · (kl)! / (k!)^l`.
pub fn partial_column_count(n: u64, k: u64, l: u64) -> BigUint {
    binomial(n, l) * multiset_permutation_count(l, k)
}

/// Exact quotient; panics if `b` does not divide `a`.
pub fn exact_div(a: BigUint, b: &BigUint) -> BigUint {
    let (q, r) = a.div_rem(b);
    assert!(r.is_zero(), "non-exact division");
    q
}

/// Advance `seq` to its lexicographic successor among the rearrangements of
/// its elements. Returns `false` (leaving `seq` untouched) once `seq` is the
/// last arrangement, i.e. sorted descending.
pub(crate) fn next_multiset_permutation(seq: &mut [usize]) -> bool {
    if seq.len() < 2 {
        return false;
    }
    let mut i = seq.len() - 1;
    while i > 0 && seq[i - 1] >= seq[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = seq.len() - 1;
    while seq[j] <= seq[i - 1] {
        j -= 1;
    }
    seq.swap(i - 1, j);
    seq[i..].reverse();
    true
}
