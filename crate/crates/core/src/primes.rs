//! Small-prime utilities for the field constructions.

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime `>= n`.
pub fn next_prime(n: u64) -> u64 {
    let mut m = n.max(2);
    while !is_prime(m) {
        m += 1;
    }
    m
}

/// Primes in increasing order starting at 2.
pub fn primes() -> impl Iterator<Item = u64> {
    std::iter::successors(Some(2u64), |&p| Some(next_prime(p + 1)))
}
