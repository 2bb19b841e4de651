//! Exact counting helpers shared by the tree, matching and array modules.
//!
//! Everything is arbitrary-precision; the bound comparisons downstream are
//! exact ratios of factorials and must never round.

use alloc::vec::Vec;
use num_bigint::BigUint;
use num_traits::One;

/// `n!` as an exact big integer.
pub fn factorial(n: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

/// Binomial coefficient `C(n, k)`, exactly; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Falling factorial `n · (n-1) ··· (n-k+1) = n!/(n-k)!`.
///
/// Callers must ensure `k <= n`; the empty product is 1.
pub fn falling_factorial(n: u64, k: u64) -> BigUint {
    debug_assert!(k <= n);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
    }
    acc
}

/// All size-`k` subsets of `0..n` in lexicographic order.
pub fn subsets(n: u32, k: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: u32, k: u32, start: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k as usize {
            out.push(cur.clone());
            return;
        }
        let need = k as usize - cur.len();
        for v in start..n {
            if ((n - v) as usize) < need {
                break;
            }
            cur.push(v);
            rec(n, k, v + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_and_binomials() {
        assert_eq!(factorial(0), BigUint::from(1u32));
        assert_eq!(factorial(5), BigUint::from(120u32));
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(3, 5), BigUint::ZERO);
        assert_eq!(falling_factorial(4, 2), BigUint::from(12u32));
        assert_eq!(falling_factorial(7, 0), BigUint::from(1u32));
    }

    #[test]
    fn subset_enumeration_is_complete_and_ordered() {
        let s = subsets(4, 2);
        assert_eq!(s.len(), 6);
        let mut sorted = s.clone();
        sorted.sort();
        assert_eq!(s, sorted);
    }
}
