//! Deterministic rational selection by Stern-Brocot descent.
//!
//! Whenever an operation has to pick "some rational in an open interval",
//! this crate always picks the unique smallest-denominator rational in the
//! interval, ties on the denominator broken by the smaller numerator. The
//! descent walks the Stern-Brocot tree with run-length jumps computed by
//! exact floor division, so tight intervals cost O(log denominator) steps
//! rather than one step per mediant.

use crate::rational::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// The unique smallest-denominator rational strictly inside `(lo, hi)`,
/// with denominator ties broken by the smaller numerator.
///
/// Requires `0 <= lo < hi`. All arithmetic is exact.
pub fn simplest_in_open(lo: &Rational, hi: &Rational) -> Rational {
    assert!(
        !lo.is_negative(),
        "simplest_in_open: negative lower bound {lo}"
    );
    assert!(lo < hi, "simplest_in_open: empty interval ({lo}, {hi})");

    // Denominator-1 candidates: the only integer that can lie in (lo, hi)
    // before any larger one is the least integer strictly above lo.
    let candidate = Rational::from_big(lo.floor_int() + BigInt::one(), BigInt::one());
    if candidate < *hi {
        return candidate;
    }

    // Descent state: left <= lo < hi <= right, with right = 1/0 as the
    // +infinity sentinel. The mediant chain toward `right` is
    // m_j = left + j*right (componentwise), increasing in value; the chain
    // toward `left` is right + j*left, decreasing.
    let (mut ln, mut ld) = (BigInt::zero(), BigInt::one());
    let (mut rn, mut rd) = (BigInt::one(), BigInt::zero());
    let (lo_n, lo_d) = (lo.numer().clone(), lo.denom().clone());
    let (hi_n, hi_d) = (hi.numer().clone(), hi.denom().clone());

    loop {
        let mn = &ln + &rn;
        let md = &ld + &rd;
        // Compare mediant with lo and hi by cross-multiplication.
        let vs_lo = &lo_d * &mn - &lo_n * &md;
        if !vs_lo.is_positive() {
            // mediant <= lo: jump right. Signed position of m_j against lo is
            // s_j = (lo_d*ln - lo_n*ld) + j*(lo_d*rn - lo_n*rd); find the
            // smallest j with s_j > 0 and move left to m_{j-1}.
            let gap = &lo_n * &ld - &lo_d * &ln; // -s_0 >= 0
            let step = &lo_d * &rn - &lo_n * &rd; // > 0 since right > lo
            debug_assert!(step.is_positive());
            let j = gap.div_floor(&step) + BigInt::one();
            debug_assert!(j >= BigInt::from(2));
            let back = &j - BigInt::one();
            ln += &back * &rn;
            ld += &back * &rd;
            continue;
        }
        let vs_hi = &hi_d * &mn - &hi_n * &md;
        if !vs_hi.is_negative() {
            // mediant >= hi: jump left symmetrically.
            let gap = &hi_d * &rn - &hi_n * &rd; // -t_0 >= 0
            let step = &hi_n * &ld - &hi_d * &ln; // > 0 since left < hi
            debug_assert!(step.is_positive());
            let j = gap.div_floor(&step) + BigInt::one();
            debug_assert!(j >= BigInt::from(2));
            let back = &j - BigInt::one();
            rn += &back * &ln;
            rd += &back * &ld;
            continue;
        }
        return Rational::from_big(mn, md);
    }
}

/// Smallest-denominator selection; `None` when the interval is empty.
pub fn try_simplest_in_open(lo: &Rational, hi: &Rational) -> Option<Rational> {
    if lo < hi {
        Some(simplest_in_open(lo, hi))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    /// Brute-force oracle: enumerate fractions by (denominator, numerator)
    /// and return the first one inside the open interval.
    fn brute_force(lo: &Rational, hi: &Rational, max_denom: i64) -> Option<Rational> {
        for d in 1..=max_denom {
            let mut n = lo.floor_int() * d;
            loop {
                let q = Rational::from_big(n.clone(), d.into());
                if q >= *hi {
                    break;
                }
                if q > *lo {
                    return Some(q);
                }
                n += 1;
            }
        }
        None
    }

    #[test]
    fn frozen_examples() {
        // Interval from the closed-set player's first move under the fair
        // measure at stake 1/4 with slack 1/4.
        assert_eq!(simplest_in_open(&rat(3, 8), &rat(1, 2)), rat(2, 5));
        assert_eq!(simplest_in_open(&rat(1, 4), &rat(3, 4)), rat(1, 2));
        assert_eq!(simplest_in_open(&rat(0, 1), &rat(1, 2)), rat(1, 3));
        assert_eq!(simplest_in_open(&rat(0, 1), &rat(1, 100)), rat(1, 101));
        assert_eq!(simplest_in_open(&rat(5, 1), &rat(7, 1)), rat(6, 1));
        // Tie on denominator 1: the smaller numerator wins.
        assert_eq!(simplest_in_open(&rat(1, 2), &rat(7, 2)), rat(1, 1));
    }

    #[test]
    fn matches_brute_force_oracle() {
        let mut checked = 0;
        for ad in 1..=9i64 {
            for an in 0..(2 * ad) {
                for bd in 1..=9i64 {
                    for bn in 1..(3 * bd) {
                        let lo = rat(an, ad);
                        let hi = rat(bn, bd);
                        if lo >= hi {
                            continue;
                        }
                        let got = simplest_in_open(&lo, &hi);
                        let want = brute_force(&lo, &hi, 200).unwrap();
                        assert_eq!(got, want, "interval ({lo}, {hi})");
                        assert!(got > lo && got < hi);
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn handles_tight_intervals() {
        let lo = rat(1_000_000, 3_000_001);
        let hi = rat(1_000_001, 3_000_000);
        let q = simplest_in_open(&lo, &hi);
        assert!(q > lo && q < hi);
        assert_eq!(q, rat(1, 3));
        // An interval that excludes 1/3 from above forces a huge denominator.
        let hi2 = rat(1_000_000, 3_000_000);
        let q2 = simplest_in_open(&lo, &hi2);
        assert!(q2 > lo && q2 < hi2);
    }
}
