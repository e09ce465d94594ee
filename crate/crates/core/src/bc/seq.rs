//! Finitely-described stake sequences with exact partial sums, tail bounds,
//! and divergence witnesses.

use crate::rational::Rational;
use serde::{Deserialize, Serialize};

/// A rational sequence given by a closed-form rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RationalSeq {
    /// `s_i = value` for all i.
    Const { value: Rational },
    /// `s_i = first * ratio^i`.
    Geometric { first: Rational, ratio: Rational },
    /// Explicit head, then a constant tail.
    Explicit {
        values: Vec<Rational>,
        then: Rational,
    },
}

impl RationalSeq {
    pub fn constant(value: Rational) -> Self {
        RationalSeq::Const { value }
    }

    pub fn at(&self, i: usize) -> Rational {
        match self {
            RationalSeq::Const { value } => value.clone(),
            RationalSeq::Geometric { first, ratio } => first.clone() * ratio.pow(i as u32),
            RationalSeq::Explicit { values, then } => {
                values.get(i).cloned().unwrap_or_else(|| then.clone())
            }
        }
    }

    /// Exact sum of the first `n` terms.
    pub fn partial_sum(&self, n: usize) -> Rational {
        (0..n).map(|i| self.at(i)).sum()
    }

    /// An exact upper bound for the tail sum from index `n` on; `None` when
    /// the tail diverges.
    pub fn tail_sum_bound(&self, n: usize) -> Option<Rational> {
        match self {
            RationalSeq::Const { value } => {
                if value.is_zero() {
                    Some(Rational::zero())
                } else {
                    None
                }
            }
            RationalSeq::Geometric { first, ratio } => {
                if first.is_zero() {
                    return Some(Rational::zero());
                }
                if *ratio >= Rational::one() {
                    return None;
                }
                // first * ratio^n / (1 - ratio), exactly.
                Some(first.clone() * ratio.pow(n as u32) / (Rational::one() - ratio.clone()))
            }
            RationalSeq::Explicit { values, then } => {
                if !then.is_zero() {
                    return None;
                }
                Some(values.iter().skip(n).cloned().sum())
            }
        }
    }

    /// True when the series provably diverges (a computable witness: partial
    /// sums exceed any requested bound).
    pub fn diverges(&self) -> bool {
        match self {
            RationalSeq::Const { value } => value.is_positive(),
            RationalSeq::Geometric { first, ratio } => {
                first.is_positive() && *ratio >= Rational::one()
            }
            RationalSeq::Explicit { then, .. } => then.is_positive(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn geometric_tail_is_exact() {
        // s_i = 4^{-i-1}: tail from 1 is 1/4 * (1/4) / (3/4) = 1/12.
        let s = RationalSeq::Geometric {
            first: rat(1, 4),
            ratio: rat(1, 4),
        };
        assert_eq!(s.at(0), rat(1, 4));
        assert_eq!(s.at(1), rat(1, 16));
        assert_eq!(s.tail_sum_bound(1), Some(rat(1, 12)));
        assert!(s.tail_sum_bound(1).unwrap() < rat(1, 2));
        assert!(!s.diverges());
    }

    #[test]
    fn constant_diverges() {
        let s = RationalSeq::constant(rat(49, 100));
        assert!(s.diverges());
        assert_eq!(s.partial_sum(3), rat(147, 100));
        assert_eq!(s.tail_sum_bound(5), None);
    }
}
