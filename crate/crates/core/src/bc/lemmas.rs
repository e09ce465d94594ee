//! Two small exact lemmas used by the second-moment machinery: the weighted
//! minimum bound for ratio splitting, and the dyadic tolerance solving a
//! square-root inequality without leaving the rationals.

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum NumSplitError {
    #[error("empty input")]
    Empty,
    #[error("denominator b[{0}] must be positive")]
    NonPositiveDenominator(usize),
    #[error("negative entry at index {0}")]
    Negative(usize),
    #[error("weights sum to {0}, expected 1")]
    WeightsNotNormalized(Rational),
}

/// Returns an index minimizing `(a_i * c_i) / b_i^2`. The minimum value
/// never exceeds `sum(a) / sum(b)^2` when the `c_i` are non-negative weights
/// summing to one - the splitting inequality behind the side-choosing rule.
pub fn min_index_bound(
    a: &[Rational],
    b: &[Rational],
    c: &[Rational],
) -> Result<(usize, Rational), NumSplitError> {
    if a.is_empty() || a.len() != b.len() || a.len() != c.len() {
        return Err(NumSplitError::Empty);
    }
    let mut weight_sum = Rational::zero();
    for i in 0..a.len() {
        if !b[i].is_positive() {
            return Err(NumSplitError::NonPositiveDenominator(i));
        }
        if a[i].is_negative() || c[i].is_negative() {
            return Err(NumSplitError::Negative(i));
        }
        weight_sum += c[i].clone();
    }
    if weight_sum != Rational::one() {
        return Err(NumSplitError::WeightsNotNormalized(weight_sum));
    }
    let mut best = 0;
    let mut best_value = a[0].clone() * c[0].clone() / (b[0].clone() * b[0].clone());
    for i in 1..a.len() {
        let v = a[i].clone() * c[i].clone() / (b[i].clone() * b[i].clone());
        if v < best_value {
            best = i;
            best_value = v;
        }
    }
    Ok((best, best_value))
}

/// The largest dyadic tolerance `delta = 2^-k` (k >= 1) with
/// `eta > delta + sqrt(delta * spread)`, verified without square roots by
/// the equivalent `eta > delta` and `(eta - delta)^2 > delta * spread`.
pub fn delta_for_eta(spread: &Rational, eta: &Rational) -> Rational {
    assert!(eta.is_positive(), "eta must be positive");
    assert!(!spread.is_negative(), "spread must be non-negative");
    let mut k = 1u32;
    loop {
        let delta = Rational::half_pow(k);
        let gap = eta.clone() - delta.clone();
        if gap.is_positive() && gap.clone() * gap > delta.clone() * spread.clone() {
            return delta;
        }
        k += 1;
        assert!(k < 4096, "some power of 1/2 must satisfy the inequality");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn symmetric_equality_case() {
        let a = [rat(1, 1), rat(1, 1)];
        let b = [rat(1, 1), rat(1, 1)];
        let c = [rat(1, 2), rat(1, 2)];
        let (_, value) = min_index_bound(&a, &b, &c).unwrap();
        assert_eq!(value, rat(1, 2));
        // Equality: sum(a)/sum(b)^2 = 2/4.
        assert_eq!(value, rat(2, 4));
    }

    #[test]
    fn strict_case() {
        let a = [rat(1, 1), rat(4, 1)];
        let b = [rat(1, 1), rat(2, 1)];
        let c = [rat(1, 2), rat(1, 2)];
        let (_, value) = min_index_bound(&a, &b, &c).unwrap();
        assert_eq!(value, rat(1, 2));
        assert!(value <= rat(5, 9));
    }

    #[test]
    fn random_sweep_inequality_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(20260809);
        for _ in 0..2000 {
            let n = rng.gen_range(1..6);
            let mut a = Vec::new();
            let mut b = Vec::new();
            let mut raw_c = Vec::new();
            for _ in 0..n {
                a.push(rat(rng.gen_range(0..50), rng.gen_range(1..20)));
                b.push(rat(rng.gen_range(1..50), rng.gen_range(1..20)));
                raw_c.push(rat(rng.gen_range(1..20), rng.gen_range(1..20)));
            }
            let total: Rational = raw_c.iter().cloned().sum();
            let c: Vec<Rational> = raw_c.into_iter().map(|x| x / total.clone()).collect();
            let (_, value) = min_index_bound(&a, &b, &c).unwrap();
            let sum_a: Rational = a.iter().cloned().sum();
            let sum_b: Rational = b.iter().cloned().sum();
            assert!(value <= sum_a / (sum_b.clone() * sum_b), "inequality failed");
        }
    }

    #[test]
    fn dyadic_tolerance_examples() {
        // spread 1, eta 1/2: delta = 1/8 since (1/2 - 1/8)^2 = 9/64 > 8/64,
        // while 1/4 fails ((1/4)^2 = 4/64 < 16/64).
        assert_eq!(delta_for_eta(&rat(1, 1), &rat(1, 2)), rat(1, 8));
        // Vanishing spread: the largest power of two strictly below eta.
        assert_eq!(delta_for_eta(&rat(0, 1), &rat(1, 2)), rat(1, 4));
        assert_eq!(delta_for_eta(&rat(0, 1), &rat(3, 4)), rat(1, 2));
    }

    #[test]
    fn dyadic_tolerance_always_satisfies_squared_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let spread = rat(rng.gen_range(0..30), rng.gen_range(1..10));
            let eta = rat(rng.gen_range(1..30), rng.gen_range(1..30));
            let delta = delta_for_eta(&spread, &eta);
            let gap = eta.clone() - delta.clone();
            assert!(gap.is_positive());
            assert!(gap.clone() * gap > delta.clone() * spread.clone());
            // Maximality among the allowed powers (k >= 1): the next larger
            // power of two fails, unless delta is already the largest one.
            if delta < rat(1, 2) {
                let bigger = delta.clone() * rat(2, 1);
                let gap2 = eta.clone() - bigger.clone();
                assert!(
                    !gap2.is_positive() || gap2.clone() * gap2 <= bigger * spread,
                    "delta was not maximal"
                );
            }
        }
    }
}
