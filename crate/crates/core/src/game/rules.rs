//! Move legality: the rule lists of the game, checked exactly.

use super::{Position, SideMove, SplitMove, Variant};
use crate::measure::DyadicMeasure;
use crate::rational::Rational;
use serde::{Deserialize, Serialize};

/// A specific rule a move violates. Each variant names the rule from the
/// game definition that failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum RuleViolation {
    #[error("split provides {got} masses, the variant needs {expected}")]
    WrongArity { got: usize, expected: usize },
    #[error("mass {mass} at side {index} is negative")]
    NegativeMass { index: u8, mass: Rational },
    #[error("opening masses sum to {sum}, the stake {stake} requires strictly more")]
    OpeningNotAboveStake { sum: Rational, stake: Rational },
    #[error("mass {mass} at side {index} exceeds the cylinder mass {cap}")]
    MassAboveCylinder {
        index: u8,
        mass: Rational,
        cap: Rational,
    },
    #[error("mass {mass} at side {index} must stay strictly below the positive cylinder mass {cap}")]
    MassNotStrict {
        index: u8,
        mass: Rational,
        cap: Rational,
    },
    #[error("split sums to {sum}, the current node's mass is {expected}")]
    SplitNotAdditive { sum: Rational, expected: Rational },
    #[error("side index {index} out of range for this variant")]
    SideOutOfRange { index: u8 },
    #[error("chosen side {index} carries zero mass")]
    ZeroMassSide { index: u8 },
    #[error("witness digit {digit} outside the alphabet of size {alphabet}")]
    DigitOutOfAlphabet { digit: u32, alphabet: u32 },
    #[error("witness digit is only legal in the unfolded game")]
    DigitNotAllowed,
    #[error("no split is pending")]
    NothingPending,
}

/// Checks player I's split against the rules at `pos` (player I to move).
///
/// The rule that the implicit root mass stays strictly below 1 is subsumed:
/// the child caps sum to the parent cylinder mass, so per-child strictness
/// already bounds the opening sum away from 1.
pub fn validate_split(
    mu: &DyadicMeasure,
    pos: &Position,
    split: &SplitMove,
) -> Result<(), RuleViolation> {
    let variant = pos.variant();
    let arity = variant.arity();
    if split.masses.len() != arity {
        return Err(RuleViolation::WrongArity {
            got: split.masses.len(),
            expected: arity,
        });
    }
    for (i, m) in split.masses.iter().enumerate() {
        if m.is_negative() {
            return Err(RuleViolation::NegativeMass {
                index: i as u8,
                mass: m.clone(),
            });
        }
    }
    let node = pos.node();
    for (i, m) in split.masses.iter().enumerate() {
        let cap = mu.cylinder_mass(&variant.child(&node, i as u8));
        if *m > cap {
            return Err(RuleViolation::MassAboveCylinder {
                index: i as u8,
                mass: m.clone(),
                cap,
            });
        }
        if cap.is_positive() && *m == cap {
            return Err(RuleViolation::MassNotStrict {
                index: i as u8,
                mass: m.clone(),
                cap,
            });
        }
    }
    let sum = split.total();
    match pos.round_budget() {
        None => {
            if sum <= *pos.stake() {
                return Err(RuleViolation::OpeningNotAboveStake {
                    sum,
                    stake: pos.stake().clone(),
                });
            }
        }
        Some(budget) => {
            if sum != budget {
                return Err(RuleViolation::SplitNotAdditive {
                    sum,
                    expected: budget,
                });
            }
        }
    }
    Ok(())
}

/// Checks player II's reply against the rules (a split must be pending).
pub fn validate_side(
    _mu: &DyadicMeasure,
    pos: &Position,
    side: &SideMove,
) -> Result<(), RuleViolation> {
    let split = pos.pending().ok_or(RuleViolation::NothingPending)?;
    let arity = pos.variant().arity();
    if (side.index as usize) >= arity {
        return Err(RuleViolation::SideOutOfRange { index: side.index });
    }
    if split.masses[side.index as usize].is_zero() {
        return Err(RuleViolation::ZeroMassSide { index: side.index });
    }
    match (pos.variant(), side.digit) {
        (Variant::Unfolded { alphabet }, Some(d)) => {
            if d >= alphabet {
                return Err(RuleViolation::DigitOutOfAlphabet { digit: d, alphabet });
            }
        }
        (_, None) => {}
        (_, Some(_)) => return Err(RuleViolation::DigitNotAllowed),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn fair() -> DyadicMeasure {
        DyadicMeasure::fair()
    }

    #[test]
    fn opening_must_exceed_stake() {
        let pos = Position::empty(Variant::Plain, rat(1, 2));
        let err = validate_split(&fair(), &pos, &SplitMove::pair(rat(1, 4), rat(1, 4)));
        assert!(matches!(
            err,
            Err(RuleViolation::OpeningNotAboveStake { .. })
        ));
    }

    #[test]
    fn strictness_below_positive_cylinder() {
        let pos = Position::empty(Variant::Plain, rat(1, 2));
        let err = validate_split(&fair(), &pos, &SplitMove::pair(rat(1, 2), rat(1, 8)));
        assert!(matches!(err, Err(RuleViolation::MassNotStrict { index: 0, .. })));
    }

    #[test]
    fn zero_side_cannot_be_chosen() {
        let pos = Position::empty(Variant::Plain, rat(0, 1))
            .with_pending(SplitMove::pair(rat(1, 4), rat(0, 1)));
        let err = validate_side(&fair(), &pos, &SideMove::pick(1));
        assert!(matches!(err, Err(RuleViolation::ZeroMassSide { index: 1 })));
        assert!(validate_side(&fair(), &pos, &SideMove::pick(0)).is_ok());
    }

    #[test]
    fn zero_measure_child_forces_zero_mass() {
        let mu = DyadicMeasure::point_mass(crate::measure::Branch::constant(0));
        let pos = Position::empty(Variant::Plain, rat(1, 2));
        // Child 1 has cylinder mass zero: any positive mass there is illegal.
        let err = validate_split(&mu, &pos, &SplitMove::pair(rat(2, 3), rat(1, 8)));
        assert!(matches!(
            err,
            Err(RuleViolation::MassAboveCylinder { index: 1, .. })
        ));
        assert!(validate_split(&mu, &pos, &SplitMove::pair(rat(2, 3), rat(0, 1))).is_ok());
    }

    #[test]
    fn additivity_after_opening() {
        let mut pos = Position::empty(Variant::Plain, rat(0, 1));
        pos.push_round(SplitMove::pair(rat(1, 4), rat(1, 4)), SideMove::pick(0));
        let err = validate_split(&fair(), &pos, &SplitMove::pair(rat(1, 8), rat(3, 16)));
        assert!(matches!(err, Err(RuleViolation::SplitNotAdditive { .. })));
        assert!(
            validate_split(&fair(), &pos, &SplitMove::pair(rat(1, 8), rat(1, 8))).is_ok()
        );
    }

    #[test]
    fn opening_cannot_reach_full_mass() {
        // Each child cap is 1/2, so any opening summing to 1 trips a
        // per-child rule; the implicit root constraint needs no extra check.
        let pos = Position::empty(Variant::Plain, rat(1, 2));
        let err = validate_split(&fair(), &pos, &SplitMove::pair(rat(1, 2), rat(1, 2)));
        assert!(matches!(err, Err(RuleViolation::MassNotStrict { .. })));
    }

    #[test]
    fn unfolded_digit_alphabet() {
        let pos = Position::empty(Variant::Unfolded { alphabet: 2 }, rat(0, 1))
            .with_pending(SplitMove::pair(rat(1, 4), rat(1, 4)));
        assert!(validate_side(&fair(), &pos, &SideMove::with_digit(0, 1)).is_ok());
        let err = validate_side(&fair(), &pos, &SideMove::with_digit(0, 2));
        assert!(matches!(
            err,
            Err(RuleViolation::DigitOutOfAlphabet { digit: 2, .. })
        ));
        let plain = Position::empty(Variant::Plain, rat(0, 1))
            .with_pending(SplitMove::pair(rat(1, 4), rat(1, 4)));
        assert!(matches!(
            validate_side(&fair(), &plain, &SideMove::with_digit(0, 0)),
            Err(RuleViolation::DigitNotAllowed)
        ));
    }
}
