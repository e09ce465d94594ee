//! Grid-restricted backward induction: an oracle for the decision procedure
//! that never looks at measures of payoff complements, only at who can force
//! what on a finite grid of splits.

use crate::measure::DyadicMeasure;
use crate::node::Node;
use crate::rational::Rational;
use crate::sets::{ClopenSet, Region, SetExpr};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Outcome of the grid game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    /// True when player I wins on the grid at the queried stake.
    pub one_wins: bool,
    /// The best opening mass player I can commit on the grid: player I wins
    /// exactly the stakes strictly below this value.
    pub value: Rational,
    /// Set when the queried stake sits within 2/Q of the complement's mass,
    /// where grid resolution cannot separate the players.
    pub band_limited: bool,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MinimaxError {
    #[error("payoff is not clopen")]
    UnsupportedPayoff,
    #[error("payoff decision depth {payoff} exceeds the induction depth {depth}")]
    TooShallow { payoff: usize, depth: usize },
    #[error("grid denominator must be at least 2")]
    BadResolution,
}

/// Runs backward induction with memoization over (node, mass) states where
/// player I's splits are multiples of 1/Q of the current mass. At the
/// frontier player II wins exactly when the node extends into the payoff.
pub fn grid_minimax(
    mu: &DyadicMeasure,
    payoff: &SetExpr,
    stake: &Rational,
    grid: u32,
    depth: usize,
) -> Result<GridOutcome, MinimaxError> {
    if grid < 2 {
        return Err(MinimaxError::BadResolution);
    }
    let clopen = payoff.as_clopen().ok_or(MinimaxError::UnsupportedPayoff)?;
    let payoff_depth = clopen.decision_depth();
    if payoff_depth > depth {
        return Err(MinimaxError::TooShallow {
            payoff: payoff_depth,
            depth,
        });
    }

    let mut memo: HashMap<(Node, Rational), bool> = HashMap::new();
    let q = Rational::from_int(grid as i64);

    // Does player I win from `t` when player II sits there with mass `m`?
    fn one_wins_from(
        mu: &DyadicMeasure,
        clopen: &ClopenSet,
        memo: &mut HashMap<(Node, Rational), bool>,
        grid: u32,
        q: &Rational,
        depth: usize,
        t: &Node,
        m: &Rational,
    ) -> bool {
        // The payoff is decided on this whole cylinder: no further play
        // matters.
        match clopen.region(t) {
            Region::Inside => return false,
            Region::Outside => return true,
            Region::Mixed => {}
        }
        if t.len() >= depth {
            // Unreachable given the depth check, but be conservative:
            // an undecided frontier counts against player I.
            return false;
        }
        let key = (t.clone(), m.clone());
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let caps = [
            mu.cylinder_mass(&t.child(0)),
            mu.cylinder_mass(&t.child(1)),
        ];
        let step = m.clone() / q.clone();
        let mut wins = false;
        'splits: for j in 0..=grid {
            let m0 = step.clone() * Rational::from_int(j as i64);
            let m1 = m.clone() - m0.clone();
            let legal = |mass: &Rational, cap: &Rational| {
                !mass.is_negative() && (mass < cap || (mass == cap && cap.is_zero()))
            };
            if !legal(&m0, &caps[0]) || !legal(&m1, &caps[1]) {
                continue;
            }
            for (i, mi) in [(0u8, &m0), (1u8, &m1)] {
                if mi.is_zero() {
                    continue;
                }
                if !one_wins_from(mu, clopen, memo, grid, q, depth, &t.child(i), mi) {
                    continue 'splits;
                }
            }
            wins = true;
            break;
        }
        memo.insert(key, wins);
        wins
    }

    // The best winning opening sum: openings are pairs of multiples of 1/Q.
    let root = Node::root();
    let caps = [
        mu.cylinder_mass(&root.child(0)),
        mu.cylinder_mass(&root.child(1)),
    ];
    let unit_step = Rational::one() / q.clone();
    let mut value = Rational::zero();
    for a in 0..=grid {
        let m0 = unit_step.clone() * Rational::from_int(a as i64);
        if m0 > caps[0] || (m0 == caps[0] && !caps[0].is_zero()) {
            break;
        }
        for b in 0..=grid {
            let m1 = unit_step.clone() * Rational::from_int(b as i64);
            if m1 > caps[1] || (m1 == caps[1] && !caps[1].is_zero()) {
                break;
            }
            let sum = m0.clone() + m1.clone();
            if sum <= value {
                continue;
            }
            let mut ok = true;
            for (i, mi) in [(0u8, &m0), (1u8, &m1)] {
                if mi.is_zero() {
                    continue;
                }
                if !one_wins_from(
                    mu,
                    &clopen,
                    &mut memo,
                    grid,
                    &q,
                    depth,
                    &root.child(i),
                    mi,
                ) {
                    ok = false;
                    break;
                }
            }
            if ok {
                value = sum;
            }
        }
    }

    let complement_mass = clopen.complement().measure(mu);
    let band = (complement_mass - stake.clone()).abs()
        <= Rational::from_int(2) / Rational::from_int(grid as i64);
    Ok(GridOutcome {
        one_wins: value > *stake,
        value,
        band_limited: band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::node;
    use crate::rational::rat;

    #[test]
    fn matches_measure_decision_on_half_cylinder() {
        let mu = DyadicMeasure::fair();
        let payoff = SetExpr::clopen(ClopenSet::cylinder(node("1")));
        let out = grid_minimax(&mu, &payoff, &rat(1, 4), 8, 2).unwrap();
        assert!(out.one_wins);
        // The complement has mass 1/2: the best grid opening approaches it
        // from below.
        assert!(out.value <= rat(1, 2));
        assert!(out.value >= rat(1, 2) - rat(2, 8));
        let boundary = grid_minimax(&mu, &payoff, &rat(1, 2), 8, 2).unwrap();
        assert!(!boundary.one_wins);
    }

    #[test]
    fn empty_payoff_is_a_first_move_win() {
        let mu = DyadicMeasure::fair();
        let payoff = SetExpr::clopen(ClopenSet::empty());
        let out = grid_minimax(&mu, &payoff, &rat(11, 16), 8, 2).unwrap();
        assert!(out.one_wins);
        // Player II can never enter the payoff; the best grid opening is the
        // largest legal sum, 3/8 per side under the strict half caps.
        assert_eq!(out.value, rat(3, 4));
    }

    #[test]
    fn full_payoff_unwinnable() {
        let mu = DyadicMeasure::fair();
        let payoff = SetExpr::clopen(ClopenSet::full());
        let out = grid_minimax(&mu, &payoff, &rat(0, 1), 8, 2).unwrap();
        assert!(!out.one_wins);
        assert_eq!(out.value, Rational::zero());
    }
}
