//! The two constructive players behind the game-measure equivalence: the
//! closed-set mass player for player I and the open-cover avoider for
//! player II.

use crate::game::{
    validate_split, DeltaWitness, ExactDelta, Position, SideMove, SideStrategy, SplitMove,
    SplitStrategy,
};
use crate::measure::DyadicMeasure;
use crate::node::Node;
use crate::rational::Rational;
use crate::scaled::ScaledMeasure;
use crate::sets::{ClopenSet, ClosedTreeKind};
use crate::stern::{simplest_in_open, try_simplest_in_open};
use std::cell::RefCell;
use std::collections::HashMap;

/// Construction failure for the constructive players.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PlayerError {
    #[error("closed set needs exactly computable masses at finite depth")]
    InexactClosedSet,
    #[error("slack {slack} must lie strictly between 0 and 1")]
    BadSlack { slack: Rational },
    #[error("discounted set mass {discounted} does not exceed the stake {stake}")]
    NotEnoughMass {
        discounted: Rational,
        stake: Rational,
    },
    #[error("open cover has mass {mass}, above the stake {stake}")]
    CoverTooHeavy { mass: Rational, stake: Rational },
}

/// Player I: plays a scaled measure squeezed between the discounted and full
/// conditional masses of a closed set, so every node player II can reach
/// keeps a positive share of the set.
///
/// At each node the children receive the smallest-denominator rationals with
/// `(1-slack) * mass(F /\ N_child) < M(child) < mass(F /\ N_child)` summing
/// to the committed parent mass; a child whose conditional set mass vanishes
/// receives exactly 0. The committed masses depend only on the node, so the
/// strategy is a pure decision rule and the cache is a speedup, not state.
pub struct ClosedSetSplitter {
    mu: DyadicMeasure,
    forced: ClosedTreeKind,
    stake: Rational,
    slack: Rational,
    masses: RefCell<HashMap<Node, Rational>>,
}

impl ClosedSetSplitter {
    pub fn new(
        mu: &DyadicMeasure,
        forced: ClosedTreeKind,
        stake: Rational,
        slack: Rational,
    ) -> Result<Self, PlayerError> {
        if !slack.is_positive() || slack >= Rational::one() {
            return Err(PlayerError::BadSlack { slack });
        }
        let total = forced
            .exact_mass_in(mu, &Node::root())
            .ok_or(PlayerError::InexactClosedSet)?;
        let discounted = (Rational::one() - slack.clone()) * total;
        if discounted <= stake {
            return Err(PlayerError::NotEnoughMass { discounted, stake });
        }
        Ok(ClosedSetSplitter {
            mu: mu.clone(),
            forced,
            stake,
            slack,
            masses: RefCell::new(HashMap::new()),
        })
    }

    pub fn forced_set(&self) -> &ClosedTreeKind {
        &self.forced
    }

    fn set_mass(&self, t: &Node) -> Rational {
        self.forced
            .exact_mass_in(&self.mu, t)
            .expect("checked exact at construction")
    }

    /// The committed mass at a node of depth >= 1.
    fn mass(&self, t: &Node) -> Rational {
        if let Some(m) = self.masses.borrow().get(t) {
            return m.clone();
        }
        let parent = t.parent().expect("mass() is defined below the root");
        let discount = Rational::one() - self.slack.clone();
        let value = if parent.is_root() {
            // Opening move: each side squeezed independently; the sums then
            // exceed the stake because the whole set's discounted mass does.
            let a = self.set_mass(t);
            if a.is_zero() {
                Rational::zero()
            } else {
                simplest_in_open(&(discount * a.clone()), &a)
            }
        } else if t.last_bit() == Some(1) {
            // Side 1 is the remainder of the parent's committed mass.
            self.mass(&parent) - self.mass(&parent.child(0))
        } else {
            let m_parent = self.mass(&parent);
            let a0 = self.set_mass(t);
            let a1 = self.set_mass(&parent.child(1));
            if m_parent.is_zero() || a0.is_zero() {
                Rational::zero()
            } else if a1.is_zero() {
                m_parent
            } else {
                let lo = (discount.clone() * a0.clone()).max(m_parent.clone() - a1.clone());
                let hi = a0.min(m_parent - discount * a1);
                simplest_in_open(&lo, &hi)
            }
        };
        self.masses.borrow_mut().insert(t.clone(), value.clone());
        value
    }
}

impl SplitStrategy for ClosedSetSplitter {
    fn name(&self) -> String {
        format!(
            "closed-set-player(stake {}, slack {})",
            self.stake, self.slack
        )
    }

    fn split(&self, _mu: &DyadicMeasure, pos: &Position) -> Option<SplitMove> {
        let u = pos.node();
        Some(SplitMove::pair(
            self.mass(&u.child(0)),
            self.mass(&u.child(1)),
        ))
    }

    fn clone_box(&self) -> Box<dyn SplitStrategy> {
        Box::new(ClosedSetSplitter {
            mu: self.mu.clone(),
            forced: self.forced.clone(),
            stake: self.stake.clone(),
            slack: self.slack.clone(),
            masses: RefCell::new(self.masses.borrow().clone()),
        })
    }
}

/// Player I: replays a fixed scaled measure.
#[derive(Clone)]
pub struct ScaledMeasurePlayer {
    pub scaled: ScaledMeasure,
}

impl SplitStrategy for ScaledMeasurePlayer {
    fn name(&self) -> String {
        "scaled-measure-player".into()
    }

    fn split(&self, mu: &DyadicMeasure, pos: &Position) -> Option<SplitMove> {
        let (m0, m1) = self.scaled.split_at(mu, &pos.node());
        Some(SplitMove::pair(m0, m1))
    }

    fn clone_box(&self) -> Box<dyn SplitStrategy> {
        Box::new(self.clone())
    }
}

/// Player II: keeps the open cover's conditional mass strictly below the
/// assigned mass, picking the smallest such side each round. Any branch of a
/// consistent run then avoids the cover entirely.
///
/// Works in the plain and the paired game alike (the cover lives on the
/// respective tree); reports its per-side infima in closed form.
#[derive(Clone)]
pub struct CoverAvoider {
    cover: ClopenSet,
    stake: Rational,
}

impl CoverAvoider {
    pub fn new(mu: &DyadicMeasure, cover: ClopenSet, stake: Rational) -> Result<Self, PlayerError> {
        let mass = cover.measure(mu);
        if mass > stake {
            return Err(PlayerError::CoverTooHeavy { mass, stake });
        }
        Ok(CoverAvoider { cover, stake })
    }

    /// Trusts the caller that the cover is light enough (for adapters that
    /// pick the cover per opening move).
    pub fn unchecked(cover: ClopenSet, stake: Rational) -> Self {
        CoverAvoider { cover, stake }
    }

    pub fn cover(&self) -> &ClopenSet {
        &self.cover
    }

    fn side_data(
        &self,
        mu: &DyadicMeasure,
        pos: &Position,
    ) -> (Vec<Rational>, Vec<Rational>, bool) {
        let node = pos.node();
        let variant = pos.variant();
        let arity = variant.arity();
        let covers: Vec<Rational> = (0..arity)
            .map(|i| self.cover.mass_in(mu, &variant.child(&node, i as u8)))
            .collect();
        let caps: Vec<Rational> = (0..arity)
            .map(|i| mu.cylinder_mass(&variant.child(&node, i as u8)))
            .collect();
        let fixed_sum = pos.depth() > 0;
        (covers, caps, fixed_sum)
    }
}

impl SideStrategy for CoverAvoider {
    fn name(&self) -> String {
        format!("cover-avoider(stake {})", self.stake)
    }

    fn side(&self, mu: &DyadicMeasure, pos: &Position) -> Option<SideMove> {
        let split = pos.pending()?;
        let node = pos.node();
        let variant = pos.variant();
        for (i, m) in split.masses.iter().enumerate() {
            if self.cover.mass_in(mu, &variant.child(&node, i as u8)) < *m {
                return Some(SideMove::pick(i as u8));
            }
        }
        None
    }

    fn exact_delta(
        &self,
        mu: &DyadicMeasure,
        pos: &Position,
        budget: &Rational,
    ) -> Option<ExactDelta> {
        let (covers, caps, at_context) = self.side_data(mu, pos);
        // A budget differing from the stake at the root means the caller
        // constrains probes to that exact sum.
        let fixed_sum = at_context || *budget != *pos.stake();
        let arity = caps.len();
        let zero = Rational::zero();

        let mut deltas = Vec::with_capacity(arity);
        for q in 0..arity {
            // The cheapest mass at side q answered with q: it must exceed
            // the side's cover mass, and every smaller-index side must stay
            // refusable (at most its cover mass), so the probe can park at
            // most `parkable` outside side q.
            let mut parkable = Rational::zero();
            for o in 0..arity {
                if o != q {
                    let bound = if o < q {
                        covers[o].clone().min(caps[o].clone())
                    } else {
                        caps[o].clone()
                    };
                    parkable += bound;
                }
            }
            let floor = budget.clone() - parkable;
            let candidate = covers[q].clone().max(floor).max(zero.clone());
            let alive = if fixed_sum {
                candidate < caps[q]
                    && (candidate < *budget || (candidate == *budget && covers[q] < *budget))
            } else {
                candidate < caps[q]
            };
            deltas.push(if alive { candidate } else { caps[q].clone() });
        }
        Some(ExactDelta { deltas })
    }

    fn delta_witness(
        &self,
        mu: &DyadicMeasure,
        pos: &Position,
        budget: &Rational,
        side: u8,
        upper: &Rational,
    ) -> Option<DeltaWitness> {
        let (covers, caps, at_context) = self.side_data(mu, pos);
        let fixed_sum = at_context || *budget != *pos.stake();
        let arity = caps.len();
        let q = side as usize;
        let delta = self.exact_delta(mu, pos, budget)?.deltas[q].clone();
        if delta >= caps[q] {
            return None;
        }

        // Candidate values for side q, cheapest viable first.
        let mut ceiling = upper.clone().min(caps[q].clone());
        if fixed_sum {
            ceiling = ceiling.min(budget.clone());
        }
        let mut candidates: Vec<Rational> = Vec::new();
        if let Some(v) = try_simplest_in_open(&delta, &ceiling) {
            candidates.push(v);
        }
        // Closed endpoints that the open selection misses: the exact budget
        // (complement parks nothing) and the stated upper bound.
        if fixed_sum && delta < *budget && *budget <= *upper && *budget < caps[q] {
            candidates.push(budget.clone());
        }
        if delta < *upper && *upper < caps[q] && (!fixed_sum || *upper <= *budget) {
            candidates.push(upper.clone());
        }
        // The infimum itself, for the saturated case where refusing the
        // other sides pins their masses and only the exact value elicits.
        if delta.is_positive() {
            candidates.push(delta.clone());
        }

        'candidates: for value in candidates {
            let mut masses = vec![Rational::zero(); arity];
            masses[q] = value.clone();
            // The mass to park outside side q.
            let rest = if fixed_sum {
                budget.clone() - value.clone()
            } else if value > *pos.stake() {
                Rational::zero()
            } else {
                // A root probe must clear the stake; overshoot by a sliver.
                let overshoot = (self.stake.clone() - value.clone())
                    + (ceiling.clone() - delta.clone()) / Rational::from_int(8);
                overshoot
            };
            if rest.is_positive() {
                // Closed bounds first (covers below caps on refused sides),
                // then spread the remainder over open cap bounds
                // proportionally so nothing touches a strict cap.
                let mut remaining = rest;
                let mut open_caps: Vec<usize> = Vec::new();
                for o in 0..arity {
                    if o == q {
                        continue;
                    }
                    if o < q && covers[o] < caps[o] {
                        let take = remaining.clone().min(covers[o].clone());
                        masses[o] = take.clone();
                        remaining = remaining - take;
                    } else {
                        open_caps.push(o);
                    }
                }
                if remaining.is_positive() {
                    let cap_sum: Rational =
                        open_caps.iter().map(|&o| caps[o].clone()).sum();
                    if remaining >= cap_sum {
                        continue 'candidates;
                    }
                    for &o in &open_caps {
                        masses[o] = remaining.clone() * caps[o].clone() / cap_sum.clone();
                    }
                }
            }
            let split = SplitMove { masses };
            if validate_split(mu, pos, &split).is_err() {
                continue;
            }
            match self.side(mu, &pos.with_pending(split.clone())) {
                Some(mv) if mv.index == side => return Some(DeltaWitness { value, split }),
                _ => continue,
            }
        }
        None
    }

    fn clone_box(&self) -> Box<dyn SideStrategy> {
        Box::new(self.clone())
    }
}
