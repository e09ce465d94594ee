//! Strategy transformations: player swaps, countable intersection of
//! player II strategies, and the adapter that lets a rational-game strategy
//! face opponents playing arbitrary-precision masses.

use super::certificates::{
    extract_scaled_measure, extract_tree, verify_tree_witness, ExtractError, MassWitness,
    TreeWitness,
};
use super::players::{ClosedSetSplitter, CoverAvoider, PlayerError};
use crate::game::{Position, SideMove, SideStrategy, SplitMove, SplitStrategy, Variant};
use crate::measure::DyadicMeasure;
use crate::rational::Rational;
use crate::sets::{ClopenSet, ClosedTreeKind, ExplicitTree};
use crate::stern::{simplest_in_open, try_simplest_in_open};

#[derive(Debug, thiserror::Error)]
pub enum TransformError {
    #[error("source certificate audit failed: {0:?}")]
    AuditFailed(Vec<String>),
    #[error("extraction failed: {0}")]
    Extraction(#[from] ExtractError),
    #[error("construction failed: {0}")]
    Player(#[from] PlayerError),
    #[error("slack budget exhausted: per-strategy stakes sum to {total}, budget is {budget}")]
    BudgetExceeded { total: Rational, budget: Rational },
    #[error("source stake {stake} must be at least the shrink {shrink}")]
    NegativeSourceStake { stake: Rational, shrink: Rational },
}

/// Player I winning at stake `s` turned into player II winning the
/// complementary game at stake `1 - s`.
pub struct SwappedToTwo {
    pub strategy: CoverAvoider,
    pub target_stake: Rational,
    pub source_witness: MassWitness,
}

/// Audits the source via its induced scaled measure, then avoids the open
/// complement of the support tree: that cover's mass is at most
/// `1 - root mass < 1 - s`.
pub fn swap_one_to_two(
    sigma: &dyn SplitStrategy,
    mu: &DyadicMeasure,
    stake: &Rational,
    depth: usize,
) -> Result<SwappedToTwo, TransformError> {
    let witness = extract_scaled_measure(sigma, mu, stake, depth, Variant::Plain)?;
    if witness.scaled.root_mass() <= *stake {
        return Err(TransformError::AuditFailed(vec![format!(
            "induced root mass {} does not exceed the stake {stake}",
            witness.scaled.root_mass()
        )]));
    }
    let support: ExplicitTree = witness
        .scaled
        .support_at_depth(mu, depth)
        .into_iter()
        .collect();
    let cover = ClopenSet::Cylinders {
        nodes: support.complement_antichain(depth),
    };
    let target_stake = Rational::one() - stake.clone();
    let strategy = CoverAvoider::new(mu, cover, target_stake.clone())?;
    Ok(SwappedToTwo {
        strategy,
        target_stake,
        source_witness: witness,
    })
}

/// Player II winning at stake `s - shrink` turned into player I winning the
/// complementary game at stake `1 - s`.
pub struct SwappedToOne {
    pub strategy: ClosedSetSplitter,
    pub target_stake: Rational,
    pub source_witness: TreeWitness,
}

/// Audits the source via its extracted tree, then plays the closed set
/// spanned by the tree's frontier: its mass exceeds `1 - s` by at least
/// `shrink / 2^depth`.
pub fn swap_two_to_one(
    tau: &dyn SideStrategy,
    mu: &DyadicMeasure,
    stake: &Rational,
    shrink: &Rational,
    depth: usize,
    resolution: u32,
) -> Result<SwappedToOne, TransformError> {
    let source_stake = stake.clone() - shrink.clone();
    if source_stake.is_negative() {
        return Err(TransformError::NegativeSourceStake {
            stake: stake.clone(),
            shrink: shrink.clone(),
        });
    }
    let witness = extract_tree(tau, mu, &source_stake, shrink, depth, resolution)?;
    let audit = verify_tree_witness(&witness, mu, Some(tau));
    if !audit.ok() {
        return Err(TransformError::AuditFailed(audit.failures));
    }
    let frontier = witness.tree.frontier_clopen(depth);
    let target_stake = Rational::one() - stake.clone();
    let mass = frontier.measure(mu);
    if mass <= target_stake {
        return Err(TransformError::AuditFailed(vec![format!(
            "frontier mass {mass} does not exceed the target stake {target_stake}"
        )]));
    }
    let slack = (mass.clone() - target_stake.clone()) / (Rational::from_int(2) * mass);
    let strategy = ClosedSetSplitter::new(
        mu,
        ClosedTreeKind::FromClopen { set: frontier },
        target_stake.clone(),
        slack,
    )?;
    Ok(SwappedToOne {
        strategy,
        target_stake,
        source_witness: witness,
    })
}

/// The combined avoider for a countable intersection of payoffs, built by
/// the direct tree argument: extract a tree from each source strategy with
/// geometrically shrinking slacks, then avoid the union of the extracted
/// trees' complements.
pub struct Intersected {
    pub strategy: CoverAvoider,
    pub cover_mass: Rational,
    pub witnesses: Vec<TreeWitness>,
}

pub fn intersect_strategies(
    sources: &[(Rational, &dyn SideStrategy)],
    mu: &DyadicMeasure,
    budget: &Rational,
    depth: usize,
    resolution: u32,
) -> Result<Intersected, TransformError> {
    let total: Rational = sources.iter().map(|(s, _)| s.clone()).sum();
    if total >= *budget {
        return Err(TransformError::BudgetExceeded {
            total,
            budget: budget.clone(),
        });
    }
    let room = budget.clone() - total;
    let mut nodes = Vec::new();
    let mut witnesses = Vec::new();
    for (n, (stake_n, tau_n)) in sources.iter().enumerate() {
        let slack_n = room.clone() / Rational::from_int(2).pow(n as u32 + 1);
        let w = extract_tree(*tau_n, mu, stake_n, &slack_n, depth, resolution)?;
        let audit = verify_tree_witness(&w, mu, Some(*tau_n));
        if !audit.ok() {
            return Err(TransformError::AuditFailed(audit.failures));
        }
        nodes.extend(w.tree.complement_antichain(depth));
        witnesses.push(w);
    }
    let cover = ClopenSet::from_nodes(nodes);
    let cover_mass = cover.measure(mu);
    let strategy = CoverAvoider::new(mu, cover, budget.clone())?;
    Ok(Intersected {
        strategy,
        cover_mass,
        witnesses,
    })
}

/// Player II adapter for opponents whose splits carry arbitrary-precision
/// masses: each incoming split is replaced, side by side, by the
/// smallest-denominator rationals in `((1 - shrink) * m, m)` that keep the
/// delegated history additive, and the inner strategy answers the delegated
/// position. Every run of the adapter has a paired legal run of the inner
/// strategy.
pub struct RealMoveAdapter {
    inner: Box<dyn SideStrategy>,
    shrink: Rational,
    stake: Rational,
}

impl RealMoveAdapter {
    pub fn new(inner: Box<dyn SideStrategy>, shrink: Rational, stake: Rational) -> Self {
        assert!(shrink.is_positive() && shrink < Rational::one());
        RealMoveAdapter {
            inner,
            shrink,
            stake,
        }
    }

    fn map_split(&self, incoming: &SplitMove, budget: Option<&Rational>) -> Option<SplitMove> {
        let discount = Rational::one() - self.shrink.clone();
        let a = incoming.masses[0].clone();
        let b = incoming.masses[1].clone();
        match budget {
            None => {
                // Opening: squeeze each side independently; unservable when
                // the discounted sum cannot clear the stake.
                if discount.clone() * incoming.total() <= self.stake {
                    return None;
                }
                let pick = |m: &Rational| {
                    if m.is_zero() {
                        Rational::zero()
                    } else {
                        simplest_in_open(&(discount.clone() * m.clone()), m)
                    }
                };
                Some(SplitMove::pair(pick(&a), pick(&b)))
            }
            Some(q) => {
                if a.is_zero() && b.is_zero() {
                    return Some(SplitMove::pair(Rational::zero(), Rational::zero()));
                }
                if a.is_zero() {
                    return Some(SplitMove::pair(Rational::zero(), q.clone()));
                }
                if b.is_zero() {
                    return Some(SplitMove::pair(q.clone(), Rational::zero()));
                }
                let lo = (discount.clone() * a.clone()).max(q.clone() - b.clone());
                let hi = a.min(q.clone() - discount * b);
                let m0 = try_simplest_in_open(&lo, &hi)?;
                Some(SplitMove::pair(m0.clone(), q.clone() - m0))
            }
        }
    }

    /// The delegated rational-game position paired with an incoming one.
    pub fn delegated(&self, pos: &Position) -> Option<Position> {
        let mut out = Position::empty(pos.variant(), pos.stake().clone());
        for round in pos.rounds() {
            let budget = out.node_mass();
            let split = self.map_split(&round.split, budget.as_ref())?;
            out.push_round(split, round.side.clone());
        }
        if let Some(pending) = pos.pending() {
            let budget = out.node_mass();
            let split = self.map_split(pending, budget.as_ref())?;
            out = out.with_pending(split);
        }
        Some(out)
    }
}

impl SideStrategy for RealMoveAdapter {
    fn name(&self) -> String {
        format!("real-move-adapter({}, shrink {})", self.inner.name(), self.shrink)
    }

    fn side(&self, mu: &DyadicMeasure, pos: &Position) -> Option<SideMove> {
        let delegated = self.delegated(pos)?;
        self.inner.side(mu, &delegated)
    }

    fn clone_box(&self) -> Box<dyn SideStrategy> {
        Box::new(RealMoveAdapter {
            inner: self.inner.clone_box(),
            shrink: self.shrink.clone(),
            stake: self.stake.clone(),
        })
    }
}

/// Frees the caller from naming the concrete adapter type.
pub fn rationalize_strategy(
    inner: Box<dyn SideStrategy>,
    shrink: Rational,
    stake: Rational,
) -> RealMoveAdapter {
    RealMoveAdapter::new(inner, shrink, stake)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::node;
    use crate::rational::rat;

    #[test]
    fn adapter_squeezes_opening_moves() {
        let mu = DyadicMeasure::fair();
        let inner = CoverAvoider::new(&mu, ClopenSet::cylinder(node("00")), rat(1, 4)).unwrap();
        let adapter = RealMoveAdapter::new(Box::new(inner), rat(1, 10), rat(1, 4));
        let incoming = SplitMove::pair(rat(1, 3), rat(1, 3));
        let mapped = adapter.map_split(&incoming, None).unwrap();
        for i in 0..2 {
            assert!(mapped.masses[i] > rat(9, 10) * rat(1, 3));
            assert!(mapped.masses[i] < rat(1, 3));
        }
    }

    #[test]
    fn adapter_preserves_zeros() {
        let mu = DyadicMeasure::fair();
        let inner = CoverAvoider::new(&mu, ClopenSet::empty(), rat(0, 1)).unwrap();
        let adapter = RealMoveAdapter::new(Box::new(inner), rat(1, 10), rat(0, 1));
        let incoming = SplitMove::pair(rat(2, 5), rat(0, 1));
        let mapped = adapter.map_split(&incoming, None).unwrap();
        assert_eq!(mapped.masses[1], Rational::zero());
        assert!(mapped.masses[0].is_positive());
    }

    #[test]
    fn adapter_rejects_unservable_openings() {
        let mu = DyadicMeasure::fair();
        let inner = CoverAvoider::new(&mu, ClopenSet::empty(), rat(1, 2)).unwrap();
        let adapter = RealMoveAdapter::new(Box::new(inner), rat(1, 10), rat(1, 2));
        // (1-shrink) * sum = 9/10 * 5/9 = 1/2, not above the stake.
        let incoming = SplitMove::pair(rat(5, 18), rat(5, 18));
        assert!(adapter.map_split(&incoming, None).is_none());
        let pos =
            Position::empty(Variant::Plain, rat(1, 2)).with_pending(incoming);
        assert!(adapter.side(&mu, &pos).is_none());
    }
}
