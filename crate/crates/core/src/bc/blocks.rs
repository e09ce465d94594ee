//! Both Borel-Cantelli directions as strategy pipelines.
//!
//! Convergence: a player II strategy for the tail game that, once the
//! opponent's opening fixes a positive budget, picks a tail of the event
//! sequence whose stakes sum below it and delegates to the combined avoider
//! over that tail. Divergence: consecutive index blocks whose miss-products
//! drop below a summable tolerance schedule, per-block avoiders of the
//! all-miss sets, their intersection, and a player swap - yielding a player
//! I strategy whose scaled measure is supported on branches that hit an
//! event complement in every committed block.

use super::seq::RationalSeq;
use super::EventFamily;
use crate::game::{Position, SideMove, SideStrategy, SplitMove};
use crate::measure::DyadicMeasure;
use crate::node::Node;
use crate::rational::Rational;
use crate::sets::{ClopenSet, FamilySpec};
use crate::strategy::{
    intersect_strategies, swap_two_to_one, CoverAvoider, MassWitness, SwappedToOne,
    TransformError, TreeWitness,
};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::HashMap;

/// Consecutive index blocks `[start, end]` with their tolerances: each
/// block's product of per-index misses is strictly below its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSchedule {
    pub blocks: Vec<(usize, usize)>,
    pub tolerances: Vec<Rational>,
    pub products: Vec<Rational>,
    /// False when the index horizon ran out mid-schedule.
    pub complete: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum BlocksError {
    #[error("stake sequence does not provably diverge")]
    NotDivergent,
    #[error("stake s_{index} = {value} lies outside [0, 1)")]
    BadStake { index: usize, value: Rational },
    #[error("no tail keeps its stake sum below the opening budget {budget}")]
    TailUnavailable { budget: Rational },
    #[error("event A_{index} has mass {mass}, not below 1 - s_{index} = {bound}")]
    EventTooHeavy {
        index: usize,
        mass: Rational,
        bound: Rational,
    },
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Builds consecutive blocks with `product of (1 - s_i) over the block
/// strictly below the k-th tolerance`, scanning indices up to `horizon`.
pub fn bc_divergence_blocks(
    stakes: &RationalSeq,
    tolerances: &[Rational],
    horizon: usize,
) -> Result<BlockSchedule, BlocksError> {
    if !stakes.diverges() {
        return Err(BlocksError::NotDivergent);
    }
    let mut blocks = Vec::new();
    let mut used = Vec::new();
    let mut products = Vec::new();
    let mut start = 0usize;
    for eps in tolerances {
        let mut product = Rational::one();
        let mut end = start;
        let mut found = false;
        while end < horizon {
            let s = stakes.at(end);
            if s.is_negative() || s >= Rational::one() {
                return Err(BlocksError::BadStake {
                    index: end,
                    value: s,
                });
            }
            product = product * (Rational::one() - s);
            if product < *eps {
                found = true;
                break;
            }
            end += 1;
        }
        if !found {
            return Ok(BlockSchedule {
                blocks,
                tolerances: used,
                products,
                complete: false,
            });
        }
        blocks.push((start, end));
        used.push(eps.clone());
        products.push(product);
        start = end + 1;
    }
    Ok(BlockSchedule {
        blocks,
        tolerances: used,
        products,
        complete: true,
    })
}

/// Player II in the tail game `G(0, union over m of the intersection of all
/// A_i beyond m)`: the opening budget selects how deep into the tail to go,
/// and the combined avoider over that tail takes over.
///
/// The selected tail and the derived avoider are a deterministic function of
/// the opening move, so the strategy is replayable from any position.
pub struct TailAvoider {
    sources: Vec<(Rational, Box<dyn SideStrategy>)>,
    stakes: RationalSeq,
    depth: usize,
    resolution: u32,
    cache: RefCell<HashMap<SplitMove, Option<CoverAvoider>>>,
}

impl TailAvoider {
    pub fn new(
        sources: Vec<(Rational, Box<dyn SideStrategy>)>,
        stakes: RationalSeq,
        depth: usize,
        resolution: u32,
    ) -> Self {
        TailAvoider {
            sources,
            stakes,
            depth,
            resolution,
            cache: RefCell::new(HashMap::new()),
        }
    }

    /// The least tail start whose stake sum is provably below the budget.
    pub fn tail_start(&self, budget: &Rational) -> Result<usize, BlocksError> {
        for n in 0..=self.sources.len() {
            if let Some(bound) = self.stakes.tail_sum_bound(n) {
                if bound < *budget {
                    return Ok(n);
                }
            }
        }
        Err(BlocksError::TailUnavailable {
            budget: budget.clone(),
        })
    }

    fn avoider_for(&self, mu: &DyadicMeasure, opening: &SplitMove) -> Option<CoverAvoider> {
        if let Some(cached) = self.cache.borrow().get(opening) {
            return cached.clone();
        }
        let budget = opening.total();
        let built = self.tail_start(&budget).ok().and_then(|n| {
            let pairs: Vec<(Rational, &dyn SideStrategy)> = self.sources[n..]
                .iter()
                .map(|(s, t)| (s.clone(), t.as_ref()))
                .collect();
            intersect_strategies(&pairs, mu, &budget, self.depth, self.resolution)
                .ok()
                .map(|i| i.strategy)
        });
        self.cache.borrow_mut().insert(opening.clone(), built.clone());
        built
    }
}

impl SideStrategy for TailAvoider {
    fn name(&self) -> String {
        "tail-avoider".into()
    }

    fn side(&self, mu: &DyadicMeasure, pos: &Position) -> Option<SideMove> {
        let opening = match pos.rounds().first() {
            Some(r) => r.split.clone(),
            None => pos.pending()?.clone(),
        };
        let avoider = self.avoider_for(mu, &opening)?;
        avoider.side(mu, pos)
    }

    fn clone_box(&self) -> Box<dyn SideStrategy> {
        Box::new(TailAvoider {
            sources: self
                .sources
                .iter()
                .map(|(s, t)| (s.clone(), t.clone_box()))
                .collect(),
            stakes: self.stakes.clone(),
            depth: self.depth,
            resolution: self.resolution,
            cache: RefCell::new(self.cache.borrow().clone()),
        })
    }
}

/// Builds the convergence-direction strategy from per-event strategies and
/// their stake sequence with a computable tail bound.
pub fn bc_convergence_strategy(
    sources: Vec<(Rational, Box<dyn SideStrategy>)>,
    stakes: RationalSeq,
    depth: usize,
    resolution: u32,
) -> TailAvoider {
    TailAvoider::new(sources, stakes, depth, resolution)
}

/// The composed divergence-direction output.
pub struct ComposedDivergence {
    /// The player I strategy for the limsup-complement game at stake
    /// `1 - budget`.
    pub swapped: SwappedToOne,
    pub schedule: BlockSchedule,
    /// Per-block all-miss masses (each below its block's stake product).
    pub block_cover_masses: Vec<Rational>,
    /// The intersected avoider's witnesses, one per block.
    pub intermediate_witnesses: Vec<TreeWitness>,
    /// The final player I certificate.
    pub witness: MassWitness,
}

/// Runs the divergence pipeline for a mutually independent clopen family:
/// per-block avoiders of the all-miss sets at the tolerance schedule
/// `budget / 2^(k+2)`, their intersection at budget `3/4 * budget`, and the
/// swap to player I at stake `1 - budget`, with the final scaled-measure
/// certificate extracted at `depth`.
pub fn bc_divergence_strategy(
    family: &EventFamily,
    mu: &DyadicMeasure,
    stakes: &RationalSeq,
    budget: &Rational,
    depth: usize,
    resolution: u32,
) -> Result<ComposedDivergence, BlocksError> {
    assert!(budget.is_positive() && *budget < Rational::one());
    let tolerances: Vec<Rational> = (0..depth)
        .map(|k| budget.clone() / Rational::from_int(2).pow(k as u32 + 2))
        .collect();
    let schedule = bc_divergence_blocks(stakes, &tolerances, depth)?;

    // Per-block avoiders: the all-miss set of a block is the intersection
    // of its events; for a coordinate family that is a subcube with a
    // closed-form mass.
    let mut avoiders: Vec<CoverAvoider> = Vec::new();
    let mut block_cover_masses = Vec::new();
    for (k, &(start, end)) in schedule.blocks.iter().enumerate() {
        // Precondition audit: player I wins each constituent game, i.e. the
        // event masses stay below 1 - s_i.
        for i in start..=end {
            let mass = family.event_mass(mu, i, &Node::root());
            let bound = Rational::one() - stakes.at(i);
            if mass >= bound {
                return Err(BlocksError::EventTooHeavy {
                    index: i,
                    mass,
                    bound,
                });
            }
        }
        let cover = match &family.spec {
            FamilySpec::Coordinate { bit } => ClopenSet::FixedBits {
                bits: (start..=end).map(|i| (i, *bit)).collect(),
            },
            _ => {
                let mut acc = ClopenSet::full();
                for i in start..=end {
                    acc = acc.intersect(&family.event(i).unwrap_or_else(ClopenSet::empty));
                }
                acc
            }
        };
        block_cover_masses.push(cover.measure(mu));
        let avoider = CoverAvoider::new(mu, cover, schedule.tolerances[k].clone())
            .map_err(TransformError::Player)?;
        avoiders.push(avoider);
    }

    let pairs: Vec<(Rational, &dyn SideStrategy)> = schedule
        .tolerances
        .iter()
        .zip(avoiders.iter())
        .map(|(eps, a)| (eps.clone(), a as &dyn SideStrategy))
        .collect();
    let combined_budget = budget.clone() * Rational::new(3, 4);
    let combined = intersect_strategies(&pairs, mu, &combined_budget, depth, resolution)?;

    // Swap to player I: the source wins at the combined budget, which is
    // `budget - shrink` with shrink = budget / 4.
    let swapped = swap_two_to_one(
        &combined.strategy,
        mu,
        budget,
        &(budget.clone() / Rational::from_int(4)),
        depth,
        resolution,
    )?;
    let witness = crate::strategy::extract_scaled_measure(
        &swapped.strategy,
        mu,
        &(Rational::one() - budget.clone()),
        depth,
        crate::game::Variant::Plain,
    )
    .map_err(TransformError::Extraction)?;

    Ok(ComposedDivergence {
        swapped,
        schedule,
        block_cover_masses,
        intermediate_witnesses: combined.witnesses,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn half_stakes_block_schedule() {
        // s_i = 1/2: the first block needs (1/2)^4 = 1/16 < 1/8.
        let stakes = RationalSeq::constant(rat(1, 2));
        let tolerances: Vec<Rational> = (0..3).map(|k| Rational::half_pow(k + 3)).collect();
        let schedule = bc_divergence_blocks(&stakes, &tolerances, 64).unwrap();
        assert!(schedule.complete);
        assert_eq!(schedule.blocks[0], (0, 3));
        for (k, p) in schedule.products.iter().enumerate() {
            assert!(*p < schedule.tolerances[k], "block {k} product not below");
        }
    }

    #[test]
    fn unit_tolerance_gives_singleton_block() {
        let stakes = RationalSeq::constant(rat(1, 2));
        let schedule = bc_divergence_blocks(&stakes, &[rat(1, 1)], 8).unwrap();
        assert_eq!(schedule.blocks[0], (0, 0));
    }

    #[test]
    fn horizon_exhaustion_flags_partial() {
        let stakes = RationalSeq::constant(rat(1, 2));
        let schedule =
            bc_divergence_blocks(&stakes, &[rat(1, 8), rat(1, 1024)], 8).unwrap();
        assert!(!schedule.complete);
        assert_eq!(schedule.blocks.len(), 1);
    }

    #[test]
    fn convergent_sequences_rejected() {
        let stakes = RationalSeq::Geometric {
            first: rat(1, 4),
            ratio: rat(1, 4),
        };
        assert!(matches!(
            bc_divergence_blocks(&stakes, &[rat(1, 8)], 64),
            Err(BlocksError::NotDivergent)
        ));
    }

    #[test]
    fn tail_start_from_geometric_bound() {
        // s_i = 4^{-i-1}: tail from 1 sums to 1/12 < 1/2.
        let stakes = RationalSeq::Geometric {
            first: rat(1, 4),
            ratio: rat(1, 4),
        };
        let sources: Vec<(Rational, Box<dyn SideStrategy>)> = (0..4)
            .map(|i| {
                let s = stakes.at(i);
                let tau = CoverAvoider::unchecked(ClopenSet::empty(), s.clone());
                (s, Box::new(tau) as Box<dyn SideStrategy>)
            })
            .collect();
        let tail = TailAvoider::new(sources, stakes.clone(), 4, 8);
        // The whole series sums to 1/3 < 1/2, so the least tail start is 0;
        // the tail from 1 sums to 1/12, also well below the budget.
        assert_eq!(tail.tail_start(&rat(1, 2)).unwrap(), 0);
        assert_eq!(stakes.tail_sum_bound(1).unwrap(), rat(1, 12));
        assert!(tail.tail_start(&rat(1, 1000)).is_err());
    }
}
