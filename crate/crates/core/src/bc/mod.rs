//! Event families, both Borel-Cantelli directions, and the constructive
//! second-moment strategy for limsup events.

mod blocks;
mod lemmas;
mod rl;
mod seq;

pub use blocks::{
    bc_convergence_strategy, bc_divergence_blocks, bc_divergence_strategy, BlockSchedule,
    BlocksError, ComposedDivergence, TailAvoider,
};
pub use lemmas::{delta_for_eta, min_index_bound, NumSplitError};
pub use rl::{
    choose_side, commitment_cutoff, rl_strategy, CutoffChoice, RlConfig, RlContext, RlFailure,
    RlRoundRow, RlSider, SideChoice,
};
pub use seq::RationalSeq;

use crate::measure::{DyadicMeasure, MeasureSpec};
use crate::node::Node;
use crate::rational::Rational;
use crate::sets::{ClopenSet, FamilySpec};
use serde::{Deserialize, Serialize};

/// An indexed family of clopen events with exact mass accessors, including
/// masses conditioned on a context of committed index windows.
///
/// Coordinate families under product measures use closed-form per-coordinate
/// probabilities; explicit families fall back to exact clopen algebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventFamily {
    pub spec: FamilySpec,
}

/// Exact prefix sums of the first and second moments of an event family
/// over an index range, inside a context cylinder-with-windows.
#[derive(Clone, Debug)]
pub struct MomentSeries {
    pub start: usize,
    /// `singles[k]` = sum over i in [start, start+k] of the event masses.
    pub singles: Vec<Rational>,
    /// `pairs[k]` = sum over i, j in [start, start+k] of the pair masses.
    pub pairs: Vec<Rational>,
    /// The context mass itself.
    pub context: Rational,
}

impl EventFamily {
    pub fn new(spec: FamilySpec) -> Self {
        EventFamily { spec }
    }

    pub fn coordinate(bit: u8) -> Self {
        EventFamily {
            spec: FamilySpec::Coordinate { bit },
        }
    }

    /// Per-coordinate hit probability when both the family and the measure
    /// are product-like: the fast path for all context computations.
    fn product_prob(&self, mu: &DyadicMeasure) -> Option<(u8, Rational)> {
        let bit = match &self.spec {
            FamilySpec::Coordinate { bit } => *bit,
            _ => return None,
        };
        match mu.spec() {
            MeasureSpec::Fair => Some((bit, Rational::new(1, 2))),
            MeasureSpec::Bernoulli { p } => Some((
                bit,
                if bit == 1 {
                    p.clone()
                } else {
                    Rational::one() - p.clone()
                },
            )),
            _ => None,
        }
    }

    /// The conditional hit probability of event `i` given the cylinder at
    /// `t`, on the product fast path.
    fn coordinate_conditional(&self, t: &Node, i: usize, bit: u8, q: &Rational) -> Rational {
        if i < t.len() {
            if t.bit(i) == bit {
                Rational::one()
            } else {
                Rational::zero()
            }
        } else {
            q.clone()
        }
    }

    /// The event as a clopen set (generic path).
    pub fn event(&self, i: usize) -> Option<ClopenSet> {
        self.spec.event(i)
    }

    /// `mu(A_i /\ N_t)`.
    pub fn event_mass(&self, mu: &DyadicMeasure, i: usize, t: &Node) -> Rational {
        if let Some((bit, q)) = self.product_prob(mu) {
            return mu.cylinder_mass(t) * self.coordinate_conditional(t, i, bit, &q);
        }
        self.spec
            .event(i)
            .map(|e| e.mass_in(mu, t))
            .unwrap_or_else(Rational::zero)
    }

    /// `mu(A_i /\ A_j /\ N_t)`.
    pub fn pair_mass(&self, mu: &DyadicMeasure, i: usize, j: usize, t: &Node) -> Rational {
        if i == j {
            return self.event_mass(mu, i, t);
        }
        if let Some((bit, q)) = self.product_prob(mu) {
            return mu.cylinder_mass(t)
                * self.coordinate_conditional(t, i, bit, &q)
                * self.coordinate_conditional(t, j, bit, &q);
        }
        match (self.spec.event(i), self.spec.event(j)) {
            (Some(a), Some(b)) => a.intersect(&b).mass_in(mu, t),
            _ => Rational::zero(),
        }
    }

    /// The context set `N_t /\ (union of events over each window)` as a
    /// clopen set (generic path only).
    fn context_set(&self, t: &Node, windows: &[(usize, usize)]) -> Option<ClopenSet> {
        let mut ctx = ClopenSet::cylinder(t.clone());
        for &(a, b) in windows {
            let mut union = ClopenSet::empty();
            for i in a..b {
                union = union.union(&self.spec.event(i)?);
            }
            ctx = ctx.intersect(&union);
        }
        Some(ctx)
    }

    /// `mu(N_t /\ windows-context)`.
    pub fn context_mass(
        &self,
        mu: &DyadicMeasure,
        t: &Node,
        windows: &[(usize, usize)],
    ) -> Rational {
        if let Some((bit, q)) = self.product_prob(mu) {
            let mut mass = mu.cylinder_mass(t);
            for &(a, b) in windows {
                if mass.is_zero() {
                    return mass;
                }
                mass = mass * self.window_hit_prob(t, a, b, bit, &q);
            }
            return mass;
        }
        self.context_set(t, windows)
            .map(|c| c.measure(mu))
            .unwrap_or_else(Rational::zero)
    }

    /// Conditional probability that some event with index in `[a, b)` hits,
    /// given the cylinder at `t` (product fast path).
    fn window_hit_prob(&self, t: &Node, a: usize, b: usize, bit: u8, q: &Rational) -> Rational {
        let mut miss = Rational::one();
        for i in a..b {
            if i < t.len() {
                if t.bit(i) == bit {
                    return Rational::one();
                }
                // A fixed miss leaves the window to its other indices.
            } else {
                miss = miss * (Rational::one() - q.clone());
            }
        }
        Rational::one() - miss
    }

    /// Exact first/second-moment prefix sums of events `start..=horizon`
    /// inside the windows context at `t`.
    ///
    /// The event indices in the series lie at or above every committed
    /// window, so on the product fast path they are independent of the
    /// context and of each other beyond the fixed coordinates.
    pub fn moment_series(
        &self,
        mu: &DyadicMeasure,
        t: &Node,
        windows: &[(usize, usize)],
        start: usize,
        horizon: usize,
    ) -> MomentSeries {
        assert!(start <= horizon);
        debug_assert!(windows.iter().all(|&(_, b)| b <= start));
        let len = horizon - start + 1;
        let mut singles = Vec::with_capacity(len);
        let mut pairs = Vec::with_capacity(len);

        if let Some((bit, q)) = self.product_prob(mu) {
            let context = self.context_mass(mu, t, windows);
            let mut single_acc = Rational::zero(); // conditional sums
            let mut pair_acc = Rational::zero();
            for n in start..=horizon {
                let p = self.coordinate_conditional(t, n, bit, &q);
                // New pairs: both orders against earlier indices, plus the
                // diagonal term, which is the event itself.
                pair_acc +=
                    Rational::from_int(2) * single_acc.clone() * p.clone() + p.clone();
                single_acc += p;
                singles.push(context.clone() * single_acc.clone());
                pairs.push(context.clone() * pair_acc.clone());
            }
            return MomentSeries {
                start,
                singles,
                pairs,
                context,
            };
        }

        let ctx = self
            .context_set(t, windows)
            .unwrap_or_else(ClopenSet::empty);
        let context = ctx.measure(mu);
        let events: Vec<ClopenSet> = (start..=horizon)
            .map(|i| self.spec.event(i).unwrap_or_else(ClopenSet::empty))
            .collect();
        let mut single_acc = Rational::zero();
        let mut pair_acc = Rational::zero();
        for k in 0..len {
            let ev_ctx = events[k].intersect(&ctx);
            let p = ev_ctx.measure(mu);
            let mut cross = Rational::zero();
            for event in events.iter().take(k) {
                cross += event.intersect(&ev_ctx).measure(mu);
            }
            pair_acc += Rational::from_int(2) * cross + p.clone();
            single_acc += p;
            singles.push(single_acc.clone());
            pairs.push(pair_acc.clone());
        }
        MomentSeries {
            start,
            singles,
            pairs,
            context,
        }
    }
}

/// A failed independence identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceCounterexample {
    pub subset: Vec<usize>,
    pub intersection_mass: Rational,
    pub product_mass: Rational,
}

/// Verifies the product identity `mu(intersection of A_i) = product of
/// mu(A_i)` for every nonempty subset of `indices`.
pub fn check_mutual_independence(
    family: &EventFamily,
    mu: &DyadicMeasure,
    indices: &[usize],
) -> Result<(), IndependenceCounterexample> {
    assert!(indices.len() <= 16, "subset check is exponential");
    let root = Node::root();
    for mask in 1u32..(1 << indices.len()) {
        let subset: Vec<usize> = indices
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) != 0)
            .map(|(_, &i)| i)
            .collect();
        let mut product = Rational::one();
        for &i in &subset {
            product = product * family.event_mass(mu, i, &root);
        }
        let intersection_mass = match family.product_prob(mu) {
            Some((bit, q)) => {
                let mut dedup = subset.clone();
                dedup.sort_unstable();
                dedup.dedup();
                let mut m = Rational::one();
                for &i in &dedup {
                    m = m * family.coordinate_conditional(&root, i, bit, &q);
                }
                m
            }
            None => {
                let mut acc = ClopenSet::full();
                for &i in &subset {
                    acc = acc.intersect(&family.event(i).unwrap_or_else(ClopenSet::empty));
                }
                acc.measure(mu)
            }
        };
        if intersection_mass != product {
            return Err(IndependenceCounterexample {
                subset,
                intersection_mass,
                product_mass: product,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::node;
    use crate::rational::rat;

    #[test]
    fn coordinate_events_are_independent() {
        let fam = EventFamily::coordinate(1);
        let mu = DyadicMeasure::fair();
        check_mutual_independence(&fam, &mu, &[0, 1, 2]).unwrap();
        let triple = fam.pair_mass(&mu, 0, 1, &Node::root())
            * fam.event_mass(&mu, 2, &Node::root())
            / Rational::one();
        assert_eq!(triple, rat(1, 8));
    }

    #[test]
    fn duplicated_events_fail_independence() {
        let c = ClopenSet::cylinder(node("1"));
        let fam = EventFamily::new(FamilySpec::Explicit {
            events: vec![c.clone(), c],
        });
        let mu = DyadicMeasure::fair();
        let err = check_mutual_independence(&fam, &mu, &[0, 1]).unwrap_err();
        assert_eq!(err.intersection_mass, rat(1, 2));
        assert_eq!(err.product_mass, rat(1, 4));
    }

    #[test]
    fn coordinate_events_under_biased_coin() {
        let fam = EventFamily::coordinate(1);
        let mu = DyadicMeasure::bernoulli(rat(1, 3));
        check_mutual_independence(&fam, &mu, &[0, 2]).unwrap();
        assert_eq!(fam.pair_mass(&mu, 0, 2, &Node::root()), rat(1, 9));
    }

    #[test]
    fn context_mass_with_windows() {
        let fam = EventFamily::coordinate(1);
        let mu = DyadicMeasure::fair();
        // Window [0,2): P(hit) = 1 - 1/4 = 3/4 at the root.
        assert_eq!(fam.context_mass(&mu, &Node::root(), &[(0, 2)]), rat(3, 4));
        // At node "1" the window is already hit.
        assert_eq!(fam.context_mass(&mu, &node("1"), &[(0, 2)]), rat(1, 2));
        // At node "00" both indices missed: the context is empty.
        assert_eq!(
            fam.context_mass(&mu, &node("00"), &[(0, 2)]),
            Rational::zero()
        );
    }

    /// The closed-form moment series must agree with the generic clopen
    /// algebra on an explicit copy of the same family (dual-route check).
    #[test]
    fn moment_series_fast_path_agrees_with_generic() {
        let mu = DyadicMeasure::fair();
        let coord = EventFamily::coordinate(1);
        let explicit = EventFamily::new(FamilySpec::Explicit {
            events: (0..8).map(|i| ClopenSet::coordinate(i, 1)).collect(),
        });
        let t = node("10");
        let windows = [(0usize, 2usize)];
        let a = coord.moment_series(&mu, &t, &windows, 2, 7);
        let b = explicit.moment_series(&mu, &t, &windows, 2, 7);
        assert_eq!(a.context, b.context);
        assert_eq!(a.singles, b.singles);
        assert_eq!(a.pairs, b.pairs);
    }

    /// The frozen second-moment ratio for fair coordinate events: with
    /// `count` events the pair sum is count/2 + count(count-1)/4 against
    /// squared singles (count/2)^2, giving (count+1)/count.
    #[test]
    fn coordinate_ratio_closed_form() {
        let mu = DyadicMeasure::fair();
        let fam = EventFamily::coordinate(1);
        let s = fam.moment_series(&mu, &Node::root(), &[], 0, 9);
        for (k, (pairs, singles)) in s.pairs.iter().zip(s.singles.iter()).enumerate() {
            let count = k as i64 + 1;
            assert_eq!(*singles, rat(count, 2));
            assert_eq!(*pairs, rat(count, 2) + rat(count * (count - 1), 4));
            let ratio = pairs.clone() / (singles.clone() * singles.clone());
            assert_eq!(ratio, rat(count + 1, count));
        }
    }
}
