//! Per-side infimum analysis of a player II strategy.
//!
//! For a context with player I to move, `delta(i)` is the infimum of the
//! values a legal split can assign to side `i` while still being answered
//! with `i`, capped at the child cylinder mass. Strategies built by this
//! crate report the value in closed form; black-box strategies get a
//! grid-plus-bisection estimate that assumes side-threshold monotonicity
//! (if the strategy picks a side at some assigned value, it also picks it
//! at any larger legal value with the same complement).
//!
//! The estimate for each side is a bracket: `lower` is the largest probe
//! value refuted within the probe family (or the family's legal minimum),
//! and `witness` is the cheapest elicited probe, so
//! `witness.value <= lower + budget/resolution` after the grid scan and
//! usually far tighter after bisection. A side with no witness was never
//! chosen on the grid; its infimum defaults to the cylinder cap.

use super::rules::validate_split;
use super::{Position, SideStrategy, SplitMove};
use crate::measure::DyadicMeasure;
use crate::rational::Rational;
use serde::{Deserialize, Serialize};

/// A legal split the strategy answers with the probed side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaWitness {
    /// The value the split assigns to the probed side.
    pub value: Rational,
    pub split: SplitMove,
}

/// Estimate for one side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaSide {
    /// Largest refuted probe value; equals the exact infimum for
    /// exact-capable strategies.
    pub lower: Rational,
    /// Cheapest elicited probe, absent when the side was never chosen.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<DeltaWitness>,
    pub exact: bool,
}

impl DeltaSide {
    /// The infimum estimate from above: the witness value, or the cap for a
    /// side that was never elicited.
    pub fn upper(&self, cap: &Rational) -> Rational {
        match &self.witness {
            Some(w) => w.value.clone().min(cap.clone()),
            None => cap.clone(),
        }
    }
}

/// Full per-context report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub sides: Vec<DeltaSide>,
    /// The probe budget: the current node's mass, or the stake at the root
    /// unless overridden.
    pub budget: Rational,
    pub resolution: u32,
}

impl DeltaReport {
    pub fn lower(&self, side: u8) -> &Rational {
        &self.sides[side as usize].lower
    }
}

/// Estimates the per-side infima of `tau` at `ctx` (player I to move).
///
/// `budget` defaults to the current node's mass (the stake at the root);
/// an override fixes the probe sum, which is only meaningful at the root
/// where the opening sum is otherwise free. `resolution` is the grid
/// granularity denominator Q >= 2.
pub fn estimate_delta(
    mu: &DyadicMeasure,
    tau: &dyn SideStrategy,
    ctx: &Position,
    budget: Option<Rational>,
    resolution: u32,
) -> DeltaReport {
    assert!(resolution >= 2, "resolution must be at least 2");
    assert!(ctx.pending().is_none(), "context must await player I");
    let at_root = ctx.depth() == 0;
    let fixed_sum = budget.is_some() || !at_root;
    let budget = budget.unwrap_or_else(|| ctx.delta_budget());

    if let Some(exact) = tau.exact_delta(mu, ctx, &budget) {
        let arity = ctx.variant().arity();
        let step = budget.clone() / Rational::from_int(resolution as i64);
        let mut sides = Vec::with_capacity(arity);
        for i in 0..arity {
            let cap = mu.cylinder_mass(&ctx.variant().child(&ctx.node(), i as u8));
            let delta = exact.deltas[i].clone();
            let witness = if delta < cap {
                tau.delta_witness(mu, ctx, &budget, i as u8, &(delta.clone() + step.clone()))
            } else {
                None
            };
            sides.push(DeltaSide {
                lower: delta,
                witness,
                exact: true,
            });
        }
        return DeltaReport {
            sides,
            budget,
            resolution,
        };
    }

    grid_estimate(mu, tau, ctx, &budget, fixed_sum, resolution)
}

/// Builds the probe split assigning `value` to `side`, spreading the rest of
/// the fixed sum over the other sides proportionally to their cylinder caps.
/// Returns `None` when no legal spread exists.
fn fixed_sum_probe(
    mu: &DyadicMeasure,
    ctx: &Position,
    side: usize,
    value: &Rational,
    sum: &Rational,
) -> Option<SplitMove> {
    let arity = ctx.variant().arity();
    let node = ctx.node();
    let rest = sum.clone() - value.clone();
    if rest.is_negative() {
        return None;
    }
    let caps: Vec<Rational> = (0..arity)
        .filter(|j| *j != side)
        .map(|j| mu.cylinder_mass(&ctx.variant().child(&node, j as u8)))
        .collect();
    let cap_sum: Rational = caps.iter().cloned().sum();
    let mut masses = vec![Rational::zero(); arity];
    masses[side] = value.clone();
    if rest.is_positive() {
        if cap_sum.is_zero() || rest >= cap_sum {
            return None;
        }
        let mut k = 0;
        for j in 0..arity {
            if j == side {
                continue;
            }
            masses[j] = rest.clone() * caps[k].clone() / cap_sum.clone();
            k += 1;
        }
    }
    let split = SplitMove { masses };
    validate_split(mu, ctx, &split).ok().map(|_| split)
}

/// Probe with all mass away from `side` set to zero (root only, where the
/// opening sum is free as long as it exceeds the stake).
fn lone_probe(
    mu: &DyadicMeasure,
    ctx: &Position,
    side: usize,
    value: &Rational,
) -> Option<SplitMove> {
    let arity = ctx.variant().arity();
    let mut masses = vec![Rational::zero(); arity];
    masses[side] = value.clone();
    let split = SplitMove { masses };
    validate_split(mu, ctx, &split).ok().map(|_| split)
}

fn elicits(
    mu: &DyadicMeasure,
    tau: &dyn SideStrategy,
    ctx: &Position,
    split: &SplitMove,
    side: usize,
) -> bool {
    tau.side(mu, &ctx.with_pending(split.clone()))
        .map(|s| s.index as usize == side)
        .unwrap_or(false)
}

fn grid_estimate(
    mu: &DyadicMeasure,
    tau: &dyn SideStrategy,
    ctx: &Position,
    budget: &Rational,
    fixed_sum: bool,
    resolution: u32,
) -> DeltaReport {
    let arity = ctx.variant().arity();
    let node = ctx.node();
    let step = budget.clone() / Rational::from_int(resolution as i64);
    let mut sides = Vec::with_capacity(arity);

    for side in 0..arity {
        let cap = mu.cylinder_mass(&ctx.variant().child(&node, side as u8));
        // Probe families: the fixed-sum spread, plus (at a free-sum root)
        // the lone probe at each value and fixed sums one step above the
        // stake, which force the strategy's hand at its cheapest points.
        let mut families: Vec<Box<dyn Fn(&Rational) -> Option<SplitMove> + '_>> = Vec::new();
        if fixed_sum {
            let b = budget.clone();
            families.push(Box::new(move |v| fixed_sum_probe(mu, ctx, side, v, &b)));
        } else {
            families.push(Box::new(move |v| lone_probe(mu, ctx, side, v)));
            let above = budget.clone() + step.clone();
            families.push(Box::new(move |v| {
                fixed_sum_probe(mu, ctx, side, v, &above)
            }));
        }

        let mut best: Option<(Rational, DeltaWitness)> = None; // (lower, witness)
        for family in &families {
            // Grid scan for the cheapest elicited value in this family.
            let mut last_refuted: Option<Rational> = None;
            let mut found: Option<(Rational, SplitMove)> = None;
            let mut j = 0u32;
            loop {
                let v = step.clone() * Rational::from_int(j as i64);
                if v > cap && j > 0 {
                    break;
                }
                if let Some(split) = family(&v) {
                    if elicits(mu, tau, ctx, &split, side) {
                        found = Some((v.clone(), split));
                        break;
                    } else {
                        last_refuted = Some(v.clone());
                    }
                }
                if v >= *budget && v >= cap {
                    break;
                }
                j += 1;
                if j > 4 * resolution {
                    break;
                }
            }
            let (mut hi_v, mut hi_split) = match found {
                Some(f) => f,
                None => continue,
            };
            // Bisection refinement below the elicited value, assuming
            // threshold monotonicity within the family.
            let mut lo = last_refuted.unwrap_or_else(Rational::zero);
            for _ in 0..24 {
                if lo >= hi_v {
                    break;
                }
                let mid = Rational::midpoint(&lo, &hi_v);
                match family(&mid) {
                    Some(split) if elicits(mu, tau, ctx, &split, side) => {
                        hi_v = mid;
                        hi_split = split;
                    }
                    Some(_) => lo = mid,
                    None => lo = mid,
                }
            }
            let witness = DeltaWitness {
                value: hi_v,
                split: hi_split,
            };
            let better = match &best {
                None => true,
                Some((_, w)) => witness.value < w.value,
            };
            if better {
                best = Some((lo, witness));
            }
        }

        sides.push(match best {
            Some((lower, witness)) => DeltaSide {
                lower,
                witness: Some(witness),
                exact: false,
            },
            None => DeltaSide {
                // Never elicited on the grid: the infimum defaults to the
                // cylinder cap term.
                lower: cap.clone(),
                witness: None,
                exact: false,
            },
        });
    }

    DeltaReport {
        sides,
        budget: budget.clone(),
        resolution,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{SideMove, Variant};
    use crate::rational::rat;

    /// Always picks side 0 when it carries mass, side 1 otherwise.
    #[derive(Clone)]
    struct AlwaysZero;

    impl SideStrategy for AlwaysZero {
        fn name(&self) -> String {
            "always-zero".into()
        }
        fn side(&self, _mu: &DyadicMeasure, pos: &Position) -> Option<SideMove> {
            let split = pos.pending()?;
            if !split.masses[0].is_zero() {
                Some(SideMove::pick(0))
            } else {
                Some(SideMove::pick(1))
            }
        }
        fn clone_box(&self) -> Box<dyn SideStrategy> {
            Box::new(self.clone())
        }
    }

    #[test]
    fn degenerate_preference_brackets() {
        let mu = DyadicMeasure::fair();
        let ctx = Position::empty(Variant::Plain, rat(1, 4));
        let report = estimate_delta(&mu, &AlwaysZero, &ctx, None, 8);
        // Side 0 is elicited at arbitrarily small positive values.
        assert_eq!(report.sides[0].lower, Rational::zero());
        let w0 = report.sides[0].witness.as_ref().unwrap();
        assert!(w0.value.is_positive());
        assert!(w0.value <= rat(1, 4) * rat(1, 8));
        // Side 1 is elicited only when side 0 carries nothing, i.e. just
        // above the stake.
        let w1 = report.sides[1].witness.as_ref().unwrap();
        assert!(w1.value > rat(1, 4));
        assert!(report.sides[1].lower <= rat(1, 4));
        assert!(w1.value <= rat(1, 4) + rat(1, 4) * rat(1, 2));
    }

    #[test]
    fn fixed_sum_context_brackets() {
        let mu = DyadicMeasure::fair();
        let mut pos = Position::empty(Variant::Plain, rat(0, 1));
        pos.push_round(SplitMove::pair(rat(1, 8), rat(1, 16)), SideMove::pick(0));
        let report = estimate_delta(&mu, &AlwaysZero, &pos, None, 8);
        assert_eq!(report.budget, rat(1, 8));
        // Side 0 elicited at tiny values; side 1 only at the full budget.
        assert_eq!(report.sides[0].lower, Rational::zero());
        let w1 = report.sides[1].witness.as_ref().unwrap();
        assert_eq!(w1.value, rat(1, 8));
        // The witness split really is answered with side 1.
        let answered = AlwaysZero
            .side(&mu, &pos.with_pending(w1.split.clone()))
            .unwrap();
        assert_eq!(answered.index, 1);
    }

    /// When the probe budget equals the child cap, the only split that could
    /// elicit the dispreferred side is barred by strictness, so the infimum
    /// falls back to the cylinder cap term with no witness.
    #[test]
    fn capped_side_reports_no_witness() {
        let mu = DyadicMeasure::fair();
        let mut pos = Position::empty(Variant::Plain, rat(0, 1));
        pos.push_round(SplitMove::pair(rat(1, 4), rat(1, 8)), SideMove::pick(0));
        let report = estimate_delta(&mu, &AlwaysZero, &pos, None, 8);
        assert!(report.sides[1].witness.is_none());
        assert_eq!(report.sides[1].lower, rat(1, 4));
    }
}
