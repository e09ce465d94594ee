//! Adversary strategies for the falsification suites: seeded random legal
//! players and greedy players that push toward or away from a target set.
//!
//! Randomness is derived from the seed plus a hash of the position, so these
//! are pure decision rules: replaying a run reproduces it bit-identically.

use crate::game::{Position, SideMove, SideStrategy, SplitMove, SplitStrategy};
use crate::measure::DyadicMeasure;
use crate::rational::Rational;
use crate::sets::ClopenSet;
use crate::stern::try_simplest_in_open;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

fn position_rng(seed: u64, pos: &Position) -> ChaCha8Rng {
    let mut h = DefaultHasher::new();
    pos.rounds().hash(&mut h);
    pos.pending().hash(&mut h);
    ChaCha8Rng::seed_from_u64(seed ^ h.finish())
}

/// Interior point of `[lo, hi]` at a seeded grid offset; endpoints excluded.
fn interior_point(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational) -> Rational {
    const GRAIN: i64 = 64;
    let k = rng.gen_range(0..GRAIN);
    lo.clone()
        + (hi.clone() - lo.clone()) * Rational::new(2 * k + 1, 2 * GRAIN)
}

/// The legal interval for the mass on `side` of a split of `total` at the
/// children caps, ignoring endpoint strictness (interior points are always
/// legal when the interval is nondegenerate).
fn side_interval(total: &Rational, cap_this: &Rational, cap_other: &Rational) -> (Rational, Rational) {
    let lo = (total.clone() - cap_other.clone()).max(Rational::zero());
    let hi = total.clone().min(cap_this.clone());
    (lo, hi)
}

/// Seeded random legal splitter for player I.
#[derive(Clone)]
pub struct RandomSplitter {
    pub seed: u64,
}

impl RandomSplitter {
    pub fn new(seed: u64) -> Self {
        RandomSplitter { seed }
    }
}

impl SplitStrategy for RandomSplitter {
    fn name(&self) -> String {
        format!("random-splitter(seed {})", self.seed)
    }

    fn split(&self, mu: &DyadicMeasure, pos: &Position) -> Option<SplitMove> {
        let mut rng = position_rng(self.seed, pos);
        let node = pos.node();
        let variant = pos.variant();
        let arity = variant.arity();
        let caps: Vec<Rational> = (0..arity)
            .map(|i| mu.cylinder_mass(&variant.child(&node, i as u8)))
            .collect();
        let cap_sum: Rational = caps.iter().cloned().sum();

        let total = match pos.round_budget() {
            Some(b) => b,
            None => {
                // Opening: any sum strictly between the stake and the cap sum.
                if *pos.stake() >= cap_sum {
                    return None;
                }
                interior_point(&mut rng, pos.stake(), &cap_sum)
            }
        };
        if total.is_zero() {
            return Some(SplitMove {
                masses: vec![Rational::zero(); arity],
            });
        }

        // Assign sides one by one, each from its legal interval against the
        // pooled remainder of the later caps.
        let mut masses = Vec::with_capacity(arity);
        let mut remaining = total;
        for i in 0..arity {
            let tail_cap: Rational = caps[i + 1..].iter().cloned().sum();
            if i + 1 == arity {
                masses.push(remaining.clone());
                break;
            }
            let (lo, hi) = side_interval(&remaining, &caps[i], &tail_cap);
            let v = if lo == hi {
                lo
            } else {
                interior_point(&mut rng, &lo, &hi)
            };
            remaining = remaining - v.clone();
            masses.push(v);
        }
        Some(SplitMove { masses })
    }

    fn clone_box(&self) -> Box<dyn SplitStrategy> {
        Box::new(self.clone())
    }
}

/// Seeded random side picker for player II: picks uniformly among the
/// nonzero-mass sides.
#[derive(Clone)]
pub struct RandomSider {
    pub seed: u64,
}

impl RandomSider {
    pub fn new(seed: u64) -> Self {
        RandomSider { seed }
    }
}

impl SideStrategy for RandomSider {
    fn name(&self) -> String {
        format!("random-sider(seed {})", self.seed)
    }

    fn side(&self, _mu: &DyadicMeasure, pos: &Position) -> Option<SideMove> {
        let split = pos.pending()?;
        let nonzero: Vec<u8> = split
            .masses
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_zero())
            .map(|(i, _)| i as u8)
            .collect();
        if nonzero.is_empty() {
            return None;
        }
        let mut rng = position_rng(self.seed, pos);
        let pick = rng.gen_range(0..nonzero.len());
        Some(SideMove::pick(nonzero[pick]))
    }

    fn clone_box(&self) -> Box<dyn SideStrategy> {
        Box::new(self.clone())
    }
}

/// Greedy adversary for player I: splits the budget proportionally to the
/// conditional mass of a target set per side, rounded to the legal interval
/// by the smallest-denominator rule.
#[derive(Clone)]
pub struct GreedySplitter {
    /// The set the splitter funnels mass toward (the payoff's complement,
    /// when fighting for player I).
    pub target: ClopenSet,
}

impl SplitStrategy for GreedySplitter {
    fn name(&self) -> String {
        "greedy-splitter".into()
    }

    fn split(&self, mu: &DyadicMeasure, pos: &Position) -> Option<SplitMove> {
        let node = pos.node();
        let variant = pos.variant();
        let arity = variant.arity();
        debug_assert_eq!(arity, 2, "greedy splitter plays the plain game");
        let caps: Vec<Rational> = (0..2)
            .map(|i| mu.cylinder_mass(&variant.child(&node, i as u8)))
            .collect();
        let weights: Vec<Rational> = (0..2)
            .map(|i| self.target.mass_in(mu, &variant.child(&node, i as u8)))
            .collect();

        let total = match pos.round_budget() {
            Some(b) => b,
            None => {
                // Open just above the stake: midpoint of (stake, cap sum).
                let cap_sum = caps[0].clone() + caps[1].clone();
                if *pos.stake() >= cap_sum {
                    return None;
                }
                Rational::midpoint(pos.stake(), &cap_sum)
            }
        };
        if total.is_zero() {
            return Some(SplitMove::pair(Rational::zero(), Rational::zero()));
        }

        let weight_sum = weights[0].clone() + weights[1].clone();
        let desired = if weight_sum.is_zero() {
            total.clone() * caps[0].clone() / (caps[0].clone() + caps[1].clone())
        } else {
            total.clone() * weights[0].clone() / weight_sum
        };
        let (lo, hi) = side_interval(&total, &caps[0], &caps[1]);
        if lo == hi {
            return Some(SplitMove::pair(lo.clone(), total - lo));
        }
        let clamped = desired.max(lo.clone()).min(hi.clone());
        // Round by the selection rule inside a window around the target,
        // widening until it bites.
        let mut grain = (hi.clone() - lo.clone()) / Rational::from_int(16);
        let m0 = loop {
            let w_lo = (clamped.clone() - grain.clone()).max(lo.clone());
            let w_hi = (clamped.clone() + grain.clone()).min(hi.clone());
            if let Some(v) = try_simplest_in_open(&w_lo, &w_hi) {
                break v;
            }
            grain = grain * Rational::from_int(2);
            if grain > hi.clone() - lo.clone() {
                break Rational::midpoint(&lo, &hi);
            }
        };
        Some(SplitMove::pair(m0.clone(), total - m0))
    }

    fn clone_box(&self) -> Box<dyn SplitStrategy> {
        Box::new(self.clone())
    }
}

/// Greedy adversary for player II: picks the nonzero side with the largest
/// conditional mass of a target set (ties to the smaller index).
#[derive(Clone)]
pub struct GreedySider {
    pub target: ClopenSet,
}

impl SideStrategy for GreedySider {
    fn name(&self) -> String {
        "greedy-sider".into()
    }

    fn side(&self, mu: &DyadicMeasure, pos: &Position) -> Option<SideMove> {
        let split = pos.pending()?;
        let node = pos.node();
        let variant = pos.variant();
        let mut best: Option<(u8, Rational, Rational)> = None; // (idx, weight, cap)
        for (i, m) in split.masses.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let child = variant.child(&node, i as u8);
            let weight = self.target.mass_in(mu, &child);
            let cap = mu.cylinder_mass(&child);
            let better = match &best {
                None => true,
                // Compare weight/cap ratios exactly by cross-multiplication.
                Some((_, bw, bc)) => weight.clone() * bc.clone() > bw.clone() * cap.clone(),
            };
            if better {
                best = Some((i as u8, weight, cap));
            }
        }
        best.map(|(i, _, _)| SideMove::pick(i))
    }

    fn clone_box(&self) -> Box<dyn SideStrategy> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{validate_side, validate_split, Variant};
    use crate::node::node;
    use crate::rational::rat;

    #[test]
    fn random_players_stay_legal() {
        let measures = [
            DyadicMeasure::fair(),
            DyadicMeasure::bernoulli(rat(1, 3)),
            DyadicMeasure::point_mass(crate::measure::Branch::constant(0)),
        ];
        for (mi, mu) in measures.iter().enumerate() {
            for seed in 0..20u64 {
                let sigma = RandomSplitter::new(seed);
                let tau = RandomSider::new(seed.wrapping_add(99));
                let mut pos = Position::empty(Variant::Plain, rat(1, 3));
                for round in 0..10 {
                    let split = sigma.split(mu, &pos).unwrap();
                    validate_split(mu, &pos, &split).unwrap_or_else(|e| {
                        panic!("measure {mi} seed {seed} round {round}: {e}")
                    });
                    let pending = pos.with_pending(split);
                    let side = tau.side(mu, &pending).unwrap();
                    validate_side(mu, &pending, &side).unwrap();
                    pos = pending.apply_side(side);
                }
            }
        }
    }

    #[test]
    fn random_split_is_position_deterministic() {
        let mu = DyadicMeasure::fair();
        let sigma = RandomSplitter::new(7);
        let pos = Position::empty(Variant::Plain, rat(1, 4));
        assert_eq!(sigma.split(&mu, &pos), sigma.split(&mu, &pos));
    }

    #[test]
    fn greedy_players_stay_legal_and_lean() {
        let mu = DyadicMeasure::fair();
        let target = ClopenSet::cylinder(node("11"));
        let sigma = GreedySplitter {
            target: target.complement(),
        };
        let tau = GreedySider { target };
        let mut pos = Position::empty(Variant::Plain, rat(1, 4));
        for _ in 0..8 {
            let split = sigma.split(&mu, &pos).unwrap();
            validate_split(&mu, &pos, &split).unwrap();
            let pending = pos.with_pending(split);
            let side = tau.side(&mu, &pending).unwrap();
            validate_side(&mu, &pending, &side).unwrap();
            pos = pending.apply_side(side);
        }
        // The sider hunts the 11-cylinder whenever the splitter leaves mass
        // there; the splitter starves it, driving II's ratio of target mass
        // to zero.
        assert!(pos.node().len() == 8);
    }

    #[test]
    fn random_splitter_paired_game() {
        let fair = DyadicMeasure::fair();
        let mu2 = DyadicMeasure::product(&fair, &fair);
        let sigma = RandomSplitter::new(3);
        let tau = RandomSider::new(4);
        let mut pos = Position::empty(Variant::Paired, rat(1, 8));
        for _ in 0..6 {
            let split = sigma.split(&mu2, &pos).unwrap();
            validate_split(&mu2, &pos, &split).unwrap();
            let pending = pos.with_pending(split);
            let side = tau.side(&mu2, &pending).unwrap();
            pos = pending.apply_side(side);
        }
        assert_eq!(pos.node().len(), 12);
    }
}
