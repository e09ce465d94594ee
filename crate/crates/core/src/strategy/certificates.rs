//! Winner certificates and their extraction from strategies.
//!
//! A winning strategy for player I induces a scaled measure whose support
//! tree avoids the payoff and carries more than the stake; a winning
//! strategy for player II yields, for every positive slack, a tree of
//! strategy-consistent branches whose complement frontier stays below
//! stake-plus-slack at every level. Both extractions work level by level to
//! a working depth and attach enough data to re-audit every claim exactly.

use crate::game::{
    estimate_delta, validate_side, validate_split, Position, SideMove, SideStrategy,
    SplitStrategy, Variant,
};
use crate::measure::DyadicMeasure;
use crate::node::Node;
use crate::rational::Rational;
use crate::scaled::ScaledMeasure;
use crate::sets::{ExplicitTree, Region, SetExpr};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Extraction failure: the source strategy broke the rules.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ExtractError {
    #[error("stake {0} is not inside [0, 1)")]
    BadStake(Rational),
    #[error("strategy resigned at {0:?}")]
    Resigned(Box<Position>),
    #[error("strategy played an illegal move at {pos:?}: {violation}")]
    Illegal {
        pos: Box<Position>,
        violation: crate::game::RuleViolation,
    },
}

/// Player I's witness: a scaled measure with explicit masses to the working
/// depth, claimed to exceed the stake at the root and to be supported away
/// from the payoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassWitness {
    pub format: u32,
    pub stake: Rational,
    pub depth: usize,
    pub scaled: ScaledMeasure,
}

/// Player II's witness: level-by-level mass tables whose sub-cylinder-mass
/// nodes form a tree of strategy-consistent branches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeWitness {
    pub format: u32,
    pub stake: Rational,
    /// The slack budget of the construction.
    pub slack: Rational,
    pub depth: usize,
    /// Full mass table per level: `levels[n]` maps every node of depth n to
    /// its committed mass.
    pub levels: Vec<BTreeMap<Node, Rational>>,
    /// The nodes whose mass stays below their cylinder mass.
    pub tree: ExplicitTree,
    /// Replayable positions reaching each tree node.
    pub positions: BTreeMap<Node, Position>,
    /// Set when some per-node target slack could not be met at the working
    /// resolution; `achieved_slack` then reports the worst gap.
    pub approximate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub achieved_slack: Option<Rational>,
    /// Sides the strategy never chose at the probing resolution.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unwitnessed: Vec<Node>,
}

/// A winner's witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    MassWitness(MassWitness),
    TreeWitness(TreeWitness),
}

pub const CERTIFICATE_FORMAT: u32 = 1;

/// Enumerates player II's legal reply patterns to the working depth,
/// recording the masses the strategy assigns (zero off-rule), and returns
/// the induced scaled measure.
pub fn extract_scaled_measure(
    sigma: &dyn SplitStrategy,
    mu: &DyadicMeasure,
    stake: &Rational,
    depth: usize,
    variant: Variant,
) -> Result<MassWitness, ExtractError> {
    if stake.is_negative() || *stake >= Rational::one() {
        return Err(ExtractError::BadStake(stake.clone()));
    }
    assert_eq!(variant.arity(), 2, "scaled measures live on the dyadic tree");
    let mut masses: BTreeMap<Node, Rational> = BTreeMap::new();
    let mut stack = vec![Position::empty(variant, stake.clone())];

    while let Some(pos) = stack.pop() {
        let split = sigma
            .split(mu, &pos)
            .ok_or_else(|| ExtractError::Resigned(Box::new(pos.clone())))?;
        if let Err(violation) = validate_split(mu, &pos, &split) {
            return Err(ExtractError::Illegal {
                pos: Box::new(pos),
                violation,
            });
        }
        let u = pos.node();
        if u.is_root() {
            masses.insert(Node::root(), split.total());
        }
        for i in 0..2u8 {
            let child = u.child(i);
            let m = split.masses[i as usize].clone();
            let live = !m.is_zero();
            masses.insert(child, m);
            if live && pos.depth() + 1 < depth {
                stack.push(pos.with_pending(split.clone()).apply_side(SideMove::pick(i)));
            }
        }
    }

    let scaled = ScaledMeasure::from_map(masses).expect("extraction region is well-formed");
    Ok(MassWitness {
        format: CERTIFICATE_FORMAT,
        stake: stake.clone(),
        depth,
        scaled,
    })
}

/// Builds the level-by-level tree witness for a player II strategy: the
/// root carries the stake, off-tree nodes carry their full cylinder mass,
/// and each live node's children sit within a shrinking slack above the
/// strategy's per-side infima, with a replayable position for every tree
/// node.
pub fn extract_tree(
    tau: &dyn SideStrategy,
    mu: &DyadicMeasure,
    stake: &Rational,
    slack: &Rational,
    depth: usize,
    resolution: u32,
) -> Result<TreeWitness, ExtractError> {
    if stake.is_negative() || *stake >= Rational::one() {
        return Err(ExtractError::BadStake(stake.clone()));
    }
    assert!(slack.is_positive(), "slack must be positive");

    let variant = Variant::Plain;
    let mut levels: Vec<BTreeMap<Node, Rational>> = Vec::with_capacity(depth + 1);
    let mut level0 = BTreeMap::new();
    level0.insert(Node::root(), stake.clone());
    levels.push(level0);

    let mut tree = ExplicitTree::empty();
    tree.insert_with_ancestors(&Node::root());
    let mut positions = BTreeMap::new();
    positions.insert(Node::root(), Position::empty(variant, stake.clone()));

    let mut approximate = false;
    let mut achieved_slack: Option<Rational> = None;
    let mut unwitnessed = Vec::new();

    for n in 0..depth {
        let mut next: BTreeMap<Node, Rational> = BTreeMap::new();
        // Per-node slack target at this level.
        let target = slack.clone() / Rational::from_int(4).pow(n as u32 + 1);
        let level: Vec<(Node, Rational)> = levels[n]
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        for (u, m_u) in level {
            let cap_u = mu.cylinder_mass(&u);
            if m_u >= cap_u {
                // Off the tree: children saturate too.
                for i in 0..2u8 {
                    let child = u.child(i);
                    next.insert(child.clone(), mu.cylinder_mass(&child));
                }
                continue;
            }
            let p_u = positions[&u].clone();
            let report = estimate_delta(mu, tau, &p_u, None, resolution);
            for i in 0..2u8 {
                let child = u.child(i);
                let cap = mu.cylinder_mass(&child);
                let side = &report.sides[i as usize];
                let upper_target = side.lower.clone() + target.clone();

                // Prefer a witness within the slack target; exact-capable
                // strategies can be re-asked with the tighter bound.
                let mut witness = side.witness.clone();
                if side.exact {
                    if side.lower >= cap {
                        witness = None;
                    } else if witness
                        .as_ref()
                        .map(|w| w.value > upper_target)
                        .unwrap_or(true)
                    {
                        witness = tau.delta_witness(
                            mu,
                            &p_u,
                            &report.budget,
                            i,
                            &upper_target.clone().min(cap.clone()),
                        );
                    }
                }

                match witness {
                    None => {
                        // Dead side, or a black-box side never elicited at
                        // this resolution: park the full cylinder mass.
                        if side.lower < cap {
                            unwitnessed.push(child.clone());
                            approximate = true;
                        }
                        next.insert(child, cap);
                    }
                    Some(w) => {
                        let gap = w.value.clone() - side.lower.clone();
                        if gap > target {
                            approximate = true;
                            achieved_slack = Some(match &achieved_slack {
                                Some(a) => a.clone().max(gap.clone()),
                                None => gap.clone(),
                            });
                        }
                        let p_child = p_u.with_pending(w.split.clone()).apply_side(SideMove::pick(i));
                        debug_assert_eq!(
                            tau.side(mu, &p_u.with_pending(w.split.clone()))
                                .map(|s| s.index),
                            Some(i),
                            "witness not answered with its side"
                        );
                        tree.insert_with_ancestors(&child);
                        positions.insert(child.clone(), p_child);
                        next.insert(child, w.value);
                    }
                }
            }
        }
        levels.push(next);
    }

    Ok(TreeWitness {
        format: CERTIFICATE_FORMAT,
        stake: stake.clone(),
        slack: slack.clone(),
        depth,
        levels,
        tree,
        positions,
        approximate,
        achieved_slack,
        unwitnessed,
    })
}

/// Audit outcome for a certificate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificateAudit {
    pub failures: Vec<String>,
}

impl CertificateAudit {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, cond: bool, msg: impl FnOnce() -> String) {
        if !cond {
            self.failures.push(msg());
        }
    }
}

/// Checks a player-I witness: the scaled-measure invariants, the root above
/// the stake, the frontier identities, and (when a payoff is given) that the
/// support frontier avoids it.
pub fn verify_mass_witness(
    w: &MassWitness,
    mu: &DyadicMeasure,
    payoff: Option<&SetExpr>,
) -> CertificateAudit {
    let mut audit = CertificateAudit::default();
    let report = w.scaled.validate(mu, w.depth);
    audit.check(report.is_valid(), || {
        format!("scaled measure invalid: {:?}", report.violations)
    });
    let root = w.scaled.root_mass();
    audit.check(root > w.stake, || {
        format!("root mass {root} does not exceed the stake {}", w.stake)
    });
    // Frontier identity at every level: the level masses return the root.
    for n in 0..=w.depth {
        let level_sum: Rational = Node::all_at_depth(n)
            .iter()
            .map(|t| w.scaled.mass_at(mu, t))
            .sum();
        audit.check(level_sum == root, || {
            format!("level {n} mass {level_sum} differs from the root mass {root}")
        });
    }
    if let Some(a) = payoff {
        for t in w.scaled.support_at_depth(mu, w.depth) {
            let v = a.verdict(&t).region;
            audit.check(v != Region::Inside, || {
                format!("support node {t} lies inside the payoff")
            });
        }
    }
    audit
}

/// Checks a player-II witness: the per-level bound
/// `sum of level masses <= stake + (2^n - 1)/2^n * slack`, the off-tree
/// saturation, the complement frontier bound, and that every recorded
/// position replays legally (and consistently with the strategy, when
/// provided), nests along the tree, and ends at its node.
pub fn verify_tree_witness(
    w: &TreeWitness,
    mu: &DyadicMeasure,
    tau: Option<&dyn SideStrategy>,
) -> CertificateAudit {
    let mut audit = CertificateAudit::default();
    for (n, level) in w.levels.iter().enumerate() {
        audit.check(level.len() == 1 << n, || {
            format!("level {n} has {} entries, expected {}", level.len(), 1 << n)
        });
        let sum: Rational = level.values().cloned().sum();
        let pow = Rational::half_pow(n as u32);
        let bound = w.stake.clone() + (Rational::one() - pow) * w.slack.clone();
        audit.check(sum <= bound, || {
            format!("level {n} mass {sum} exceeds the bound {bound}")
        });
        let mut complement = Rational::zero();
        for (u, m_u) in level {
            let cap = mu.cylinder_mass(u);
            audit.check(!m_u.is_negative() && *m_u <= cap, || {
                format!("mass {m_u} at {u} outside [0, {cap}]")
            });
            let in_tree = w.tree.contains(u);
            audit.check(in_tree == (*m_u < cap), || {
                format!("tree membership of {u} disagrees with its mass")
            });
            if !in_tree {
                complement += cap;
            }
        }
        audit.check(
            complement <= w.stake.clone() + w.slack.clone(),
            || format!("complement frontier mass at level {n} exceeds stake + slack"),
        );
    }
    for u in w.tree.iter() {
        let p = match w.positions.get(u) {
            Some(p) => p,
            None => {
                audit
                    .failures
                    .push(format!("tree node {u} has no recorded position"));
                continue;
            }
        };
        audit.check(p.node() == *u, || {
            format!("position for {u} ends at {}", p.node())
        });
        if let Some(parent) = u.parent() {
            if let Some(pp) = w.positions.get(&parent) {
                audit.check(pp.is_prefix_of(p), || {
                    format!("position for {parent} is not a prefix of the one for {u}")
                });
            }
        }
        // Replay every round through the rules (and the strategy).
        let mut replay = Position::empty(p.variant(), p.stake().clone());
        for (k, round) in p.rounds().iter().enumerate() {
            if let Err(v) = validate_split(mu, &replay, &round.split) {
                audit
                    .failures
                    .push(format!("position for {u}, round {k}: illegal split: {v}"));
                break;
            }
            let pending = replay.with_pending(round.split.clone());
            if let Err(v) = validate_side(mu, &pending, &round.side) {
                audit
                    .failures
                    .push(format!("position for {u}, round {k}: illegal side: {v}"));
                break;
            }
            if let Some(t) = tau {
                let answer = t.side(mu, &pending).map(|s| s.index);
                audit.check(answer == Some(round.side.index), || {
                    format!(
                        "position for {u}, round {k}: strategy answers {answer:?}, recorded {}",
                        round.side.index
                    )
                });
            }
            replay = pending.apply_side(round.side.clone());
        }
    }
    audit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::node;
    use crate::rational::rat;
    use crate::sets::{ClopenSet, ClosedTreeKind};
    use crate::strategy::{ClosedSetSplitter, CoverAvoider, ScaledMeasurePlayer};

    #[test]
    fn closed_set_player_induces_witness() {
        let mu = DyadicMeasure::fair();
        let sigma = ClosedSetSplitter::new(
            &mu,
            ClosedTreeKind::FromClopen {
                set: ClopenSet::cylinder(node("0")),
            },
            rat(1, 4),
            rat(1, 4),
        )
        .unwrap();
        let w = extract_scaled_measure(&sigma, &mu, &rat(1, 4), 4, Variant::Plain).unwrap();
        assert_eq!(w.scaled.root_mass(), rat(2, 5));
        // Support stays inside the 0-cylinder.
        for t in w.scaled.support_at_depth(&mu, 4) {
            assert_eq!(t.bit(0), 0);
        }
        let payoff = SetExpr::clopen(ClopenSet::cylinder(node("0"))).complement();
        let audit = verify_mass_witness(&w, &mu, Some(&payoff));
        assert!(audit.ok(), "{:?}", audit.failures);
    }

    #[test]
    fn point_mass_concentration() {
        // Under the point mass at 000..., concentrating everything on the
        // leftmost branch is legal and the support is that branch.
        let mu = DyadicMeasure::point_mass(crate::measure::Branch::constant(0));
        let mut map = BTreeMap::new();
        map.insert(Node::root(), rat(1, 2));
        let scaled = ScaledMeasure::from_map(map).unwrap();
        let sigma = ScaledMeasurePlayer { scaled };
        let w = extract_scaled_measure(&sigma, &mu, &rat(1, 4), 5, Variant::Plain).unwrap();
        assert_eq!(w.scaled.root_mass(), rat(1, 2));
        let support = w.scaled.support_at_depth(&mu, 5);
        assert_eq!(support, vec![node("00000")]);
        assert_eq!(w.scaled.mass_at(&mu, &node("00000")), rat(1, 2));
        assert!(verify_mass_witness(&w, &mu, None).ok());
    }

    #[test]
    fn cover_avoider_tree_witness_bounds() {
        let mu = DyadicMeasure::fair();
        let tau = CoverAvoider::new(&mu, ClopenSet::cylinder(node("00")), rat(1, 4)).unwrap();
        let w = extract_tree(&tau, &mu, &rat(1, 4), &rat(1, 4), 4, 8).unwrap();
        assert!(!w.approximate);
        let audit = verify_tree_witness(&w, &mu, Some(&tau));
        assert!(audit.ok(), "{:?}", audit.failures);
        // Complement frontier mass stays below stake + slack = 1/2.
        for n in 0..=4 {
            let comp: Rational = w.levels[n]
                .iter()
                .filter(|(u, _)| !w.tree.contains(u))
                .map(|(u, _)| mu.cylinder_mass(u))
                .sum();
            assert!(comp <= rat(1, 2), "level {n}: complement {comp}");
        }
    }

    #[test]
    fn empty_cover_keeps_full_tree() {
        let mu = DyadicMeasure::fair();
        let tau = CoverAvoider::new(&mu, ClopenSet::empty(), rat(0, 1)).unwrap();
        let w = extract_tree(&tau, &mu, &rat(0, 1), &rat(1, 8), 3, 8).unwrap();
        let audit = verify_tree_witness(&w, &mu, Some(&tau));
        assert!(audit.ok(), "{:?}", audit.failures);
        // Every node is in the tree: the complement mass is zero.
        for n in 0..=3 {
            for u in Node::all_at_depth(n) {
                assert!(w.tree.contains(&u), "{u} missing");
            }
        }
    }

    #[test]
    fn certificates_serialize() {
        let mu = DyadicMeasure::fair();
        let tau = CoverAvoider::new(&mu, ClopenSet::cylinder(node("00")), rat(1, 4)).unwrap();
        let w = extract_tree(&tau, &mu, &rat(1, 4), &rat(1, 4), 3, 8).unwrap();
        let cert = Certificate::TreeWitness(w);
        let json = serde_json::to_string(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cert);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
