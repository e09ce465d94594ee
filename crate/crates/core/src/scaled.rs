//! Sub-mass assignments on the dyadic tree.
//!
//! A [`ScaledMeasure`] maps nodes to rational masses with a positive root
//! mass, node-wise domination by the ambient measure, and exact additivity
//! over children. It is stored as an explicit map on a finite prefix-closed
//! region; below the explicit leaves every node splits its mass
//! proportionally to the ambient measure, which preserves all three
//! invariants and keeps the mass-to-measure ratio constant along each tail.
//! That constancy is what makes the pruning operation exact: every minimal
//! floor violation already shows up inside the explicit region.

use crate::measure::DyadicMeasure;
use crate::node::Node;
use crate::rational::Rational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledMeasure {
    masses: BTreeMap<Node, Rational>,
}

/// One invariant failure found by [`ScaledMeasure::validate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScaledMeasureViolation {
    /// The root mass is not strictly positive.
    RootNotPositive { mass: Rational },
    /// `M(t)` exceeds the cylinder mass (or is negative).
    Domination { node: Node, mass: Rational, cap: Rational },
    /// `M(t) != M(t0) + M(t1)`.
    Additivity {
        node: Node,
        mass: Rational,
        children_sum: Rational,
    },
}

/// Validation outcome; at most one violation is reported per invariant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<ScaledMeasureViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Error from [`ScaledMeasure::prune`].
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PruneError {
    #[error("tolerance {eps} must be strictly between 0 and the root mass {root}")]
    BadTolerance { eps: Rational, root: Rational },
}

/// Error from [`ScaledMeasure::from_map`].
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RegionError {
    #[error("explicit region is missing the root")]
    MissingRoot,
    #[error("node {0} is present without its parent")]
    MissingParent(Node),
    #[error("node {0} has exactly one explicit child")]
    HalfSplit(Node),
}

impl ScaledMeasure {
    /// The ambient measure itself, scaled to the given total root mass.
    pub fn of_measure(total: Rational) -> Self {
        let mut masses = BTreeMap::new();
        masses.insert(Node::root(), total);
        ScaledMeasure { masses }
    }

    /// Builds from an explicit node-to-mass map. The map's keys must be
    /// prefix-closed and every non-leaf must carry both children.
    pub fn from_map(masses: BTreeMap<Node, Rational>) -> Result<Self, RegionError> {
        if !masses.contains_key(&Node::root()) {
            return Err(RegionError::MissingRoot);
        }
        for t in masses.keys() {
            if let Some(p) = t.parent() {
                if !masses.contains_key(&p) {
                    return Err(RegionError::MissingParent(t.clone()));
                }
            }
        }
        for t in masses.keys() {
            let c0 = masses.contains_key(&t.child(0));
            let c1 = masses.contains_key(&t.child(1));
            if c0 != c1 {
                return Err(RegionError::HalfSplit(t.clone()));
            }
        }
        Ok(ScaledMeasure { masses })
    }

    pub fn root_mass(&self) -> Rational {
        self.masses[&Node::root()].clone()
    }

    /// Depth of the deepest explicit node.
    pub fn explicit_depth(&self) -> usize {
        self.masses.keys().map(Node::len).max().unwrap_or(0)
    }

    pub fn explicit(&self) -> &BTreeMap<Node, Rational> {
        &self.masses
    }

    fn is_explicit_leaf(&self, t: &Node) -> bool {
        self.masses.contains_key(t) && !self.masses.contains_key(&t.child(0))
    }

    /// The mass at `t`: the tabulated value inside the explicit region,
    /// below it the leaf mass scaled by the conditional cylinder mass.
    pub fn mass_at(&self, mu: &DyadicMeasure, t: &Node) -> Rational {
        if let Some(m) = self.masses.get(t) {
            return m.clone();
        }
        // Deepest explicit ancestor; it is a leaf of the region.
        let mut anc = t.clone();
        loop {
            anc = match anc.parent() {
                Some(p) => p,
                None => return Rational::zero(),
            };
            if let Some(m) = self.masses.get(&anc) {
                if m.is_zero() {
                    return Rational::zero();
                }
                let denom = mu.cylinder_mass(&anc);
                if denom.is_zero() {
                    return Rational::zero();
                }
                return m.clone() * mu.cylinder_mass(t) / denom;
            }
        }
    }

    /// The masses the measure assigns to the two children of `t`.
    pub fn split_at(&self, mu: &DyadicMeasure, t: &Node) -> (Rational, Rational) {
        (
            self.mass_at(mu, &t.child(0)),
            self.mass_at(mu, &t.child(1)),
        )
    }

    /// Support nodes (positive mass) of exactly the given depth.
    pub fn support_at_depth(&self, mu: &DyadicMeasure, depth: usize) -> Vec<Node> {
        let mut out = Vec::new();
        let mut stack = vec![Node::root()];
        while let Some(t) = stack.pop() {
            if self.mass_at(mu, &t).is_zero() {
                continue;
            }
            if t.len() == depth {
                out.push(t);
            } else {
                stack.push(t.child(1));
                stack.push(t.child(0));
            }
        }
        out.sort();
        out
    }

    /// Checks the three invariants at every node of depth <= `depth`,
    /// reporting the first violating node per invariant.
    pub fn validate(&self, mu: &DyadicMeasure, depth: usize) -> ValidationReport {
        let mut violations = Vec::new();
        let root = self.root_mass();
        if !root.is_positive() {
            violations.push(ScaledMeasureViolation::RootNotPositive { mass: root });
        }
        let mut domination = None;
        let mut additivity = None;
        'outer: for d in 0..=depth {
            for t in Node::all_at_depth(d) {
                let m = self.mass_at(mu, &t);
                if domination.is_none() {
                    let cap = mu.cylinder_mass(&t);
                    if m.is_negative() || m > cap {
                        domination = Some(ScaledMeasureViolation::Domination {
                            node: t.clone(),
                            mass: m.clone(),
                            cap,
                        });
                    }
                }
                if additivity.is_none() && d < depth {
                    let (m0, m1) = self.split_at(mu, &t);
                    let sum = m0 + m1;
                    if sum != m {
                        additivity = Some(ScaledMeasureViolation::Additivity {
                            node: t.clone(),
                            mass: m,
                            children_sum: sum,
                        });
                    }
                }
                if domination.is_some() && additivity.is_some() {
                    break 'outer;
                }
            }
        }
        violations.extend(domination);
        violations.extend(additivity);
        ValidationReport { violations }
    }

    /// Removes the mass sitting on nodes whose mass-to-measure ratio has
    /// dropped below `eps`, subtracting each removed node's mass from all of
    /// its ancestors. The removed nodes form the antichain of minimal floor
    /// violations of depth <= `depth`; the root loses strictly less than
    /// `eps`, and every surviving node keeps mass at least `eps` times its
    /// cylinder mass.
    pub fn prune(
        &self,
        mu: &DyadicMeasure,
        eps: &Rational,
        depth: usize,
    ) -> Result<ScaledMeasure, PruneError> {
        let root = self.root_mass();
        if !eps.is_positive() || *eps >= root {
            return Err(PruneError::BadTolerance {
                eps: eps.clone(),
                root,
            });
        }

        // Collect the antichain of minimal violating nodes, walking only as
        // deep as the explicit region: below an explicit leaf the ratio is
        // constant, so no new violations appear there.
        let mut antichain = Vec::new();
        let mut stack = vec![Node::root()];
        while let Some(t) = stack.pop() {
            let m = self.mass_at(mu, &t);
            let floor = eps.clone() * mu.cylinder_mass(&t);
            if m < floor {
                antichain.push(t);
            } else if t.len() < depth && !self.is_explicit_leaf(&t) && self.masses.contains_key(&t)
            {
                stack.push(t.child(0));
                stack.push(t.child(1));
            }
        }

        let mut masses = self.masses.clone();
        for a in &antichain {
            let removed = self.mass_at(mu, a);
            // Zero the node, drop everything below it.
            masses.insert(a.clone(), Rational::zero());
            let below: Vec<Node> = masses
                .keys()
                .filter(|k| a.is_prefix_of(k) && **k != *a)
                .cloned()
                .collect();
            for k in below {
                masses.remove(&k);
            }
            if removed.is_zero() {
                continue;
            }
            let mut anc = a.clone();
            while let Some(p) = anc.parent() {
                let entry = masses.get_mut(&p).expect("prefix-closed region");
                *entry = entry.clone() - removed.clone();
                anc = p;
            }
        }
        // Removing a node's children may leave a half-split region; the
        // zeroed antichain nodes became leaves, which is consistent.
        Ok(ScaledMeasure { masses })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::node;
    use crate::rational::rat;

    fn fair() -> DyadicMeasure {
        DyadicMeasure::fair()
    }

    #[test]
    fn measure_as_scaled_measure_is_valid() {
        let m = ScaledMeasure::of_measure(Rational::one());
        assert!(m.validate(&fair(), 5).is_valid());
        assert_eq!(m.mass_at(&fair(), &node("010")), rat(1, 8));
    }

    #[test]
    fn additivity_violation_reported_at_root() {
        let mut map = BTreeMap::new();
        map.insert(Node::root(), rat(1, 1));
        map.insert(node("0"), rat(1, 1));
        map.insert(node("1"), rat(1, 1));
        let m = ScaledMeasure::from_map(map).unwrap();
        let report = m.validate(&fair(), 1);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            ScaledMeasureViolation::Additivity { node, .. } if node.is_root()
        )));
    }

    #[test]
    fn domination_violation_reported() {
        let mut map = BTreeMap::new();
        map.insert(Node::root(), rat(1, 1));
        map.insert(node("0"), rat(3, 4));
        map.insert(node("1"), rat(1, 4));
        let m = ScaledMeasure::from_map(map).unwrap();
        let report = m.validate(&fair(), 1);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            &report.violations[0],
            ScaledMeasureViolation::Domination { node: n, .. } if *n == node("0")
        ));
    }

    #[test]
    fn prune_keeps_clean_measure_unchanged() {
        let m = ScaledMeasure::of_measure(Rational::one());
        let pruned = m.prune(&fair(), &rat(1, 2), 6).unwrap();
        assert_eq!(pruned.root_mass(), Rational::one());
        assert!(pruned.validate(&fair(), 6).is_valid());
    }

    #[test]
    fn prune_drops_zero_ratio_side() {
        let mut map = BTreeMap::new();
        map.insert(Node::root(), rat(1, 2));
        map.insert(node("0"), rat(1, 2));
        map.insert(node("1"), rat(0, 1));
        let m = ScaledMeasure::from_map(map).unwrap();
        let pruned = m.prune(&fair(), &rat(1, 4), 1).unwrap();
        assert_eq!(pruned.root_mass(), rat(1, 2));
        assert_eq!(pruned.mass_at(&fair(), &node("1")), Rational::zero());
        assert_eq!(pruned.mass_at(&fair(), &node("0")), rat(1, 2));
    }

    #[test]
    fn prune_rejects_oversized_tolerance() {
        let m = ScaledMeasure::of_measure(rat(1, 2));
        assert!(m.prune(&fair(), &rat(1, 2), 3).is_err());
        assert!(m.prune(&fair(), &rat(3, 4), 3).is_err());
    }

    #[test]
    fn region_structure_enforced() {
        let mut map = BTreeMap::new();
        map.insert(Node::root(), rat(1, 1));
        map.insert(node("0"), rat(1, 2));
        assert!(matches!(
            ScaledMeasure::from_map(map),
            Err(RegionError::HalfSplit(_))
        ));
    }
}
