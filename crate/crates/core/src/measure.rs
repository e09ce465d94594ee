//! Borel probability measures on the space of infinite binary sequences,
//! given by consistent rational node weights on the dyadic tree.
//!
//! A [`DyadicMeasure`] assigns to every node `t` the exact mass of its
//! cylinder. The constructors cover the finitely-describable measures this
//! crate works with: the fair coin, biased coins, finite atom lists on
//! eventually-periodic branches, explicit weight tables extended by a
//! conditional rule, and products of two measures on the interleaved tree of
//! the paired game.

use crate::node::Node;
use crate::rational::Rational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// An infinite branch that is finitely describable: a prefix followed by a
/// repeating cycle. `prefix = "01"`, `cycle = "1"` is the branch 0111...
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub prefix: Node,
    pub cycle: Node,
}

impl Branch {
    pub fn constant(bit: u8) -> Self {
        Branch {
            prefix: Node::root(),
            cycle: Node::from_bits(&[bit]),
        }
    }

    /// The bit of the branch at coordinate `i`.
    pub fn bit(&self, i: usize) -> u8 {
        assert!(!self.cycle.is_empty(), "branch cycle must be nonempty");
        if i < self.prefix.len() {
            self.prefix.bit(i)
        } else {
            self.cycle.bit((i - self.prefix.len()) % self.cycle.len())
        }
    }

    /// True when the branch passes through the node.
    pub fn passes_through(&self, t: &Node) -> bool {
        (0..t.len()).all(|i| self.bit(i) == t.bit(i))
    }
}

/// Rule for extending an explicit weight table below its last tabulated
/// level: split each node's mass by the conditional law of a simple measure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailSplit {
    Fair,
    Bernoulli { p: Rational },
}

/// A Borel probability measure presented by exact node weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasureSpec {
    /// The uniform product measure: every node of depth n has mass 2^-n.
    Fair,
    /// Biased coin: child 1 receives fraction `p` of the parent mass.
    Bernoulli { p: Rational },
    /// A purely atomic measure carried by finitely many branches.
    Atoms { atoms: Vec<(Branch, Rational)> },
    /// Explicit weights for every node of depth <= `depth`, extended below
    /// by a conditional split rule.
    Table {
        depth: usize,
        weights: BTreeMap<Node, Rational>,
        below: TailSplit,
    },
    /// Product of two measures on the interleaved pair tree; see
    /// [`Node::interleave`].
    Product {
        first: Box<MeasureSpec>,
        second: Box<MeasureSpec>,
    },
}

/// A validated measure, cheap to clone and share.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DyadicMeasure {
    spec: Arc<MeasureSpec>,
}

impl<'de> Deserialize<'de> for DyadicMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let spec = MeasureSpec::deserialize(deserializer)?;
        DyadicMeasure::new(spec).map_err(serde::de::Error::custom)
    }
}

/// Validation failure when constructing a measure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("total mass is {0}, expected 1")]
    TotalMass(Rational),
    #[error("negative weight at node {0}")]
    Negative(Node),
    #[error("bernoulli parameter {0} outside [0, 1]")]
    BadParameter(Rational),
    #[error("weight table: {0}")]
    BadTable(String),
}

impl DyadicMeasure {
    pub fn new(spec: MeasureSpec) -> Result<Self, MeasureError> {
        match &spec {
            MeasureSpec::Fair => {}
            MeasureSpec::Bernoulli { p } => {
                if !p.is_unit() {
                    return Err(MeasureError::BadParameter(p.clone()));
                }
            }
            MeasureSpec::Atoms { atoms } => {
                for (branch, mass) in atoms {
                    if branch.cycle.is_empty() {
                        return Err(MeasureError::BadTable(
                            "atom branch with empty cycle".into(),
                        ));
                    }
                    if mass.is_negative() {
                        return Err(MeasureError::Negative(branch.prefix.clone()));
                    }
                }
                let total: Rational = atoms.iter().map(|(_, m)| m.clone()).sum();
                if total != Rational::one() {
                    return Err(MeasureError::TotalMass(total));
                }
            }
            MeasureSpec::Table {
                depth,
                weights,
                below,
            } => {
                if let TailSplit::Bernoulli { p } = below {
                    if !p.is_unit() {
                        return Err(MeasureError::BadParameter(p.clone()));
                    }
                }
                let root = weights
                    .get(&Node::root())
                    .ok_or_else(|| MeasureError::BadTable("missing root weight".into()))?;
                if *root != Rational::one() {
                    return Err(MeasureError::TotalMass(root.clone()));
                }
                for d in 0..*depth {
                    for t in Node::all_at_depth(d) {
                        let w = weights
                            .get(&t)
                            .ok_or_else(|| MeasureError::BadTable(format!("missing node {t}")))?;
                        if w.is_negative() {
                            return Err(MeasureError::Negative(t.clone()));
                        }
                        let w0 = weights.get(&t.child(0)).ok_or_else(|| {
                            MeasureError::BadTable(format!("missing node {}", t.child(0)))
                        })?;
                        let w1 = weights.get(&t.child(1)).ok_or_else(|| {
                            MeasureError::BadTable(format!("missing node {}", t.child(1)))
                        })?;
                        if w0.is_negative() || w1.is_negative() {
                            return Err(MeasureError::Negative(t));
                        }
                        if &(w0 + w1) != w {
                            return Err(MeasureError::BadTable(format!(
                                "weights at {t} do not add up: {w} != {w0} + {w1}"
                            )));
                        }
                    }
                }
            }
            MeasureSpec::Product { first, second } => {
                DyadicMeasure::new((**first).clone())?;
                DyadicMeasure::new((**second).clone())?;
            }
        }
        Ok(DyadicMeasure {
            spec: Arc::new(spec),
        })
    }

    pub fn fair() -> Self {
        DyadicMeasure::new(MeasureSpec::Fair).unwrap()
    }

    pub fn bernoulli(p: Rational) -> Self {
        DyadicMeasure::new(MeasureSpec::Bernoulli { p }).unwrap()
    }

    pub fn point_mass(branch: Branch) -> Self {
        DyadicMeasure::new(MeasureSpec::Atoms {
            atoms: vec![(branch, Rational::one())],
        })
        .unwrap()
    }

    pub fn product(first: &DyadicMeasure, second: &DyadicMeasure) -> Self {
        DyadicMeasure::new(MeasureSpec::Product {
            first: Box::new((*first.spec).clone()),
            second: Box::new((*second.spec).clone()),
        })
        .unwrap()
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    /// True when the measure lives on the interleaved pair tree.
    pub fn is_product(&self) -> bool {
        matches!(*self.spec, MeasureSpec::Product { .. })
    }

    /// The coordinate measures of a product.
    pub fn factors(&self) -> Option<(DyadicMeasure, DyadicMeasure)> {
        match &*self.spec {
            MeasureSpec::Product { first, second } => Some((
                DyadicMeasure::new((**first).clone()).unwrap(),
                DyadicMeasure::new((**second).clone()).unwrap(),
            )),
            _ => None,
        }
    }

    /// The exact mass of the cylinder at `t`. Additive over children and 1
    /// at the root.
    pub fn cylinder_mass(&self, t: &Node) -> Rational {
        spec_mass(&self.spec, t)
    }
}

fn spec_mass(spec: &MeasureSpec, t: &Node) -> Rational {
    match spec {
        MeasureSpec::Fair => Rational::half_pow(t.len() as u32),
        MeasureSpec::Bernoulli { p } => {
            let q = Rational::one() - p.clone();
            let mut mass = Rational::one();
            for &b in t.bits() {
                mass = mass * if b == 1 { p.clone() } else { q.clone() };
                if mass.is_zero() {
                    return mass;
                }
            }
            mass
        }
        MeasureSpec::Atoms { atoms } => atoms
            .iter()
            .filter(|(branch, _)| branch.passes_through(t))
            .map(|(_, m)| m.clone())
            .sum(),
        MeasureSpec::Table {
            depth,
            weights,
            below,
        } => {
            if t.len() <= *depth {
                weights.get(t).cloned().unwrap_or_else(Rational::zero)
            } else {
                let head = t.truncated(*depth);
                let base = weights.get(&head).cloned().unwrap_or_else(Rational::zero);
                if base.is_zero() {
                    return Rational::zero();
                }
                let mut mass = base;
                for i in *depth..t.len() {
                    let factor = match below {
                        TailSplit::Fair => Rational::new(1, 2),
                        TailSplit::Bernoulli { p } => {
                            if t.bit(i) == 1 {
                                p.clone()
                            } else {
                                Rational::one() - p.clone()
                            }
                        }
                    };
                    mass = mass * factor;
                }
                mass
            }
        }
        MeasureSpec::Product { first, second } => {
            let (u, v) = split_pair_prefix(t);
            spec_mass(first, &u) * spec_mass(second, &v)
        }
    }
}

/// Splits a (possibly odd-length) interleaved node into coordinate prefixes:
/// for odd length the first coordinate has one more bit than the second.
fn split_pair_prefix(t: &Node) -> (Node, Node) {
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (i, &b) in t.bits().iter().enumerate() {
        if i % 2 == 0 {
            first.push(b);
        } else {
            second.push(b);
        }
    }
    (Node::from_bits(&first), Node::from_bits(&second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::node;
    use crate::rational::rat;

    #[test]
    fn fair_cylinders() {
        let mu = DyadicMeasure::fair();
        assert_eq!(mu.cylinder_mass(&Node::root()), Rational::one());
        assert_eq!(mu.cylinder_mass(&node("01")), rat(1, 4));
    }

    #[test]
    fn bernoulli_child_one_gets_p() {
        let mu = DyadicMeasure::bernoulli(rat(1, 3));
        assert_eq!(mu.cylinder_mass(&node("11")), rat(1, 9));
        assert_eq!(mu.cylinder_mass(&node("0")), rat(2, 3));
    }

    #[test]
    fn single_atom_on_zeros() {
        let mu = DyadicMeasure::point_mass(Branch::constant(0));
        assert_eq!(mu.cylinder_mass(&node("00")), Rational::one());
        assert_eq!(mu.cylinder_mass(&node("01")), Rational::zero());
    }

    #[test]
    fn table_measure_with_tail() {
        let mut weights = BTreeMap::new();
        weights.insert(Node::root(), rat(1, 1));
        weights.insert(node("0"), rat(1, 3));
        weights.insert(node("1"), rat(2, 3));
        let mu = DyadicMeasure::new(MeasureSpec::Table {
            depth: 1,
            weights,
            below: TailSplit::Fair,
        })
        .unwrap();
        assert_eq!(mu.cylinder_mass(&node("0")), rat(1, 3));
        assert_eq!(mu.cylinder_mass(&node("01")), rat(1, 6));
    }

    #[test]
    fn table_must_be_additive() {
        let mut weights = BTreeMap::new();
        weights.insert(Node::root(), rat(1, 1));
        weights.insert(node("0"), rat(1, 2));
        weights.insert(node("1"), rat(1, 3));
        let err = DyadicMeasure::new(MeasureSpec::Table {
            depth: 1,
            weights,
            below: TailSplit::Fair,
        });
        assert!(matches!(err, Err(MeasureError::BadTable(_))));
    }

    #[test]
    fn product_interleaved_masses() {
        let mu = DyadicMeasure::product(&DyadicMeasure::fair(), &DyadicMeasure::bernoulli(rat(1, 3)));
        // Pair node (0, 1): fair's N_0 times bernoulli's N_1.
        let paired = Node::interleave(&node("0"), &node("1"));
        assert_eq!(mu.cylinder_mass(&paired), rat(1, 2) * rat(1, 3));
        // Odd prefix: first coordinate has moved, second has not.
        assert_eq!(mu.cylinder_mass(&node("0")), rat(1, 2));
    }

    /// Additivity of every constructor at every node up to depth 12 would be
    /// 8191 nodes per measure; depth 8 exercises the same code paths.
    #[test]
    fn weights_are_additive() {
        let atoms = DyadicMeasure::new(MeasureSpec::Atoms {
            atoms: vec![
                (Branch::constant(0), rat(1, 3)),
                (
                    Branch {
                        prefix: node("01"),
                        cycle: node("10"),
                    },
                    rat(2, 3),
                ),
            ],
        })
        .unwrap();
        let measures = [
            DyadicMeasure::fair(),
            DyadicMeasure::bernoulli(rat(2, 7)),
            atoms,
            DyadicMeasure::product(&DyadicMeasure::fair(), &DyadicMeasure::fair()),
        ];
        for mu in &measures {
            assert_eq!(mu.cylinder_mass(&Node::root()), Rational::one());
            for depth in 0..8 {
                for t in Node::all_at_depth(depth) {
                    let w = mu.cylinder_mass(&t);
                    assert!(!w.is_negative());
                    assert_eq!(
                        w,
                        mu.cylinder_mass(&t.child(0)) + mu.cylinder_mass(&t.child(1)),
                        "additivity at {t}"
                    );
                }
            }
        }
    }
}
