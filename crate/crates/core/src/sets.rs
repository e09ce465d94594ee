//! Payoff sets and exact set-measure computations.
//!
//! The workhorse is [`ClopenSet`]: a finite union of cylinders whose measure
//! restricted to any cylinder is an exact finite sum. [`SetExpr`] composes
//! clopen pieces, pruned closed trees, truncatable open unions, and
//! limsup-style families into payoff descriptions; every expression supports
//! a three-valued verdict per node (the whole cylinder is inside / outside /
//! split) which drives both the referee's outcome decisions and the
//! finite-depth enclosures of inner and outer measure.

use crate::measure::DyadicMeasure;
use crate::node::Node;
use crate::rational::Rational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Verdict for a cylinder against a set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// The cylinder is contained in the set.
    Inside,
    /// The cylinder is disjoint from the set.
    Outside,
    /// The cylinder meets both the set and its complement (or is undecided
    /// at this depth).
    Mixed,
}

impl Region {
    fn complement(self) -> Region {
        match self {
            Region::Inside => Region::Outside,
            Region::Outside => Region::Inside,
            Region::Mixed => Region::Mixed,
        }
    }
}

/// A finite union of cylinders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "repr", rename_all = "kebab-case")]
pub enum ClopenSet {
    /// Union of the cylinders at a pairwise prefix-incomparable node list.
    Cylinders { nodes: Vec<Node> },
    /// All sequences carrying the given bits at the given coordinates.
    /// Equals a union of 2^k cylinders but supports closed-form masses
    /// under product measures.
    FixedBits { bits: Vec<(usize, u8)> },
}

impl ClopenSet {
    pub fn empty() -> Self {
        ClopenSet::Cylinders { nodes: Vec::new() }
    }

    pub fn full() -> Self {
        ClopenSet::Cylinders {
            nodes: vec![Node::root()],
        }
    }

    /// Builds an antichain from arbitrary nodes: drops nodes covered by a
    /// prefix already in the list.
    pub fn from_nodes(mut nodes: Vec<Node>) -> Self {
        nodes.sort();
        let mut antichain: Vec<Node> = Vec::new();
        for n in nodes {
            if !antichain.iter().any(|a| a.is_prefix_of(&n)) {
                antichain.push(n);
            }
        }
        ClopenSet::Cylinders { nodes: antichain }
    }

    /// The single cylinder at `t`.
    pub fn cylinder(t: Node) -> Self {
        ClopenSet::Cylinders { nodes: vec![t] }
    }

    /// The coordinate event `{x : x_i = bit}`.
    pub fn coordinate(i: usize, bit: u8) -> Self {
        ClopenSet::FixedBits {
            bits: vec![(i, bit)],
        }
    }

    pub fn is_empty_set(&self) -> bool {
        match self {
            ClopenSet::Cylinders { nodes } => nodes.is_empty(),
            ClopenSet::FixedBits { bits } => {
                // Contradictory constraints at the same coordinate.
                bits.iter().any(|(i, b)| {
                    bits.iter().any(|(j, c)| i == j && b != c)
                })
            }
        }
    }

    /// Depth at which membership of every cylinder is decided.
    pub fn decision_depth(&self) -> usize {
        match self {
            ClopenSet::Cylinders { nodes } => nodes.iter().map(Node::len).max().unwrap_or(0),
            ClopenSet::FixedBits { bits } => bits.iter().map(|(i, _)| i + 1).max().unwrap_or(0),
        }
    }

    /// Three-valued membership of the cylinder at `t`.
    pub fn region(&self, t: &Node) -> Region {
        match self {
            ClopenSet::Cylinders { .. } => {
                if self.covers(t) {
                    Region::Inside
                } else if self.disjoint_from(t) {
                    Region::Outside
                } else {
                    Region::Mixed
                }
            }
            ClopenSet::FixedBits { bits } => {
                if self.is_empty_set() {
                    return Region::Outside;
                }
                let mut undecided = false;
                for (i, b) in bits {
                    if *i < t.len() {
                        if t.bit(*i) != *b {
                            return Region::Outside;
                        }
                    } else {
                        undecided = true;
                    }
                }
                if undecided {
                    Region::Mixed
                } else {
                    Region::Inside
                }
            }
        }
    }

    /// True when `N_t` is contained in the set.
    pub fn covers(&self, t: &Node) -> bool {
        match self {
            ClopenSet::Cylinders { nodes } => {
                if nodes.iter().any(|a| a.is_prefix_of(t)) {
                    return true;
                }
                let depth = self.decision_depth();
                if t.len() >= depth {
                    return false;
                }
                self.covers(&t.child(0)) && self.covers(&t.child(1))
            }
            ClopenSet::FixedBits { .. } => self.region(t) == Region::Inside,
        }
    }

    /// True when `N_t` is disjoint from the set.
    pub fn disjoint_from(&self, t: &Node) -> bool {
        match self {
            ClopenSet::Cylinders { nodes } => !nodes.iter().any(|a| a.comparable(t)),
            ClopenSet::FixedBits { .. } => self.region(t) == Region::Outside,
        }
    }

    /// Exact mass of the set intersected with the cylinder at `t`.
    pub fn mass_in(&self, mu: &DyadicMeasure, t: &Node) -> Rational {
        match self {
            ClopenSet::Cylinders { nodes } => {
                let mut total = Rational::zero();
                for a in nodes {
                    if a.is_prefix_of(t) {
                        return mu.cylinder_mass(t);
                    }
                    if t.is_prefix_of(a) {
                        total += mu.cylinder_mass(a);
                    }
                }
                total
            }
            ClopenSet::FixedBits { bits } => {
                if self.is_empty_set() {
                    return Rational::zero();
                }
                fixed_bits_mass(mu, t, bits)
            }
        }
    }

    pub fn measure(&self, mu: &DyadicMeasure) -> Rational {
        self.mass_in(mu, &Node::root())
    }

    /// Converts to the antichain representation.
    pub fn to_antichain(&self) -> Vec<Node> {
        match self {
            ClopenSet::Cylinders { nodes } => nodes.clone(),
            ClopenSet::FixedBits { .. } => {
                if self.is_empty_set() {
                    return Vec::new();
                }
                let depth = self.decision_depth();
                let mut out = Vec::new();
                collect_minimal(&|t: &Node| self.region(t), depth, Node::root(), &mut out);
                out
            }
        }
    }

    /// Complement as a clopen set (antichain of the minimal uncovered nodes).
    pub fn complement(&self) -> ClopenSet {
        let depth = self.decision_depth();
        let mut out = Vec::new();
        collect_minimal(
            &|t: &Node| self.region(t).complement(),
            depth,
            Node::root(),
            &mut out,
        );
        ClopenSet::Cylinders { nodes: out }
    }

    pub fn intersect(&self, other: &ClopenSet) -> ClopenSet {
        let depth = self.decision_depth().max(other.decision_depth());
        let mut out = Vec::new();
        collect_minimal(
            &|t: &Node| match (self.region(t), other.region(t)) {
                (Region::Outside, _) | (_, Region::Outside) => Region::Outside,
                (Region::Inside, Region::Inside) => Region::Inside,
                _ => Region::Mixed,
            },
            depth,
            Node::root(),
            &mut out,
        );
        ClopenSet::Cylinders { nodes: out }
    }

    pub fn union(&self, other: &ClopenSet) -> ClopenSet {
        let depth = self.decision_depth().max(other.decision_depth());
        let mut out = Vec::new();
        collect_minimal(
            &|t: &Node| match (self.region(t), other.region(t)) {
                (Region::Inside, _) | (_, Region::Inside) => Region::Inside,
                (Region::Outside, Region::Outside) => Region::Outside,
                _ => Region::Mixed,
            },
            depth,
            Node::root(),
            &mut out,
        );
        ClopenSet::Cylinders { nodes: out }
    }

    /// The product set `self x other` on the interleaved pair tree.
    pub fn product(&self, other: &ClopenSet) -> ClopenSet {
        let d = self.decision_depth().max(other.decision_depth());
        let left: Vec<Node> = expand_to_depth(&self.to_antichain(), d);
        let right: Vec<Node> = expand_to_depth(&other.to_antichain(), d);
        let mut nodes = Vec::with_capacity(left.len() * right.len());
        for u in &left {
            for v in &right {
                nodes.push(Node::interleave(u, v));
            }
        }
        ClopenSet::from_nodes(nodes)
    }
}

/// Expands an antichain so every node has exactly depth `d`.
pub fn expand_to_depth(antichain: &[Node], d: usize) -> Vec<Node> {
    let mut out = Vec::new();
    for a in antichain {
        assert!(a.len() <= d, "antichain deeper than target depth");
        let mut level = vec![a.clone()];
        for _ in a.len()..d {
            level = level
                .into_iter()
                .flat_map(|n| [n.child(0), n.child(1)])
                .collect();
        }
        out.extend(level);
    }
    out
}

/// Collects the minimal nodes where `region` says Inside, descending Mixed
/// nodes down to `depth` (below which every verdict must be decided).
fn collect_minimal(
    region: &dyn Fn(&Node) -> Region,
    depth: usize,
    t: Node,
    out: &mut Vec<Node>,
) {
    match region(&t) {
        Region::Inside => out.push(t),
        Region::Outside => {}
        Region::Mixed => {
            assert!(
                t.len() < depth,
                "verdict still mixed at decision depth {depth} (node {t})"
            );
            collect_minimal(region, depth, t.child(0), out);
            collect_minimal(region, depth, t.child(1), out);
        }
    }
}

/// Closed-form mass `mu(FixedBits /\ N_t)` for product measures; falls back
/// to recursive splitting otherwise.
fn fixed_bits_mass(mu: &DyadicMeasure, t: &Node, bits: &[(usize, u8)]) -> Rational {
    use crate::measure::MeasureSpec;
    let per_coordinate: Option<Box<dyn Fn(u8) -> Rational>> = match mu.spec() {
        MeasureSpec::Fair => Some(Box::new(|_| Rational::new(1, 2))),
        MeasureSpec::Bernoulli { p } => {
            let p = p.clone();
            Some(Box::new(move |b| {
                if b == 1 {
                    p.clone()
                } else {
                    Rational::one() - p.clone()
                }
            }))
        }
        _ => None,
    };
    if let Some(prob) = per_coordinate {
        let mut mass = mu.cylinder_mass(t);
        for (i, b) in bits {
            if mass.is_zero() {
                return mass;
            }
            if *i < t.len() {
                if t.bit(*i) != *b {
                    return Rational::zero();
                }
            } else {
                mass = mass * prob(*b);
            }
        }
        mass
    } else {
        // Exact but exponential in the undecided coordinate span; only used
        // with non-product measures at small depth.
        let max_coord = bits.iter().map(|(i, _)| i + 1).max().unwrap_or(0);
        if t.len() >= max_coord {
            return if bits.iter().all(|(i, b)| t.bit(*i) == *b) {
                mu.cylinder_mass(t)
            } else {
                Rational::zero()
            };
        }
        if bits
            .iter()
            .any(|(i, b)| *i < t.len() && t.bit(*i) != *b)
        {
            return Rational::zero();
        }
        fixed_bits_mass(mu, &t.child(0), bits) + fixed_bits_mass(mu, &t.child(1), bits)
    }
}

/// Decidable membership predicates for pruned trees of closed sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClosedTreeKind {
    /// The full tree; branches form the whole space.
    Full,
    /// The tree of a clopen set (clopen sets are closed); membership means
    /// the node is compatible with the covering antichain.
    FromClopen { set: ClopenSet },
    /// Nodes avoiding the pattern as a contiguous substring, pruned by
    /// continuing with a constant bit.
    ForbidSubstring { pattern: Node },
}

impl ClosedTreeKind {
    /// Pruned-tree membership: true iff some branch of the closed set
    /// passes through `t`.
    pub fn contains(&self, t: &Node) -> bool {
        match self {
            ClosedTreeKind::Full => true,
            ClosedTreeKind::FromClopen { set } => set.region(t) != Region::Outside,
            ClosedTreeKind::ForbidSubstring { pattern } => {
                let p = pattern.bits();
                if p.is_empty() || t.contains_substring(p) {
                    return false;
                }
                // Pruning: some constant-bit continuation stays clean.
                [0u8, 1u8].iter().any(|&b| {
                    let mut ext = t.bits().to_vec();
                    ext.extend(std::iter::repeat(b).take(p.len()));
                    !Node::from_bits(&ext).contains_substring(p)
                })
            }
        }
    }

    /// True when every extension of `t` stays in the tree, i.e. the
    /// cylinder is contained in the branch set.
    pub fn full_below(&self, t: &Node) -> bool {
        match self {
            ClosedTreeKind::Full => true,
            ClosedTreeKind::FromClopen { set } => set.covers(t),
            ClosedTreeKind::ForbidSubstring { .. } => false,
        }
    }

    pub fn region(&self, t: &Node) -> Region {
        if !self.contains(t) {
            Region::Outside
        } else if self.full_below(t) {
            Region::Inside
        } else {
            Region::Mixed
        }
    }

    /// `mu([T] /\ N_t)` when exactly computable at finite depth.
    pub fn exact_mass_in(&self, mu: &DyadicMeasure, t: &Node) -> Option<Rational> {
        match self {
            ClosedTreeKind::Full => Some(mu.cylinder_mass(t)),
            ClosedTreeKind::FromClopen { set } => Some(set.mass_in(mu, t)),
            ClosedTreeKind::ForbidSubstring { .. } => None,
        }
    }
}

/// A payoff set: a recursive tagged expression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetExpr {
    Clopen {
        set: ClopenSet,
    },
    ClosedTree {
        tree: ClosedTreeKind,
    },
    /// An open union of cylinders; `truncated` records that the antichain is
    /// an initial segment of a possibly longer enumeration.
    Open {
        set: ClopenSet,
        truncated: bool,
    },
    /// The set of points lying in infinitely many events of the family,
    /// truncated at `horizon`: intersection over m <= horizon of the unions
    /// of events with index in [m, horizon].
    LimSup {
        family: FamilySpec,
        horizon: usize,
    },
    Union {
        parts: Vec<SetExpr>,
    },
    Intersection {
        parts: Vec<SetExpr>,
    },
    Complement {
        of: Box<SetExpr>,
    },
}

/// An indexed family of clopen events, by explicit list or generator rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilySpec {
    /// `A_i = {x : x_i = bit}`.
    Coordinate { bit: u8 },
    /// Explicit clopen events indexed 0..len.
    Explicit { events: Vec<ClopenSet> },
    /// Every event is the full space.
    Full,
}

impl FamilySpec {
    /// The i-th event, if the family defines it.
    pub fn event(&self, i: usize) -> Option<ClopenSet> {
        match self {
            FamilySpec::Coordinate { bit } => Some(ClopenSet::coordinate(i, *bit)),
            FamilySpec::Explicit { events } => events.get(i).cloned(),
            FamilySpec::Full => Some(ClopenSet::full()),
        }
    }

    /// Number of explicit events; `None` for generator rules.
    pub fn len(&self) -> Option<usize> {
        match self {
            FamilySpec::Explicit { events } => Some(events.len()),
            _ => None,
        }
    }
}

/// Verdict plus propagated truncation provenance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub region: Region,
    pub truncated: bool,
}

/// Finite-depth enclosure of inner and outer measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureBounds {
    pub lower: Rational,
    pub upper: Rational,
    pub truncated: bool,
}

impl SetExpr {
    pub fn clopen(set: ClopenSet) -> Self {
        SetExpr::Clopen { set }
    }

    pub fn complement(self) -> Self {
        SetExpr::Complement { of: Box::new(self) }
    }

    /// Three-valued verdict of the cylinder at `t` against the expression.
    pub fn verdict(&self, t: &Node) -> Verdict {
        match self {
            SetExpr::Clopen { set } => Verdict {
                region: set.region(t),
                truncated: false,
            },
            SetExpr::ClosedTree { tree } => Verdict {
                region: tree.region(t),
                truncated: false,
            },
            SetExpr::Open { set, truncated } => Verdict {
                region: set.region(t),
                truncated: *truncated,
            },
            SetExpr::LimSup { family, horizon } => {
                let mut truncated = true;
                let mut region = Region::Inside;
                for m in 0..=*horizon {
                    // Union of events m..=horizon.
                    let mut union_region = Region::Outside;
                    for i in m..=*horizon {
                        match family.event(i) {
                            None => {
                                truncated = true;
                                continue;
                            }
                            Some(ev) => match ev.region(t) {
                                Region::Inside => {
                                    union_region = Region::Inside;
                                    break;
                                }
                                Region::Mixed => union_region = Region::Mixed,
                                Region::Outside => {}
                            },
                        }
                    }
                    match union_region {
                        Region::Outside => {
                            region = Region::Outside;
                            break;
                        }
                        Region::Mixed => region = Region::Mixed,
                        Region::Inside => {}
                    }
                }
                Verdict { region, truncated }
            }
            SetExpr::Union { parts } => {
                let mut region = Region::Outside;
                let mut truncated = false;
                for p in parts {
                    let v = p.verdict(t);
                    truncated |= v.truncated;
                    match v.region {
                        Region::Inside => {
                            region = Region::Inside;
                            break;
                        }
                        Region::Mixed => region = Region::Mixed,
                        Region::Outside => {}
                    }
                }
                Verdict { region, truncated }
            }
            SetExpr::Intersection { parts } => {
                let mut region = Region::Inside;
                let mut truncated = false;
                for p in parts {
                    let v = p.verdict(t);
                    truncated |= v.truncated;
                    match v.region {
                        Region::Outside => {
                            region = Region::Outside;
                            break;
                        }
                        Region::Mixed => region = Region::Mixed,
                        Region::Inside => {}
                    }
                }
                Verdict { region, truncated }
            }
            SetExpr::Complement { of } => {
                let v = of.verdict(t);
                Verdict {
                    region: v.region.complement(),
                    truncated: v.truncated,
                }
            }
        }
    }

    /// Depth at which every cylinder's verdict is decided, when finite.
    pub fn decision_depth(&self) -> Option<usize> {
        match self {
            SetExpr::Clopen { set } | SetExpr::Open { set, .. } => Some(set.decision_depth()),
            SetExpr::ClosedTree { tree } => match tree {
                ClosedTreeKind::Full => Some(0),
                ClosedTreeKind::FromClopen { set } => Some(set.decision_depth()),
                ClosedTreeKind::ForbidSubstring { .. } => None,
            },
            SetExpr::LimSup { family, horizon } => {
                let mut depth = 0;
                for i in 0..=*horizon {
                    depth = depth.max(family.event(i)?.decision_depth());
                }
                Some(depth)
            }
            SetExpr::Union { parts } | SetExpr::Intersection { parts } => {
                let mut depth = 0;
                for p in parts {
                    depth = depth.max(p.decision_depth()?);
                }
                Some(depth)
            }
            SetExpr::Complement { of } => of.decision_depth(),
        }
    }

    /// If the expression denotes a clopen set, its antichain form.
    pub fn as_clopen(&self) -> Option<ClopenSet> {
        let depth = self.decision_depth()?;
        let mut nodes = Vec::new();
        let mut decided = true;
        collect_minimal_checked(
            &|t: &Node| self.verdict(t).region,
            depth,
            Node::root(),
            &mut nodes,
            &mut decided,
        );
        if decided {
            Some(ClopenSet::Cylinders { nodes })
        } else {
            None
        }
    }

    /// Finite-depth enclosure of the inner and outer measure: `lower` counts
    /// cylinders certainly inside, `upper` additionally counts the split
    /// ones. For a clopen expression decided at depth <= d the two agree.
    pub fn measure_bounds(&self, mu: &DyadicMeasure, depth: usize) -> MeasureBounds {
        let mut bounds = MeasureBounds {
            lower: Rational::zero(),
            upper: Rational::zero(),
            truncated: false,
        };
        self.accumulate_bounds(mu, depth, &Node::root(), &mut bounds);
        bounds
    }

    fn accumulate_bounds(
        &self,
        mu: &DyadicMeasure,
        depth: usize,
        t: &Node,
        bounds: &mut MeasureBounds,
    ) {
        let v = self.verdict(t);
        bounds.truncated |= v.truncated;
        match v.region {
            Region::Inside => {
                let m = mu.cylinder_mass(t);
                bounds.lower += m.clone();
                bounds.upper += m;
            }
            Region::Outside => {}
            Region::Mixed => {
                if t.len() >= depth {
                    bounds.upper += mu.cylinder_mass(t);
                } else {
                    self.accumulate_bounds(mu, depth, &t.child(0), bounds);
                    self.accumulate_bounds(mu, depth, &t.child(1), bounds);
                }
            }
        }
    }
}

fn collect_minimal_checked(
    region: &dyn Fn(&Node) -> Region,
    depth: usize,
    t: Node,
    out: &mut Vec<Node>,
    decided: &mut bool,
) {
    match region(&t) {
        Region::Inside => out.push(t),
        Region::Outside => {}
        Region::Mixed => {
            if t.len() >= depth {
                *decided = false;
                return;
            }
            collect_minimal_checked(region, depth, t.child(0), out, decided);
            collect_minimal_checked(region, depth, t.child(1), out, decided);
        }
    }
}

/// An explicit finite prefix-closed set of nodes: the working representation
/// for extracted certificate trees and the tree surgery of the unfolding
/// pipeline.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitTree {
    nodes: BTreeSet<Node>,
}

impl ExplicitTree {
    pub fn empty() -> Self {
        ExplicitTree {
            nodes: BTreeSet::new(),
        }
    }

    /// The full binary tree to the given depth.
    pub fn full(depth: usize) -> Self {
        let mut tree = ExplicitTree::empty();
        for d in 0..=depth {
            for t in Node::all_at_depth(d) {
                tree.nodes.insert(t);
            }
        }
        tree
    }

    pub fn contains(&self, t: &Node) -> bool {
        self.nodes.contains(t)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Inserts the node and all its ancestors.
    pub fn insert_with_ancestors(&mut self, t: &Node) {
        for p in t.prefixes() {
            self.nodes.insert(p);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter()
    }

    /// Nodes of exactly the given depth.
    pub fn level(&self, depth: usize) -> Vec<Node> {
        self.nodes.iter().filter(|n| n.len() == depth).cloned().collect()
    }

    /// Exact mass of the tree's level at `depth`: the finite surrogate for
    /// the measure of the branch set.
    pub fn frontier_mass(&self, mu: &DyadicMeasure, depth: usize) -> Rational {
        self.level(depth)
            .iter()
            .map(|t| mu.cylinder_mass(t))
            .sum()
    }

    /// The minimal nodes NOT in the tree: the antichain whose cylinders
    /// cover the complement of the branch set (at this tree's resolution).
    pub fn complement_antichain(&self, depth: usize) -> Vec<Node> {
        let mut out = Vec::new();
        let mut stack = vec![Node::root()];
        while let Some(t) = stack.pop() {
            if !self.contains(&t) {
                out.push(t);
            } else if t.len() < depth {
                stack.push(t.child(0));
                stack.push(t.child(1));
            }
        }
        out.sort();
        out
    }

    /// Checks prefix-closure.
    pub fn is_prefix_closed(&self) -> bool {
        self.nodes.iter().all(|t| match t.parent() {
            None => true,
            Some(p) => self.nodes.contains(&p),
        })
    }

    /// Intersection of two trees.
    pub fn intersect(&self, other: &ExplicitTree) -> ExplicitTree {
        ExplicitTree {
            nodes: self.nodes.intersection(&other.nodes).cloned().collect(),
        }
    }

    pub fn union(&self, other: &ExplicitTree) -> ExplicitTree {
        ExplicitTree {
            nodes: self.nodes.union(&other.nodes).cloned().collect(),
        }
    }

    /// The clopen set spanned by the tree's frontier at `depth`.
    pub fn frontier_clopen(&self, depth: usize) -> ClopenSet {
        ClopenSet::Cylinders {
            nodes: self.level(depth),
        }
    }
}

impl FromIterator<Node> for ExplicitTree {
    fn from_iter<I: IntoIterator<Item = Node>>(iter: I) -> Self {
        let mut tree = ExplicitTree::empty();
        for n in iter {
            tree.insert_with_ancestors(&n);
        }
        tree
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
    fn clopen_bounds_are_exact() {
        let s = SetExpr::clopen(ClopenSet::cylinder(node("0")));
        let b = s.measure_bounds(&fair(), 1);
        assert_eq!(b.lower, rat(1, 2));
        assert_eq!(b.upper, rat(1, 2));
        assert!(!b.truncated);
    }

    #[test]
    fn complement_of_cylinder() {
        let s = SetExpr::clopen(ClopenSet::cylinder(node("00"))).complement();
        let b = s.measure_bounds(&fair(), 2);
        assert_eq!(b.lower, rat(3, 4));
        assert_eq!(b.upper, rat(3, 4));
    }

    /// Depth-4 enclosure of the no-"11" closed tree: the admissible depth-4
    /// nodes are counted by the Fibonacci recurrence, F(6) = 8 of them.
    #[test]
    fn forbid_substring_enclosure() {
        let s = SetExpr::ClosedTree {
            tree: ClosedTreeKind::ForbidSubstring {
                pattern: node("11"),
            },
        };
        let b = s.measure_bounds(&fair(), 4);
        assert_eq!(b.upper, rat(8, 16));
        assert!(b.lower <= rat(1, 2));
        assert_eq!(b.lower, Rational::zero());
    }

    #[test]
    fn bounds_tighten_with_depth() {
        let s = SetExpr::ClosedTree {
            tree: ClosedTreeKind::ForbidSubstring {
                pattern: node("11"),
            },
        };
        let mu = fair();
        let mut prev = s.measure_bounds(&mu, 0);
        for d in 1..=8 {
            let next = s.measure_bounds(&mu, d);
            assert!(next.upper <= prev.upper, "upper non-increasing at {d}");
            assert!(next.lower >= prev.lower, "lower non-decreasing at {d}");
            prev = next;
        }
    }

    #[test]
    fn complement_duality_exact() {
        let sets = [
            ClopenSet::from_nodes(vec![node("0"), node("110")]),
            ClopenSet::coordinate(2, 1),
            ClopenSet::empty(),
            ClopenSet::full(),
        ];
        for set in sets {
            let m = set.measure(&fair());
            let mc = set.complement().measure(&fair());
            assert_eq!(m + mc, Rational::one());
        }
    }

    #[test]
    fn covers_sees_through_split_antichains() {
        let set = ClopenSet::from_nodes(vec![node("00"), node("01")]);
        assert!(set.covers(&node("0")));
        assert_eq!(set.region(&node("0")), Region::Inside);
        assert_eq!(set.region(&Node::root()), Region::Mixed);
        assert_eq!(set.region(&node("1")), Region::Outside);
    }

    #[test]
    fn fixed_bits_masses() {
        let mu = fair();
        let ev = ClopenSet::coordinate(3, 1);
        assert_eq!(ev.measure(&mu), rat(1, 2));
        assert_eq!(ev.mass_in(&mu, &node("00")), rat(1, 8));
        assert_eq!(
            ClopenSet::FixedBits {
                bits: vec![(0, 1), (2, 0)]
            }
            .measure(&DyadicMeasure::bernoulli(rat(1, 3))),
            rat(1, 3) * rat(2, 3)
        );
        // Contradictory constraints denote the empty set.
        assert!(ClopenSet::FixedBits {
            bits: vec![(1, 0), (1, 1)]
        }
        .is_empty_set());
    }

    #[test]
    fn fixed_bits_antichain_agrees() {
        let mu = DyadicMeasure::bernoulli(rat(2, 5));
        let set = ClopenSet::FixedBits {
            bits: vec![(1, 1), (2, 0)],
        };
        let anti = ClopenSet::Cylinders {
            nodes: set.to_antichain(),
        };
        for d in 0..4 {
            for t in Node::all_at_depth(d) {
                assert_eq!(set.mass_in(&mu, &t), anti.mass_in(&mu, &t));
                assert_eq!(set.region(&t), anti.region(&t));
            }
        }
    }

    #[test]
    fn clopen_algebra() {
        let a = ClopenSet::cylinder(node("0"));
        let b = ClopenSet::cylinder(node("01"));
        assert_eq!(a.intersect(&b).measure(&fair()), rat(1, 4));
        assert_eq!(a.union(&b).measure(&fair()), rat(1, 2));
        let c = a.complement();
        assert_eq!(c.measure(&fair()), rat(1, 2));
        assert!(a.intersect(&c).is_empty_set());
    }

    #[test]
    fn product_sets_on_pair_tree() {
        let a = ClopenSet::cylinder(node("0"));
        let prod = a.product(&a);
        let mu2 = DyadicMeasure::product(&fair(), &fair());
        assert_eq!(prod.measure(&mu2), rat(1, 4));
    }

    #[test]
    fn limsup_truncation_flagged() {
        let s = SetExpr::LimSup {
            family: FamilySpec::Coordinate { bit: 1 },
            horizon: 3,
        };
        let b = s.measure_bounds(&fair(), 4);
        assert!(b.truncated);
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn explicit_tree_machinery() {
        let tree: ExplicitTree = vec![node("00"), node("01"), node("10")]
            .into_iter()
            .collect();
        assert!(tree.is_prefix_closed());
        assert_eq!(tree.frontier_mass(&fair(), 2), rat(3, 4));
        let comp = tree.complement_antichain(2);
        assert_eq!(comp, vec![node("11")]);
    }
}
