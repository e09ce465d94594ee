//! The four-quadrant paired game and the two section transformers.
//!
//! A player II strategy for the paired game turns into a player II strategy
//! for the plain game on the first coordinate: each round the transformer
//! asks the source strategy, per surviving second-coordinate node, how cheap
//! each quadrant is (its per-side infima), picks the first coordinate
//! minimizing the summed infima relative to the received mass, and re-seats
//! every second-coordinate node with a fresh witness move. The bookkeeping
//! keeps the summed committed values strictly below a budget proportional to
//! the current mass, which caps the measure of the dead second-coordinate
//! frontier - the game form of the null-section arguments of the product
//! measure theorem.

use crate::game::{
    estimate_delta, Position, Round, SideMove, SideStrategy, SplitMove, Variant,
};
use crate::measure::DyadicMeasure;
use crate::node::Node;
use crate::rational::Rational;
use crate::sets::{ClopenSet, ExplicitTree, Region};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

/// Which per-round budget the transformer maintains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BudgetRule {
    /// Committed values stay below `coefficient * current mass` (the
    /// null-section transformer; coefficient is the section slack).
    Fraction { coefficient: Rational },
}

impl BudgetRule {
    fn budget(&self, mass: &Rational) -> Rational {
        match self {
            BudgetRule::Fraction { coefficient } => coefficient.clone() * mass.clone(),
        }
    }
}

/// Per-second-coordinate-node bookkeeping at one level of a transformer run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadrantEntry {
    /// Committed value: strictly between the source's infimum and the full
    /// product mass for live nodes, exactly the product mass for dead ones.
    pub value: Rational,
    pub dead: bool,
    /// The paired-game position whose replay re-elicits this node's
    /// quadrant, for live nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
}

/// The audited state of a transformer run after each round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadrantContext {
    /// Entries per second-coordinate node of the current level.
    pub entries: BTreeMap<Node, QuadrantEntry>,
    /// The sum of committed values and the budget it stayed below.
    pub committed: Rational,
    pub budget: Rational,
    /// The ratio minimization audit of the last side choice: the chosen
    /// side's summed infima over its mass, and the pooled ratio it never
    /// exceeds.
    pub chosen_ratio: (Rational, Rational),
    pub pooled_ratio: (Rational, Rational),
}

/// Why a transformer run aborted.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum TransformerFailure {
    #[error("no witness for quadrant ({side}, {second}) at {node}")]
    WitnessFailure { node: Node, side: u8, second: u8 },
    #[error("summed infima {sum} do not fit the budget {budget} at mass {mass}")]
    BudgetExhausted {
        sum: Rational,
        budget: Rational,
        mass: Rational,
    },
    #[error("incoming split leaves no playable side")]
    NoPlayableSide,
}

/// Player II for the plain game, derived from a paired-game strategy.
pub struct SectionTransformer {
    source: Box<dyn SideStrategy>,
    /// The product measure of the paired game; the plain game runs on its
    /// first factor.
    mu2: DyadicMeasure,
    /// Stake of the paired game the source plays.
    source_stake: Rational,
    rule: BudgetRule,
    resolution: u32,
    states: RefCell<HashMap<Vec<Round>, QuadrantContext>>,
    failure: RefCell<Option<TransformerFailure>>,
}

impl SectionTransformer {
    pub fn new(
        source: Box<dyn SideStrategy>,
        mu2: DyadicMeasure,
        source_stake: Rational,
        rule: BudgetRule,
        resolution: u32,
    ) -> Self {
        SectionTransformer {
            source,
            mu2,
            source_stake,
            rule,
            resolution,
            states: RefCell::new(HashMap::new()),
            failure: RefCell::new(None),
        }
    }

    pub fn failure(&self) -> Option<TransformerFailure> {
        self.failure.borrow().clone()
    }

    /// The audited context after a completed history.
    pub fn context(&self, pos: &Position) -> Result<QuadrantContext, TransformerFailure> {
        self.state_with(pos.rounds())
    }

    /// The live second-coordinate tree after a completed history, with each
    /// node's replayable position.
    pub fn live_tree(
        &self,
        pos: &Position,
    ) -> Result<(ExplicitTree, BTreeMap<Node, Position>), TransformerFailure> {
        let ctx = self.state_with(pos.rounds())?;
        let mut tree = ExplicitTree::empty();
        let mut positions = BTreeMap::new();
        for (p, e) in &ctx.entries {
            if !e.dead {
                tree.insert_with_ancestors(p);
                if let Some(pp) = &e.position {
                    positions.insert(p.clone(), pp.clone());
                }
            }
        }
        Ok((tree, positions))
    }

    fn root_state(&self) -> QuadrantContext {
        let mut entries = BTreeMap::new();
        entries.insert(
            Node::root(),
            QuadrantEntry {
                value: self.source_stake.clone(),
                dead: false,
                position: Some(Position::empty(
                    Variant::Paired,
                    self.source_stake.clone(),
                )),
            },
        );
        QuadrantContext {
            entries,
            committed: self.source_stake.clone(),
            budget: Rational::one(),
            chosen_ratio: (Rational::zero(), Rational::one()),
            pooled_ratio: (Rational::zero(), Rational::one()),
        }
    }

    /// The per-entry four-quadrant infima (dead entries saturate at the
    /// product masses of the children).
    fn entry_deltas(
        &self,
        first: &Node,
        p: &Node,
        entry: &QuadrantEntry,
    ) -> [Rational; 4] {
        let mut out = [
            Rational::zero(),
            Rational::zero(),
            Rational::zero(),
            Rational::zero(),
        ];
        if entry.dead {
            for i in 0..2u8 {
                for j in 0..2u8 {
                    let pair = Node::interleave(&first.child(i), &p.child(j));
                    out[(2 * i + j) as usize] = self.mu2.cylinder_mass(&pair);
                }
            }
            return out;
        }
        let pos = entry.position.as_ref().expect("live entries carry positions");
        let report =
            estimate_delta(&self.mu2, self.source.as_ref(), pos, None, self.resolution);
        for q in 0..4 {
            out[q] = report.sides[q].lower.clone();
        }
        out
    }

    /// Chooses the first-coordinate side and recomputes the entry table.
    fn advance(
        &self,
        prev: &QuadrantContext,
        first: &Node,
        split: &SplitMove,
        taken: Option<u8>,
    ) -> Result<(u8, QuadrantContext), TransformerFailure> {
        // Gather per-entry infima.
        let deltas: BTreeMap<Node, [Rational; 4]> = prev
            .entries
            .iter()
            .map(|(p, e)| (p.clone(), self.entry_deltas(first, p, e)))
            .collect();

        // Per-side sums of infima (over all entries and both second bits).
        let side_sum = |i: u8| -> Rational {
            deltas
                .values()
                .map(|d| d[(2 * i) as usize].clone() + d[(2 * i + 1) as usize].clone())
                .sum()
        };
        let sums = [side_sum(0), side_sum(1)];

        let side = match taken {
            Some(s) => s,
            None => {
                // Minimize sum_i / m_i over the nonzero sides by exact
                // cross-multiplication; ties to side 0.
                let mut best: Option<u8> = None;
                for i in 0..2u8 {
                    if split.masses[i as usize].is_zero() {
                        continue;
                    }
                    best = match best {
                        None => Some(i),
                        Some(b) => {
                            let lhs = sums[i as usize].clone()
                                * split.masses[b as usize].clone();
                            let rhs = sums[b as usize].clone()
                                * split.masses[i as usize].clone();
                            if lhs < rhs {
                                Some(i)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
                best.ok_or(TransformerFailure::NoPlayableSide)?
            }
        };

        let mass = split.masses[side as usize].clone();
        let budget = self.rule.budget(&mass);
        let chosen_sum = sums[side as usize].clone();
        if chosen_sum >= budget {
            return Err(TransformerFailure::BudgetExhausted {
                sum: chosen_sum,
                budget,
                mass,
            });
        }

        // Count live children to share the remaining slack evenly.
        let mut live_children = 0usize;
        for (p, e) in &prev.entries {
            if e.dead {
                continue;
            }
            for j in 0..2u8 {
                let q = (2 * side + j) as usize;
                let pair = Node::interleave(&first.child(side), &p.child(j));
                if deltas[p][q] < self.mu2.cylinder_mass(&pair) {
                    live_children += 1;
                }
            }
        }
        let share = if live_children > 0 {
            (budget.clone() - chosen_sum.clone())
                / Rational::from_int(2 * live_children as i64)
        } else {
            Rational::zero()
        };

        // Build the next level.
        let mut entries = BTreeMap::new();
        let mut committed = Rational::zero();
        for (p, e) in &prev.entries {
            for j in 0..2u8 {
                let q = (2 * side + j) as usize;
                let child = p.child(j);
                let pair = Node::interleave(&first.child(side), &child);
                let cap = self.mu2.cylinder_mass(&pair);
                let delta = deltas[p][q].clone();
                if e.dead || delta >= cap {
                    committed += cap.clone();
                    entries.insert(
                        child,
                        QuadrantEntry {
                            value: cap,
                            dead: true,
                            position: None,
                        },
                    );
                    continue;
                }
                let pos = e.position.as_ref().expect("live entries carry positions");
                let upper = (delta.clone() + share.clone()).min(cap.clone());
                let witness = self
                    .source
                    .delta_witness(&self.mu2, pos, &e.value, 2 * side + j, &upper)
                    .ok_or(TransformerFailure::WitnessFailure {
                        node: p.clone(),
                        side,
                        second: j,
                    })?;
                let next_pos = pos
                    .with_pending(witness.split.clone())
                    .apply_side(SideMove::pick(2 * side + j));
                committed += witness.value.clone();
                entries.insert(
                    child,
                    QuadrantEntry {
                        value: witness.value,
                        dead: false,
                        position: Some(next_pos),
                    },
                );
            }
        }

        let total_mass = split.total();
        let pooled = (sums[0].clone() + sums[1].clone(), total_mass);
        let ctx = QuadrantContext {
            entries,
            committed,
            budget,
            chosen_ratio: (chosen_sum, mass),
            pooled_ratio: pooled,
        };
        Ok((side, ctx))
    }

    fn state_with(&self, rounds: &[Round]) -> Result<QuadrantContext, TransformerFailure> {
        if rounds.is_empty() {
            return Ok(self.root_state());
        }
        if let Some(s) = self.states.borrow().get(rounds) {
            return Ok(s.clone());
        }
        let prefix = &rounds[..rounds.len() - 1];
        let prev = self.state_with(prefix)?;
        let mut first = Node::root();
        for r in prefix {
            first = first.child(r.side.index);
        }
        let last = &rounds[rounds.len() - 1];
        let (_, ctx) = self.advance(&prev, &first, &last.split, Some(last.side.index))?;
        self.states
            .borrow_mut()
            .insert(rounds.to_vec(), ctx.clone());
        Ok(ctx)
    }
}

impl SideStrategy for SectionTransformer {
    fn name(&self) -> String {
        format!("section-transformer({})", self.source.name())
    }

    fn side(&self, _mu: &DyadicMeasure, pos: &Position) -> Option<SideMove> {
        let split = pos.pending()?;
        let state = match self.state_with(pos.rounds()) {
            Ok(s) => s,
            Err(f) => {
                self.failure.borrow_mut().get_or_insert(f);
                return None;
            }
        };
        match self.advance(&state, &pos.node(), split, None) {
            Ok((side, _)) => Some(SideMove::pick(side)),
            Err(f) => {
                self.failure.borrow_mut().get_or_insert(f);
                None
            }
        }
    }

    fn clone_box(&self) -> Box<dyn SideStrategy> {
        Box::new(SectionTransformer {
            source: self.source.clone_box(),
            mu2: self.mu2.clone(),
            source_stake: self.source_stake.clone(),
            rule: self.rule.clone(),
            resolution: self.resolution,
            states: RefCell::new(self.states.borrow().clone()),
            failure: RefCell::new(self.failure.borrow().clone()),
        })
    }
}

/// Turns a player II strategy for the paired game at stake 0 into a player
/// II strategy for the plain game whose consistent runs produce first
/// coordinates with sections that the source wins at stake `section_slack`.
pub fn fub1_transform(
    source: Box<dyn SideStrategy>,
    mu2: &DyadicMeasure,
    section_slack: Rational,
    resolution: u32,
) -> SectionTransformer {
    assert!(section_slack.is_positive());
    SectionTransformer::new(
        source,
        mu2.clone(),
        Rational::zero(),
        BudgetRule::Fraction {
            coefficient: section_slack,
        },
        resolution,
    )
}

/// Turns a player II strategy for the paired game at stake `1 - eps` into a
/// player II strategy for the plain game at stake `1 - gamma` (gamma below
/// eps): the budget coefficient is `1 - beta` where
/// `(1 - gamma)(1 - beta) = 1 - eps`, and the live tree at any level keeps
/// second-coordinate mass at least `beta`.
pub fn fub2_transform(
    source: Box<dyn SideStrategy>,
    mu2: &DyadicMeasure,
    eps: &Rational,
    gamma: &Rational,
    resolution: u32,
) -> (Rational, SectionTransformer) {
    assert!(gamma.is_positive() && gamma < eps && *eps < Rational::one());
    let one = Rational::one();
    let beta = (eps.clone() - gamma.clone()) / (one.clone() - gamma.clone());
    let transformer = SectionTransformer::new(
        source,
        mu2.clone(),
        one.clone() - eps.clone(),
        BudgetRule::Fraction {
            coefficient: one - beta.clone(),
        },
        resolution,
    );
    (beta, transformer)
}

/// The three-way equivalence report for a clopen product payoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FubiniReport {
    pub product_mass: Rational,
    /// Mass of first coordinates whose section has positive measure.
    pub positive_section_mass: Rational,
    /// Mass of second coordinates whose co-section has positive measure.
    pub positive_cosection_mass: Rational,
    pub equivalent: bool,
}

/// Exact section analysis of a clopen set on the interleaved pair tree.
///
/// The three conditions - null product mass, almost-all null sections,
/// almost-all null co-sections - are evaluated exactly and compared.
pub fn fubini_check(mu2: &DyadicMeasure, payoff: &ClopenSet, depth: usize) -> FubiniReport {
    let (mu_first, mu_second) = mu2
        .factors()
        .expect("fubini check needs a product measure");
    let product_mass = payoff.measure(mu2);

    let section_axis = |first_axis: bool| -> Rational {
        let mut positive = Rational::zero();
        for u in Node::all_at_depth(depth) {
            let coord_mass = if first_axis {
                mu_first.cylinder_mass(&u)
            } else {
                mu_second.cylinder_mass(&u)
            };
            if coord_mass.is_zero() {
                continue;
            }
            // Mass of the payoff inside the strip where this axis runs
            // through N_u.
            let strip = ClopenSet::FixedBits {
                bits: u
                    .bits()
                    .iter()
                    .enumerate()
                    .map(|(k, &b)| (2 * k + usize::from(!first_axis), b))
                    .collect(),
            };
            let strip_mass = strip_mass_exact(mu2, payoff, &strip, 2 * depth);
            if strip_mass.is_positive() {
                positive += coord_mass;
            }
        }
        positive
    };

    let positive_section_mass = section_axis(true);
    let positive_cosection_mass = section_axis(false);
    let null = product_mass.is_zero();
    let equivalent = (null == positive_section_mass.is_zero())
        && (null == positive_cosection_mass.is_zero());
    FubiniReport {
        product_mass,
        positive_section_mass,
        positive_cosection_mass,
        equivalent,
    }
}

/// `mu2(payoff /\ strip)` by descending the pair tree.
fn strip_mass_exact(
    mu2: &DyadicMeasure,
    payoff: &ClopenSet,
    strip: &ClopenSet,
    depth: usize,
) -> Rational {
    fn go(
        mu2: &DyadicMeasure,
        payoff: &ClopenSet,
        strip: &ClopenSet,
        depth: usize,
        t: Node,
    ) -> Rational {
        match (payoff.region(&t), strip.region(&t)) {
            (Region::Outside, _) | (_, Region::Outside) => Rational::zero(),
            (Region::Inside, Region::Inside) => mu2.cylinder_mass(&t),
            _ => {
                if t.len() >= depth {
                    return Rational::zero();
                }
                go(mu2, payoff, strip, depth, t.child(0))
                    + go(mu2, payoff, strip, depth, t.child(1))
            }
        }
    }
    go(mu2, payoff, strip, depth, Node::root())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::node;
    use crate::rational::rat;
    use crate::strategy::CoverAvoider;

    fn fair2() -> DyadicMeasure {
        let f = DyadicMeasure::fair();
        DyadicMeasure::product(&f, &f)
    }

    #[test]
    fn fubini_check_empty_and_quarter() {
        let mu2 = fair2();
        let empty = fubini_check(&mu2, &ClopenSet::empty(), 3);
        assert!(empty.equivalent);
        assert_eq!(empty.product_mass, Rational::zero());
        assert_eq!(empty.positive_section_mass, Rational::zero());

        // A = N_0 x N_0 as the interleaved cylinder "00".
        let quarter = fubini_check(&mu2, &ClopenSet::cylinder(node("00")), 3);
        assert!(quarter.equivalent);
        assert_eq!(quarter.product_mass, rat(1, 4));
        assert_eq!(quarter.positive_section_mass, rat(1, 2));
        assert_eq!(quarter.positive_cosection_mass, rat(1, 2));
    }

    #[test]
    fn fub2_beta_identity() {
        // eps = 1/2, gamma = 1/4: (1 - gamma)(1 - beta) = 1 - eps gives
        // beta = 1/3.
        let mu2 = fair2();
        let cover = ClopenSet::cylinder(node("00"));
        let tau = CoverAvoider::new(&mu2, cover, rat(1, 2)).unwrap();
        let (beta, _) = fub2_transform(Box::new(tau), &mu2, &rat(1, 2), &rat(1, 4), 8);
        assert_eq!(beta, rat(1, 3));
    }

    #[test]
    fn transformer_round_keeps_budget() {
        let mu2 = fair2();
        // Source: avoid the quadrant cover A = N_0 x N_0 at paired stake
        // 1/2; the transformer targets the plain game at stake 1 - 1/4.
        let cover = ClopenSet::cylinder(node("00"));
        let tau = CoverAvoider::new(&mu2, cover, rat(1, 2)).unwrap();
        let (beta, transformer) =
            fub2_transform(Box::new(tau), &mu2, &rat(1, 2), &rat(1, 4), 8);

        let mu = DyadicMeasure::fair();
        let mut pos = Position::empty(Variant::Plain, rat(3, 4));
        let split = SplitMove::pair(rat(2, 5), rat(2, 5));
        let side = transformer
            .side(&mu, &pos.with_pending(split.clone()))
            .unwrap_or_else(|| panic!("{:?}", transformer.failure()));
        pos.push_round(split, side.clone());
        let ctx = transformer.context(&pos).unwrap();
        assert!(ctx.committed < ctx.budget, "{ctx:?}");
        let coeff = Rational::one() - beta;
        assert_eq!(ctx.budget, coeff * rat(2, 5));
        // Min-ratio audit: chosen ratio never exceeds the pooled ratio.
        let (cn, cd) = &ctx.chosen_ratio;
        let (pn, pd) = &ctx.pooled_ratio;
        assert!(cn.clone() * pd.clone() <= pn.clone() * cd.clone());
    }
}
