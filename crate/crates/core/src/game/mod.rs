//! The mass-splitting game: variants, positions, moves, and strategy
//! interfaces.
//!
//! In the plain game player I offers a rational split of the current node's
//! mass between its two children and player II picks a child with nonzero
//! mass. The paired variant runs on the interleaved product tree with
//! four-way splits; the unfolded variant additionally lets II attach a digit
//! from a truncated alphabet to any of its moves, building a witness
//! sequence alongside the branch.

mod delta;
mod referee;
mod rules;

pub use delta::{estimate_delta, DeltaReport, DeltaSide, DeltaWitness};
pub use referee::{referee, replay_trace, Outcome, RefereeError, Trace, TraceRound};
pub use rules::{validate_side, validate_split, RuleViolation};

use crate::measure::DyadicMeasure;
use crate::node::Node;
use crate::rational::Rational;
use serde::{Deserialize, Serialize};

/// Which player a move or outcome belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

impl std::fmt::Display for Player {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Player::One => write!(f, "I"),
            Player::Two => write!(f, "II"),
        }
    }
}

/// Game variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Variant {
    /// The plain game on the dyadic tree.
    Plain,
    /// The four-quadrant game on the interleaved pair tree.
    Paired,
    /// The unfolded game: II may attach witness digits below `alphabet`.
    Unfolded { alphabet: u32 },
}

impl Variant {
    /// Children per node: 2, or 4 quadrants in the paired game.
    pub fn arity(&self) -> usize {
        match self {
            Variant::Paired => 4,
            _ => 2,
        }
    }

    /// Tree bits appended per round.
    pub fn bits_per_round(&self) -> usize {
        match self {
            Variant::Paired => 2,
            _ => 1,
        }
    }

    /// The child node selected by a side index.
    pub fn child(&self, t: &Node, index: u8) -> Node {
        match self {
            Variant::Paired => t.child(index >> 1).child(index & 1),
            _ => t.child(index),
        }
    }

    /// The child nodes in side-index order.
    pub fn children(&self, t: &Node) -> Vec<Node> {
        (0..self.arity() as u8).map(|i| self.child(t, i)).collect()
    }
}

/// Player I's move: one rational mass per child, in side-index order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplitMove {
    pub masses: Vec<Rational>,
}

impl SplitMove {
    pub fn pair(m0: Rational, m1: Rational) -> Self {
        SplitMove {
            masses: vec![m0, m1],
        }
    }

    pub fn quad(m: [Rational; 4]) -> Self {
        SplitMove {
            masses: m.to_vec(),
        }
    }

    pub fn total(&self) -> Rational {
        self.masses.iter().cloned().sum()
    }
}

/// Player II's move: a side index, optionally carrying a witness digit in
/// the unfolded game.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SideMove {
    pub index: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digit: Option<u32>,
}

impl SideMove {
    pub fn pick(index: u8) -> Self {
        SideMove { index, digit: None }
    }

    pub fn with_digit(index: u8, digit: u32) -> Self {
        SideMove {
            index,
            digit: Some(digit),
        }
    }
}

/// One completed round.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Round {
    pub split: SplitMove,
    pub side: SideMove,
}

/// A game history: completed rounds plus, possibly, a pending split by
/// player I that player II has not yet answered.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Position {
    variant: Variant,
    stake: Rational,
    rounds: Vec<Round>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pending: Option<SplitMove>,
}

impl Position {
    pub fn empty(variant: Variant, stake: Rational) -> Self {
        Position {
            variant,
            stake,
            rounds: Vec::new(),
            pending: None,
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn stake(&self) -> &Rational {
        &self.stake
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn depth(&self) -> usize {
        self.rounds.len()
    }

    pub fn pending(&self) -> Option<&SplitMove> {
        self.pending.as_ref()
    }

    pub fn to_move(&self) -> Player {
        if self.pending.is_some() {
            Player::Two
        } else {
            Player::One
        }
    }

    /// The node reached by player II's choices so far.
    pub fn node(&self) -> Node {
        let mut t = Node::root();
        for r in &self.rounds {
            t = self.variant.child(&t, r.side.index);
        }
        t
    }

    /// The mass assigned to the current node: the chosen component of the
    /// last split. `None` at the root.
    pub fn node_mass(&self) -> Option<Rational> {
        self.rounds
            .last()
            .map(|r| r.split.masses[r.side.index as usize].clone())
    }

    /// The exact sum player I's next split must have: the current node's
    /// mass, or `None` at the root where any sum above the stake is legal.
    pub fn round_budget(&self) -> Option<Rational> {
        self.node_mass()
    }

    /// The probe budget of the per-side infimum analysis: the current mass,
    /// or the stake at the root.
    pub fn delta_budget(&self) -> Rational {
        self.node_mass().unwrap_or_else(|| self.stake.clone())
    }

    pub fn with_pending(&self, split: SplitMove) -> Position {
        let mut p = self.clone();
        p.pending = Some(split);
        p
    }

    /// Completes the pending round with player II's reply.
    pub fn apply_side(&self, side: SideMove) -> Position {
        let mut p = self.clone();
        let split = p.pending.take().expect("no pending split to answer");
        p.rounds.push(Round { split, side });
        p
    }

    pub fn push_round(&mut self, split: SplitMove, side: SideMove) {
        assert!(self.pending.is_none());
        self.rounds.push(Round { split, side });
    }

    /// Witness digits played so far, with the rounds they were played in.
    pub fn digits(&self) -> Vec<(usize, u32)> {
        self.rounds
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.side.digit.map(|d| (i, d)))
            .collect()
    }

    /// The witness string as a node-like digit vector.
    pub fn digit_string(&self) -> Vec<u32> {
        self.digits().into_iter().map(|(_, d)| d).collect()
    }

    /// Rounds elapsed since the last witness digit (the liveness counter of
    /// the unfolded game's non-closed rule).
    pub fn rounds_since_digit(&self) -> usize {
        let mut count = 0;
        for r in self.rounds.iter().rev() {
            if r.side.digit.is_some() {
                return count;
            }
            count += 1;
        }
        count
    }

    /// True when `self` is an initial segment of `other` (same variant and
    /// stake, round-by-round equality).
    pub fn is_prefix_of(&self, other: &Position) -> bool {
        self.variant == other.variant
            && self.stake == other.stake
            && self.rounds.len() <= other.rounds.len()
            && self.rounds[..] == other.rounds[..self.rounds.len()]
    }
}

/// Per-side infimum data a strategy can report in closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactDelta {
    /// The infimum, per side, of the values at which the strategy still
    /// selects that side (capped at the child cylinder mass).
    pub deltas: Vec<Rational>,
}

/// A decision rule for player I.
pub trait SplitStrategy {
    fn name(&self) -> String;

    /// The split to play with player I to move; `None` declares resignation.
    fn split(&self, mu: &DyadicMeasure, pos: &Position) -> Option<SplitMove>;

    fn clone_box(&self) -> Box<dyn SplitStrategy>;
}

/// A decision rule for player II.
pub trait SideStrategy {
    fn name(&self) -> String;

    /// The side to play given the pending split; `None` declares
    /// resignation.
    fn side(&self, mu: &DyadicMeasure, pos: &Position) -> Option<SideMove>;

    /// Exact per-side infima at a context where player I is to move, under
    /// probe budget `budget` (splits summing to it; free-sum probes above it
    /// at the root). `None` means the strategy cannot report exact values
    /// and callers must fall back to the grid estimator.
    fn exact_delta(
        &self,
        _mu: &DyadicMeasure,
        _pos: &Position,
        _budget: &Rational,
    ) -> Option<ExactDelta> {
        None
    }

    /// A legal split assigning to `side` a value inside `(delta_side, upper)`
    /// which this strategy answers with `side` - or exactly `delta_side`
    /// when the infimum is attained and nothing above it elicits the side.
    /// Only exact-delta-capable strategies implement this.
    fn delta_witness(
        &self,
        _mu: &DyadicMeasure,
        _pos: &Position,
        _budget: &Rational,
        _side: u8,
        _upper: &Rational,
    ) -> Option<DeltaWitness> {
        None
    }

    fn clone_box(&self) -> Box<dyn SideStrategy>;
}

impl Clone for Box<dyn SplitStrategy> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

impl Clone for Box<dyn SideStrategy> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn position_tracks_node_and_mass() {
        let mut pos = Position::empty(Variant::Plain, rat(1, 4));
        pos.push_round(
            SplitMove::pair(rat(1, 3), rat(1, 6)),
            SideMove::pick(1),
        );
        assert_eq!(pos.node().to_string(), "1");
        assert_eq!(pos.node_mass(), Some(rat(1, 6)));
        assert_eq!(pos.delta_budget(), rat(1, 6));
        assert_eq!(Position::empty(Variant::Plain, rat(1, 4)).delta_budget(), rat(1, 4));
    }

    #[test]
    fn paired_variant_appends_two_bits() {
        let mut pos = Position::empty(Variant::Paired, rat(0, 1));
        pos.push_round(
            SplitMove::quad([rat(1, 8), rat(1, 8), rat(1, 8), rat(1, 8)]),
            SideMove::pick(2), // first coordinate 1, second 0
        );
        assert_eq!(pos.node().to_string(), "10");
        let (first, second) = pos.node().deinterleave();
        assert_eq!(first.to_string(), "1");
        assert_eq!(second.to_string(), "0");
    }

    #[test]
    fn unfolded_digits_and_liveness() {
        let mut pos = Position::empty(Variant::Unfolded { alphabet: 3 }, rat(0, 1));
        pos.push_round(SplitMove::pair(rat(1, 4), rat(1, 4)), SideMove::pick(0));
        pos.push_round(
            SplitMove::pair(rat(1, 8), rat(1, 8)),
            SideMove::with_digit(1, 2),
        );
        pos.push_round(SplitMove::pair(rat(1, 16), rat(1, 16)), SideMove::pick(0));
        assert_eq!(pos.digit_string(), vec![2]);
        assert_eq!(pos.digits(), vec![(1, 2)]);
        assert_eq!(pos.rounds_since_digit(), 1);
    }
}
