//! The referee: plays two strategies against each other, validates every
//! move, decides the outcome where the payoff decides at finite depth, and
//! records a deterministic, replayable trace.

use super::rules::{validate_side, validate_split, RuleViolation};
use super::{Player, Position, SideMove, SideStrategy, SplitMove, SplitStrategy, Variant};
use crate::measure::DyadicMeasure;
use crate::rational::Rational;
use crate::sets::{Region, SetExpr};
use serde::{Deserialize, Serialize};

/// How a run ended.
///
/// A run is decided only when the payoff's verdict on the whole cylinder of
/// player II's current node is settled; survival to the depth cap without a
/// settled verdict is `Undecided` - certificates, not finite runs, carry the
/// winning guarantees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    /// The payoff settled on the current cylinder.
    Decided { winner: Player, at_round: usize },
    /// A strategy broke a rule and loses.
    Violation {
        by: Player,
        at_round: usize,
        violation: RuleViolation,
    },
    /// A strategy declared resignation.
    Resigned { by: Player, at_round: usize },
    /// Depth cap reached with the payoff still split on the cylinder.
    Undecided { depth: usize },
}

impl Outcome {
    /// The winner, when the run determined one.
    pub fn winner(&self) -> Option<Player> {
        match self {
            Outcome::Decided { winner, .. } => Some(*winner),
            Outcome::Violation { by, .. } | Outcome::Resigned { by, .. } => {
                Some(by.opponent())
            }
            Outcome::Undecided { .. } => None,
        }
    }
}

/// One recorded round with its legality audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRound {
    pub split: SplitMove,
    pub split_legal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<SideMove>,
    pub side_legal: bool,
}

/// A full play record. Replaying the move list through the legality checks
/// reproduces the trace bit-identically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub format: u32,
    pub variant: Variant,
    pub stake: Rational,
    pub measure: DyadicMeasure,
    pub payoff: SetExpr,
    pub player_one: String,
    pub player_two: String,
    pub rounds: Vec<TraceRound>,
    pub outcome: Outcome,
    pub final_depth: usize,
    /// The node player II reached.
    pub final_node: crate::node::Node,
    /// True when the payoff evaluation involved a truncated expression.
    pub payoff_truncated: bool,
    /// Per-round liveness counters (rounds since the last witness digit);
    /// only recorded for the unfolded variant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digit_liveness: Option<Vec<usize>>,
}

pub const TRACE_FORMAT: u32 = 1;

/// Plays `max_rounds` rounds of the game or stops early on a settled payoff
/// verdict, a rule violation, or a resignation.
pub fn referee(
    sigma: &dyn SplitStrategy,
    tau: &dyn SideStrategy,
    stake: &Rational,
    payoff: &SetExpr,
    mu: &DyadicMeasure,
    variant: Variant,
    max_rounds: usize,
) -> Trace {
    let mut pos = Position::empty(variant, stake.clone());
    let mut rounds = Vec::new();
    let mut truncated = false;
    let mut liveness = Vec::new();

    let outcome = 'run: {
        for round in 0..max_rounds {
            // Outcome check on the current cylinder before each round.
            let v = payoff.verdict(&pos.node());
            truncated |= v.truncated;
            match v.region {
                Region::Inside => {
                    break 'run Outcome::Decided {
                        winner: Player::Two,
                        at_round: round,
                    }
                }
                Region::Outside => {
                    break 'run Outcome::Decided {
                        winner: Player::One,
                        at_round: round,
                    }
                }
                Region::Mixed => {}
            }

            let split = match sigma.split(mu, &pos) {
                Some(s) => s,
                None => {
                    break 'run Outcome::Resigned {
                        by: Player::One,
                        at_round: round,
                    }
                }
            };
            if let Err(violation) = validate_split(mu, &pos, &split) {
                rounds.push(TraceRound {
                    split,
                    split_legal: false,
                    side: None,
                    side_legal: false,
                });
                break 'run Outcome::Violation {
                    by: Player::One,
                    at_round: round,
                    violation,
                };
            }

            let pending = pos.with_pending(split.clone());
            let side = match tau.side(mu, &pending) {
                Some(s) => s,
                None => {
                    rounds.push(TraceRound {
                        split,
                        split_legal: true,
                        side: None,
                        side_legal: false,
                    });
                    break 'run Outcome::Resigned {
                        by: Player::Two,
                        at_round: round,
                    };
                }
            };
            if let Err(violation) = validate_side(mu, &pending, &side) {
                rounds.push(TraceRound {
                    split,
                    split_legal: true,
                    side: Some(side),
                    side_legal: false,
                });
                break 'run Outcome::Violation {
                    by: Player::Two,
                    at_round: round,
                    violation,
                };
            }

            rounds.push(TraceRound {
                split,
                split_legal: true,
                side: Some(side.clone()),
                side_legal: true,
            });
            pos = pending.apply_side(side);
            if matches!(variant, Variant::Unfolded { .. }) {
                liveness.push(pos.rounds_since_digit());
            }
        }
        let v = payoff.verdict(&pos.node());
        truncated |= v.truncated;
        match v.region {
            Region::Inside => Outcome::Decided {
                winner: Player::Two,
                at_round: pos.depth(),
            },
            Region::Outside => Outcome::Decided {
                winner: Player::One,
                at_round: pos.depth(),
            },
            Region::Mixed => Outcome::Undecided { depth: pos.depth() },
        }
    };

    Trace {
        format: TRACE_FORMAT,
        variant,
        stake: stake.clone(),
        measure: mu.clone(),
        payoff: payoff.clone(),
        player_one: sigma.name(),
        player_two: tau.name(),
        final_depth: pos.depth(),
        final_node: pos.node(),
        rounds,
        outcome,
        payoff_truncated: truncated,
        digit_liveness: if matches!(variant, Variant::Unfolded { .. }) {
            Some(liveness)
        } else {
            None
        },
    }
}

/// Replay failure.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RefereeError {
    #[error("round {round}: recorded split fails validation: {violation}")]
    BadSplit {
        round: usize,
        violation: RuleViolation,
    },
    #[error("round {round}: recorded side fails validation: {violation}")]
    BadSide {
        round: usize,
        violation: RuleViolation,
    },
    #[error("trace audit flags disagree with replay at round {round}")]
    AuditMismatch { round: usize },
    #[error("replayed final node {got} differs from recorded {want}")]
    NodeMismatch {
        got: crate::node::Node,
        want: crate::node::Node,
    },
}

/// Re-validates every recorded move of a trace and checks the recorded
/// final node; returns the replayed end position.
pub fn replay_trace(trace: &Trace) -> Result<Position, RefereeError> {
    let mut pos = Position::empty(trace.variant, trace.stake.clone());
    for (round, r) in trace.rounds.iter().enumerate() {
        let split_ok = validate_split(&trace.measure, &pos, &r.split);
        if split_ok.is_ok() != r.split_legal {
            return Err(RefereeError::AuditMismatch { round });
        }
        if let Err(violation) = split_ok {
            if r.split_legal {
                return Err(RefereeError::BadSplit { round, violation });
            }
            break;
        }
        let pending = pos.with_pending(r.split.clone());
        match &r.side {
            None => break,
            Some(side) => {
                let side_ok = validate_side(&trace.measure, &pending, side);
                if side_ok.is_ok() != r.side_legal {
                    return Err(RefereeError::AuditMismatch { round });
                }
                if side_ok.is_err() {
                    break;
                }
                pos = pending.apply_side(side.clone());
            }
        }
    }
    if pos.node() != trace.final_node {
        return Err(RefereeError::NodeMismatch {
            got: pos.node(),
            want: trace.final_node.clone(),
        });
    }
    Ok(pos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::node;
    use crate::rational::rat;
    use crate::sets::ClopenSet;

    /// Player I strategy that always plays a fixed fraction of the budget on
    /// side 0 (test-only).
    #[derive(Clone)]
    struct EvenSplitter;

    impl SplitStrategy for EvenSplitter {
        fn name(&self) -> String {
            "even-splitter".into()
        }
        fn split(&self, mu: &DyadicMeasure, pos: &Position) -> Option<SplitMove> {
            let budget = pos
                .round_budget()
                .unwrap_or_else(|| Rational::midpoint(pos.stake(), &Rational::one()));
            let node = pos.node();
            let arity = pos.variant().arity();
            let each = budget / Rational::from_int(arity as i64);
            // Fair-measure tests only: stays legal as long as each half of
            // the budget is below the child cylinder mass.
            let _ = mu;
            let _ = node;
            Some(SplitMove {
                masses: vec![each; arity],
            })
        }
        fn clone_box(&self) -> Box<dyn SplitStrategy> {
            Box::new(self.clone())
        }
    }

    /// Player II strategy picking the first nonzero side (test-only).
    #[derive(Clone)]
    struct FirstNonzero;

    impl SideStrategy for FirstNonzero {
        fn name(&self) -> String {
            "first-nonzero".into()
        }
        fn side(&self, _mu: &DyadicMeasure, pos: &Position) -> Option<SideMove> {
            let split = pos.pending()?;
            split
                .masses
                .iter()
                .position(|m| !m.is_zero())
                .map(|i| SideMove::pick(i as u8))
        }
        fn clone_box(&self) -> Box<dyn SideStrategy> {
            Box::new(self.clone())
        }
    }

    #[test]
    fn full_space_payoff_decides_immediately() {
        let trace = referee(
            &EvenSplitter,
            &FirstNonzero,
            &rat(1, 4),
            &SetExpr::clopen(ClopenSet::full()),
            &DyadicMeasure::fair(),
            Variant::Plain,
            8,
        );
        assert_eq!(
            trace.outcome,
            Outcome::Decided {
                winner: Player::Two,
                at_round: 0
            }
        );
        assert!(trace.rounds.is_empty());
    }

    #[test]
    fn concentrating_player_forces_the_side() {
        /// All budget on side 0.
        #[derive(Clone)]
        struct LeftLoader;
        impl SplitStrategy for LeftLoader {
            fn name(&self) -> String {
                "left-loader".into()
            }
            fn split(&self, _mu: &DyadicMeasure, pos: &Position) -> Option<SplitMove> {
                let budget = pos.round_budget().unwrap_or_else(|| rat(3, 8));
                Some(SplitMove::pair(budget, Rational::zero()))
            }
            fn clone_box(&self) -> Box<dyn SplitStrategy> {
                Box::new(self.clone())
            }
        }
        let payoff = SetExpr::clopen(ClopenSet::cylinder(node("1")));
        let trace = referee(
            &LeftLoader,
            &FirstNonzero,
            &rat(1, 4),
            &payoff,
            &DyadicMeasure::fair(),
            Variant::Plain,
            8,
        );
        // II is forced into the 0-cylinder; the payoff excludes it at depth 1.
        assert_eq!(
            trace.outcome,
            Outcome::Decided {
                winner: Player::One,
                at_round: 1
            }
        );
    }

    #[test]
    fn replay_is_deterministic_and_bit_identical() {
        let payoff = SetExpr::clopen(ClopenSet::cylinder(node("11")));
        let mu = DyadicMeasure::fair();
        let run = || {
            referee(
                &EvenSplitter,
                &FirstNonzero,
                &rat(1, 8),
                &payoff,
                &mu,
                Variant::Plain,
                6,
            )
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
        let json_a = serde_json::to_string(&a).unwrap();
        let json_b = serde_json::to_string(&b).unwrap();
        assert_eq!(json_a, json_b);
        replay_trace(&a).unwrap();
        let back: Trace = serde_json::from_str(&json_a).unwrap();
        assert_eq!(back, a);
        assert_eq!(serde_json::to_string(&back).unwrap(), json_a);
    }

    #[test]
    fn mass_conservation_along_traces() {
        let payoff = SetExpr::clopen(ClopenSet::cylinder(node("111111")));
        let trace = referee(
            &EvenSplitter,
            &FirstNonzero,
            &rat(1, 3),
            &payoff,
            &DyadicMeasure::fair(),
            Variant::Plain,
            5,
        );
        let mut budget: Option<Rational> = None;
        for round in &trace.rounds {
            if let Some(b) = &budget {
                assert_eq!(round.split.total(), *b);
            }
            let side = round.side.as_ref().unwrap();
            let chosen = round.split.masses[side.index as usize].clone();
            assert!(chosen.is_positive());
            budget = Some(chosen);
        }
    }
}
