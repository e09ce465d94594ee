//! Constructive strategies, certificates, the winner decision procedure,
//! the grid-minimax oracle, and the strategy transformations.

mod adversaries;
mod certificates;
mod decide;
mod minimax;
mod players;
mod transforms;

pub use adversaries::{GreedySider, GreedySplitter, RandomSider, RandomSplitter};
pub use certificates::{
    extract_scaled_measure, extract_tree, verify_mass_witness, verify_tree_witness, Certificate,
    CertificateAudit, ExtractError, MassWitness, TreeWitness,
};
pub use decide::{decide_by_measure, DecideError, Decision};
pub use minimax::{grid_minimax, GridOutcome, MinimaxError};
pub use players::{ClosedSetSplitter, CoverAvoider, PlayerError, ScaledMeasurePlayer};
pub use transforms::{
    intersect_strategies, rationalize_strategy, swap_one_to_two, swap_two_to_one, Intersected,
    RealMoveAdapter, SwappedToOne, SwappedToTwo, TransformError,
};

use crate::game::{SideStrategy, SplitStrategy};
use crate::measure::DyadicMeasure;
use crate::rational::Rational;
use crate::scaled::ScaledMeasure;
use crate::sets::{ClopenSet, ClosedTreeKind};
use serde::{Deserialize, Serialize};

/// A reconstructable strategy description: the wire format for the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StrategySpec {
    /// Player I confining play to a closed set.
    ClosedSetPlayer {
        tree: ClosedTreeKind,
        stake: Rational,
        slack: Rational,
    },
    /// Player I replaying an explicit scaled measure.
    ScaledMeasurePlayer { scaled: ScaledMeasure },
    /// Player II avoiding an open cover.
    CoverAvoider { cover: ClopenSet, stake: Rational },
    /// Seeded random legal splitter (player I).
    RandomSplitter { seed: u64 },
    /// Seeded random side picker (player II).
    RandomSider { seed: u64 },
    /// Greedy splitter funneling mass toward a clopen target (player I).
    GreedySplitter { target: ClopenSet },
    /// Greedy side picker chasing a clopen target (player II).
    GreedySider { target: ClopenSet },
}

/// Failure to realize a strategy spec.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("spec names a player-II strategy where player I is required")]
    NotASplitter,
    #[error("spec names a player-I strategy where player II is required")]
    NotASider,
    #[error(transparent)]
    Player(#[from] PlayerError),
}

impl StrategySpec {
    /// Realizes a player-I strategy.
    pub fn build_splitter(&self, mu: &DyadicMeasure) -> Result<Box<dyn SplitStrategy>, SpecError> {
        match self {
            StrategySpec::ClosedSetPlayer { tree, stake, slack } => Ok(Box::new(
                ClosedSetSplitter::new(mu, tree.clone(), stake.clone(), slack.clone())?,
            )),
            StrategySpec::ScaledMeasurePlayer { scaled } => Ok(Box::new(ScaledMeasurePlayer {
                scaled: scaled.clone(),
            })),
            StrategySpec::RandomSplitter { seed } => Ok(Box::new(RandomSplitter::new(*seed))),
            StrategySpec::GreedySplitter { target } => Ok(Box::new(GreedySplitter {
                target: target.clone(),
            })),
            _ => Err(SpecError::NotASplitter),
        }
    }

    /// Realizes a player-II strategy.
    pub fn build_sider(&self, mu: &DyadicMeasure) -> Result<Box<dyn SideStrategy>, SpecError> {
        match self {
            StrategySpec::CoverAvoider { cover, stake } => Ok(Box::new(CoverAvoider::new(
                mu,
                cover.clone(),
                stake.clone(),
            )?)),
            StrategySpec::RandomSider { seed } => Ok(Box::new(RandomSider::new(*seed))),
            StrategySpec::GreedySider { target } => Ok(Box::new(GreedySider {
                target: target.clone(),
            })),
            _ => Err(SpecError::NotASider),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::node;
    use crate::rational::rat;

    #[test]
    fn specs_round_trip_and_build() {
        let mu = DyadicMeasure::fair();
        let specs = vec![
            StrategySpec::ClosedSetPlayer {
                tree: ClosedTreeKind::FromClopen {
                    set: ClopenSet::cylinder(node("0")),
                },
                stake: rat(1, 4),
                slack: rat(1, 4),
            },
            StrategySpec::CoverAvoider {
                cover: ClopenSet::cylinder(node("00")),
                stake: rat(1, 2),
            },
            StrategySpec::RandomSplitter { seed: 11 },
            StrategySpec::RandomSider { seed: 12 },
        ];
        for spec in specs {
            let json = serde_json::to_string(&spec).unwrap();
            let back: StrategySpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back, spec);
            assert_eq!(serde_json::to_string(&back).unwrap(), json);
            match &spec {
                StrategySpec::ClosedSetPlayer { .. }
                | StrategySpec::ScaledMeasurePlayer { .. }
                | StrategySpec::RandomSplitter { .. }
                | StrategySpec::GreedySplitter { .. } => {
                    spec.build_splitter(&mu).unwrap();
                    assert!(spec.build_sider(&mu).is_err());
                }
                _ => {
                    spec.build_sider(&mu).unwrap();
                    assert!(spec.build_splitter(&mu).is_err());
                }
            }
        }
    }
}
