//! Winner decision for clopen payoffs: the inner measure of the payoff's
//! complement exceeds the stake exactly when player I can win, and the
//! construction is effective in both directions.

use super::certificates::{extract_scaled_measure, extract_tree, Certificate};
use super::players::{ClosedSetSplitter, CoverAvoider};
use super::StrategySpec;
use crate::game::{Player, Variant};
use crate::measure::DyadicMeasure;
use crate::rational::Rational;
use crate::sets::{ClosedTreeKind, SetExpr};
use serde::{Deserialize, Serialize};

/// Decision output: the winner, a reconstructable strategy, and the
/// extracted certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Decision {
    pub winner: Player,
    /// Exact measure of the payoff's complement.
    pub complement_mass: Rational,
    pub stake: Rational,
    pub strategy: StrategySpec,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DecideError {
    #[error("payoff is not decided at finite depth (not clopen)")]
    UnsupportedPayoff,
    #[error("stake {0} is not inside [0, 1)")]
    BadStake(Rational),
    #[error("construction failed: {0}")]
    Construction(String),
}

/// Decides the game for a clopen payoff at the given stake and returns the
/// winner with a certificate extracted at `depth`.
pub fn decide_by_measure(
    mu: &DyadicMeasure,
    payoff: &SetExpr,
    stake: &Rational,
    depth: usize,
) -> Result<Decision, DecideError> {
    if stake.is_negative() || *stake >= Rational::one() {
        return Err(DecideError::BadStake(stake.clone()));
    }
    let clopen = payoff.as_clopen().ok_or(DecideError::UnsupportedPayoff)?;
    let complement = clopen.complement();
    let complement_mass = complement.measure(mu);
    let err = |e: String| DecideError::Construction(e);

    if complement_mass > *stake {
        // Player I confines play to the complement; the slack is half the
        // relative room between the stake and the complement's mass.
        let slack = (complement_mass.clone() - stake.clone())
            / (Rational::from_int(2) * complement_mass.clone());
        let tree = ClosedTreeKind::FromClopen {
            set: complement.clone(),
        };
        let sigma = ClosedSetSplitter::new(mu, tree.clone(), stake.clone(), slack.clone())
            .map_err(|e| err(e.to_string()))?;
        let witness = extract_scaled_measure(&sigma, mu, stake, depth, Variant::Plain)
            .map_err(|e| err(e.to_string()))?;
        Ok(Decision {
            winner: Player::One,
            complement_mass,
            stake: stake.clone(),
            strategy: StrategySpec::ClosedSetPlayer {
                tree,
                stake: stake.clone(),
                slack,
            },
            certificate: Certificate::MassWitness(witness),
        })
    } else {
        // Player II avoids the complement as an open cover; certificate
        // slack is half the room below 1.
        let slack = (Rational::one() - stake.clone()) / Rational::from_int(2);
        let tau = CoverAvoider::new(mu, complement.clone(), stake.clone())
            .map_err(|e| err(e.to_string()))?;
        let witness = extract_tree(&tau, mu, stake, &slack, depth, 16)
            .map_err(|e| err(e.to_string()))?;
        Ok(Decision {
            winner: Player::Two,
            complement_mass,
            stake: stake.clone(),
            strategy: StrategySpec::CoverAvoider {
                cover: complement,
                stake: stake.clone(),
            },
            certificate: Certificate::TreeWitness(witness),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::node;
    use crate::rational::rat;
    use crate::sets::ClopenSet;

    #[test]
    fn one_wins_below_complement_mass() {
        let mu = DyadicMeasure::fair();
        let payoff = SetExpr::clopen(ClopenSet::cylinder(node("1")));
        let d = decide_by_measure(&mu, &payoff, &rat(1, 4), 4).unwrap();
        assert_eq!(d.winner, Player::One);
        assert_eq!(d.complement_mass, rat(1, 2));
    }

    #[test]
    fn two_wins_at_the_boundary() {
        let mu = DyadicMeasure::fair();
        let payoff = SetExpr::clopen(ClopenSet::cylinder(node("1")));
        let d = decide_by_measure(&mu, &payoff, &rat(1, 2), 4).unwrap();
        assert_eq!(d.winner, Player::Two);
    }

    #[test]
    fn biased_coin_close_call() {
        // Payoff: everything except the 11-cylinder; its complement has
        // mass (1/3)^2 = 1/9 > 1/10, so player I wins at stake 1/10.
        let mu = DyadicMeasure::bernoulli(rat(1, 3));
        let payoff = SetExpr::clopen(ClopenSet::cylinder(node("11"))).complement();
        let d = decide_by_measure(&mu, &payoff, &rat(1, 10), 4).unwrap();
        assert_eq!(d.winner, Player::One);
        assert_eq!(d.complement_mass, rat(1, 9));
    }

    #[test]
    fn non_clopen_payoff_rejected() {
        let mu = DyadicMeasure::fair();
        let payoff = SetExpr::ClosedTree {
            tree: ClosedTreeKind::ForbidSubstring {
                pattern: node("11"),
            },
        };
        assert!(matches!(
            decide_by_measure(&mu, &payoff, &rat(1, 4), 4),
            Err(DecideError::UnsupportedPayoff)
        ));
    }
}
