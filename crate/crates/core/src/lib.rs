//! Exact-rational engine for the mass-splitting game on Cantor space.
//!
//! Player I repeatedly splits a rational mass between the two children of
//! the current node; player II picks a child with nonzero mass. Whether the
//! opening mass can exceed a stake `s` while confining II to a payoff set's
//! complement characterizes inner measure, and the constructive strategy
//! transformations built on that characterization prove the convergence and
//! divergence halves of Borel-Cantelli, a strong second-moment lower bound
//! for limsup events, Fubini's theorem for product measures, and an
//! unfolding/uniformization principle - all at finite depth with certificate
//! semantics and zero floating point.
//!
//! Entry points:
//! - [`measure::DyadicMeasure`], [`sets::SetExpr`]: measures and payoffs.
//! - [`game`]: positions, move legality, the referee, traces.
//! - [`strategy`]: constructive strategies, certificates, the grid oracle.
//! - [`bc`]: Borel-Cantelli pipelines and the second-moment side/cutoff
//!   machinery.
//! - [`fubini`]: the four-quadrant paired game transformers.
//! - [`unfold`]: tree surgery for the unfolded game and continuous
//!   uniformization.
//! - [`suites`]: the seeded verification suites exposed by the CLI.

pub mod bc;
pub mod fubini;
pub mod game;
pub mod measure;
pub mod node;
pub mod rational;
pub mod sets;
pub mod stern;
pub mod strategy;
pub mod suites;
pub mod unfold;

mod scaled;

pub use measure::{Branch, DyadicMeasure, MeasureSpec};
pub use node::Node;
pub use rational::Rational;
pub use scaled::{ScaledMeasure, ValidationReport};
pub use sets::{ClopenSet, ClosedTreeKind, ExplicitTree, FamilySpec, Region, SetExpr};
pub use stern::simplest_in_open;
