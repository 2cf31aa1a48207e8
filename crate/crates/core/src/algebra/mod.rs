//! Exact arithmetic substrate: rationals, ω-graded phase and jet polynomials,
//! and g-truncated series.

mod jet;
mod phase;
pub mod rational;
mod series;

pub use jet::{JetMonomial, JetPoly, JetVar, JET_LEN};
pub use phase::{CompiledPoly, PhaseMonomial, PhasePoly, PhaseVar};
pub use rational::{int, rat, Rational};
pub use series::{is_reciprocal, GSeries};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("series truncation orders differ ({left} vs {right})")]
    OrderMismatch { left: usize, right: usize },
    #[error("no assignment for jet variable {0:?}")]
    MissingAssignment(JetVar),
    #[error("series inverse needs a unit constant term, found {0}")]
    NonUnitConstant(String),
    #[error("total derivative would exceed the fourth time derivative")]
    JetOrderExceeded,
    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
}
