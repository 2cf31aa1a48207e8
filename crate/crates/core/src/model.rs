//! The Lagrangian family `L = ½q̇² − ½ω²q² − g·V(q, q̇, q̈)`, its
//! Euler–Lagrange expression and Ostrogradski momenta.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{rat, JetPoly, JetVar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("potential must satisfy d²V/d(q̈)² ≠ 0 (second derivatives have to enter the interaction); got V = {0}")]
    NoSecondDerivative(String),
    #[error("potential may only depend on q, q̇ and q̈; got V = {0}")]
    JetOrderTooHigh(String),
}

/// The interaction `V(q, q̇, q̈)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PotentialSpec {
    /// `q^k q̇^l q̈^m`.
    Monomial { k: u32, l: u32, m: u32 },
    General(JetPoly),
}

impl PotentialSpec {
    pub fn monomial(k: u32, l: u32, m: u32) -> Self {
        PotentialSpec::Monomial { k, l, m }
    }

    pub fn to_jet(&self) -> JetPoly {
        match *self {
            PotentialSpec::Monomial { k, l, m } => JetPoly::monomial(k, l, m, 0),
            PotentialSpec::General(ref p) => p.clone(),
        }
    }

    pub fn exponents(&self) -> Option<(u32, u32, u32)> {
        match *self {
            PotentialSpec::Monomial { k, l, m } => Some((k, l, m)),
            PotentialSpec::General(_) => None,
        }
    }

    /// `true` for the `q·q̈²` model whose transformation family is tabulated.
    pub fn is_q_qddot_squared(&self) -> bool {
        self.exponents() == Some((1, 0, 2))
    }

    fn validate(&self) -> Result<(), ModelError> {
        let v = self.to_jet();
        if v.max_power(JetVar::Q3) > 0 || v.max_power(JetVar::Q4) > 0 {
            return Err(ModelError::JetOrderTooHigh(v.to_string()));
        }
        let d2 = v.differentiate(JetVar::QDDot).differentiate(JetVar::QDDot);
        if d2.is_zero() {
            return Err(ModelError::NoSecondDerivative(v.to_string()));
        }
        Ok(())
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_jet())
    }
}

/// A validated model together with its perturbative truncation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    potential: PotentialSpec,
    order: usize,
}

impl ModelSpec {
    pub fn new(potential: PotentialSpec, order: usize) -> Result<Self, ModelError> {
        potential.validate()?;
        Ok(ModelSpec { potential, order })
    }

    /// `V = q q̈²`.
    pub fn q_qddot_squared(order: usize) -> Self {
        Self::new(PotentialSpec::monomial(1, 0, 2), order).expect("valid potential")
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn with_order(&self, order: usize) -> Self {
        ModelSpec {
            potential: self.potential.clone(),
            order,
        }
    }

    /// Total degree `a = k + l + m` of a monomial potential.
    pub fn degree(&self) -> Option<u32> {
        self.potential.exponents().map(|(k, l, m)| k + l + m)
    }

    /// `l + 2m − 2`: the ω power each order of g adds for a monomial potential.
    pub fn frequency_step(&self) -> Option<i32> {
        self.potential
            .exponents()
            .map(|(_, l, m)| l as i32 + 2 * m as i32 - 2)
    }

    /// Phase degree of the order-n coefficient of f, `n(a−2)+1`.
    pub fn f_degree(&self, n: usize) -> Option<i64> {
        self.degree().map(|a| n as i64 * (a as i64 - 2) + 1)
    }
}

/// `base + g·coupling` over jet polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoupledJet {
    pub base: JetPoly,
    pub coupling: JetPoly,
}

impl CoupledJet {
    pub fn new(base: JetPoly, coupling: JetPoly) -> Self {
        CoupledJet { base, coupling }
    }

    /// The `g → 0` limit.
    pub fn free_part(&self) -> &JetPoly {
        &self.base
    }

    pub fn differentiate(&self, v: JetVar) -> CoupledJet {
        CoupledJet::new(self.base.differentiate(v), self.coupling.differentiate(v))
    }

    pub fn total_derivative(&self) -> CoupledJet {
        CoupledJet::new(
            self.base.total_derivative().expect("jet order within q⁽⁴⁾"),
            self.coupling.total_derivative().expect("jet order within q⁽⁴⁾"),
        )
    }

    pub fn add(&self, other: &CoupledJet) -> CoupledJet {
        CoupledJet::new(&self.base + &other.base, &self.coupling + &other.coupling)
    }

    pub fn sub(&self, other: &CoupledJet) -> CoupledJet {
        CoupledJet::new(&self.base - &other.base, &self.coupling - &other.coupling)
    }

    pub fn neg(&self) -> CoupledJet {
        CoupledJet::new(-&self.base, -&self.coupling)
    }

    /// Numeric value with ω and g bound.
    pub fn eval(&self, jet: &[f64; 5], omega: f64, g: f64) -> f64 {
        self.base.eval(jet, omega) + g * self.coupling.eval(jet, omega)
    }
}

impl fmt::Display for CoupledJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + g*({})", self.base, self.coupling)
    }
}

fn harmonic_lagrangian() -> JetPoly {
    let qd = JetPoly::var(JetVar::QDot);
    let q = JetPoly::var(JetVar::Q);
    &(&qd * &qd).scale(&rat(1, 2)) - &(&q * &q).scale(&rat(1, 2)).scale_omega(2)
}

/// `½q̇² − ½ω²q² − gV`.
pub fn lagrangian_value(spec: &ModelSpec) -> CoupledJet {
    CoupledJet::new(harmonic_lagrangian(), -&spec.potential.to_jet())
}

/// `q̈ + ω²q + g(∂V/∂q − d/dt ∂V/∂q̇ + d²/dt² ∂V/∂q̈)`.
pub fn euler_lagrange(spec: &ModelSpec) -> CoupledJet {
    let v = spec.potential.to_jet();
    let base = &JetPoly::var(JetVar::QDDot) + &JetPoly::var(JetVar::Q).scale_omega(2);
    let dv_dq = v.differentiate(JetVar::Q);
    let dv_dqd = v.differentiate(JetVar::QDot);
    let dv_dqdd = v.differentiate(JetVar::QDDot);
    let coupling = &(&dv_dq - &dv_dqd.total_derivative().expect("jet order"))
        + &dv_dqdd
            .total_derivative()
            .and_then(|p| p.total_derivative())
            .expect("jet order");
    CoupledJet::new(base, coupling)
}

/// Ostrogradski momenta `(p1, p2)`:
/// `p1 = q̇ + g(−∂V/∂q̇ + d/dt ∂V/∂q̈)`, `p2 = −g ∂V/∂q̈`.
pub fn ostrogradski_momenta(spec: &ModelSpec) -> (CoupledJet, CoupledJet) {
    let v = spec.potential.to_jet();
    let dv_dqdd = v.differentiate(JetVar::QDDot);
    let p1 = CoupledJet::new(
        JetPoly::var(JetVar::QDot),
        &(-&v.differentiate(JetVar::QDot)) + &dv_dqdd.total_derivative().expect("jet order"),
    );
    let p2 = CoupledJet::new(JetPoly::zero(), -&dv_dqdd);
    (p1, p2)
}

/// Generic variational derivative `∂L/∂q − d/dt ∂L/∂q̇ + d²/dt² ∂L/∂q̈` of a
/// second-order Lagrangian.
pub fn variational_derivative(lagrangian: &CoupledJet) -> CoupledJet {
    let dq = lagrangian.differentiate(JetVar::Q);
    let dqd = lagrangian.differentiate(JetVar::QDot).total_derivative();
    let dqdd = lagrangian
        .differentiate(JetVar::QDDot)
        .total_derivative()
        .total_derivative();
    dq.sub(&dqd).add(&dqdd)
}

/// Momentum conjugate to q in Ostrogradski form, `∂L/∂q̇ − d/dt ∂L/∂q̈`.
pub fn first_momentum_of(lagrangian: &CoupledJet) -> CoupledJet {
    lagrangian
        .differentiate(JetVar::QDot)
        .sub(&lagrangian.differentiate(JetVar::QDDot).total_derivative())
}

/// Momentum conjugate to q̇ in Ostrogradski form, `∂L/∂q̈`.
pub fn second_momentum_of(lagrangian: &CoupledJet) -> CoupledJet {
    lagrangian.differentiate(JetVar::QDDot)
}

impl Serialize for PotentialSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Serializable summary of a model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "camelCase")]
pub struct ModelSummary {
    pub potential: String,
    pub order: usize,
    pub degree: Option<u32>,
}

impl From<&ModelSpec> for ModelSummary {
    fn from(spec: &ModelSpec) -> Self {
        ModelSummary {
            potential: spec.potential.to_string(),
            order: spec.order,
            degree: spec.degree(),
        }
    }
}
