//! The on-shell time derivative `D = q̇∂_q + f∂_q̇`, the bracket `[F]` that
//! projects jet expressions onto the constraint surface `q̈ = f(q, q̇)`, and
//! the order-by-order solution for f.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraError, GSeries, JetPoly, JetVar, PhasePoly, PhaseVar};
use crate::model::{euler_lagrange, CoupledJet, ModelSpec};

/// `f = Σ gⁿ fₙ` with `f₀ = −ω²q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FSeries(GSeries);

impl FSeries {
    /// The harmonic solution `−ω²q` padded with zeros through `order`.
    pub fn harmonic(order: usize) -> Self {
        FSeries(GSeries::from_poly(harmonic_f(), order))
    }

    pub fn from_series(series: GSeries) -> Self {
        FSeries(series)
    }

    pub fn series(&self) -> &GSeries {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.order()
    }

    pub fn coeff(&self, n: usize) -> PhasePoly {
        self.0.coeff(n)
    }

    pub fn with_order(&self, order: usize) -> FSeries {
        FSeries(self.0.with_order(order))
    }

    /// Same series with the gⁿ coefficient zeroed (negative controls).
    pub fn without_order(&self, n: usize) -> FSeries {
        let mut s = self.0.clone();
        s.set_coeff(n, PhasePoly::zero());
        FSeries(s)
    }
}

fn harmonic_f() -> PhasePoly {
    PhasePoly::term(crate::algebra::int(-1), 1, 0, 2)
}

/// `(q̇ ∂_q + f ∂_q̇) p`, truncated at the common order.
pub fn d_apply(p: &GSeries, f: &FSeries) -> Result<GSeries, AlgebraError> {
    let qdot = GSeries::from_poly(PhasePoly::qdot(), p.order());
    let a = qdot.checked_mul(&p.differentiate(PhaseVar::Q))?;
    let b = f.series().checked_mul(&p.differentiate(PhaseVar::QDot))?;
    a.checked_add(&b)
}

/// Substitution engine for `[F]`: caches `Df` and `D²f` for one f.
pub struct Bracket<'a> {
    f: &'a FSeries,
    df: Option<GSeries>,
    d2f: Option<GSeries>,
}

impl<'a> Bracket<'a> {
    pub fn new(f: &'a FSeries) -> Self {
        Bracket { f, df: None, d2f: None }
    }

    fn df(&mut self) -> &GSeries {
        if self.df.is_none() {
            self.df = Some(d_apply(self.f.series(), self.f).expect("same order"));
        }
        self.df.as_ref().unwrap()
    }

    fn d2f(&mut self) -> &GSeries {
        if self.d2f.is_none() {
            let df = self.df().clone();
            self.d2f = Some(d_apply(&df, self.f).expect("same order"));
        }
        self.d2f.as_ref().unwrap()
    }

    /// `F(q, q̇, f, Df, D²f)`.
    pub fn apply(&mut self, expr: &JetPoly) -> GSeries {
        let order = self.f.order();
        let mut assignments = BTreeMap::new();
        if expr.max_power(JetVar::QDDot) > 0 {
            assignments.insert(JetVar::QDDot, self.f.series().clone());
        }
        if expr.max_power(JetVar::Q3) > 0 {
            assignments.insert(JetVar::Q3, self.df().clone());
        }
        if expr.max_power(JetVar::Q4) > 0 {
            assignments.insert(JetVar::Q4, self.d2f().clone());
        }
        expr.substitute(&assignments, order)
            .expect("every used jet variable is assigned")
    }

    /// `[base] + g·[coupling]`.
    pub fn apply_coupled(&mut self, expr: &CoupledJet) -> GSeries {
        let base = self.apply(&expr.base);
        let coupling = self.apply(&expr.coupling);
        &base + &coupling.shift(1)
    }
}

/// `[F]` for a single expression.
pub fn bracket(expr: &JetPoly, f: &FSeries) -> GSeries {
    Bracket::new(f).apply(expr)
}

pub fn bracket_coupled(expr: &CoupledJet, f: &FSeries) -> GSeries {
    Bracket::new(f).apply_coupled(expr)
}

/// `[EL]`: zero through the truncation order exactly when f solves the
/// consistency condition.
pub fn residual(spec: &ModelSpec, f: &FSeries) -> GSeries {
    bracket_coupled(&euler_lagrange(spec), f)
}

/// Order-by-order solution of `[EL] = 0` on the perturbative branch.
///
/// The gⁿ coefficient of `[EL]` is `fₙ + (terms built from f₀..fₙ₋₁)`, since
/// the interaction carries an explicit factor of g.
pub fn solve_constraint(spec: &ModelSpec) -> FSeries {
    let el = euler_lagrange(spec);
    let order = spec.order();
    let mut f = FSeries::harmonic(order);
    for n in 1..=order {
        let partial = f.with_order(n);
        let r = bracket_coupled(&el, &partial);
        let mut s = f.0.clone();
        s.set_coeff(n, -&r.coeff(n));
        f = FSeries(s);
    }
    f
}
