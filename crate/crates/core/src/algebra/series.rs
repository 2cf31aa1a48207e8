//! Power series in the coupling g, truncated at a fixed order, with
//! phase-polynomial coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::phase::{CompiledPoly, PhaseMonomial, PhasePoly, PhaseVar};
use super::rational::{to_f64, Rational};
use super::AlgebraError;

/// `Σ_{n=0}^{order} gⁿ · coeffs[n]`; everything past `g^order` is discarded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GSeries {
    order: usize,
    coeffs: Vec<PhasePoly>,
}

impl GSeries {
    pub fn zero(order: usize) -> Self {
        GSeries {
            order,
            coeffs: vec![PhasePoly::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::from_poly(PhasePoly::one(), order)
    }

    /// `p` as the g⁰ coefficient.
    pub fn from_poly(p: PhasePoly, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = p;
        s
    }

    /// `gⁿ · p` (zero when `n > order`).
    pub fn monomial(p: PhasePoly, n: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if n <= order {
            s.coeffs[n] = p;
        }
        s
    }

    /// Build from explicit coefficients; missing high orders are zero and
    /// extra ones are dropped.
    pub fn from_coeffs(coeffs: Vec<PhasePoly>, order: usize) -> Self {
        let mut s = Self::zero(order);
        for (n, c) in coeffs.into_iter().enumerate().take(order + 1) {
            s.coeffs[n] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[PhasePoly] {
        &self.coeffs
    }

    /// Coefficient of gⁿ; zero past the truncation order.
    pub fn coeff(&self, n: usize) -> PhasePoly {
        self.coeffs.get(n).cloned().unwrap_or_default()
    }

    pub fn coeff_ref(&self, n: usize) -> &PhasePoly {
        &self.coeffs[n]
    }

    pub fn set_coeff(&mut self, n: usize, p: PhasePoly) {
        if n <= self.order {
            self.coeffs[n] = p;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(PhasePoly::is_zero)
    }

    /// Lowest n with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Same coefficients at another truncation order (zero-padded or cut).
    pub fn with_order(&self, order: usize) -> Self {
        Self::from_coeffs(self.coeffs.clone(), order)
    }

    pub fn checked_add(&self, rhs: &GSeries) -> Result<GSeries, AlgebraError> {
        self.same_order(rhs)?;
        Ok(GSeries {
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn checked_sub(&self, rhs: &GSeries) -> Result<GSeries, AlgebraError> {
        self.same_order(rhs)?;
        Ok(GSeries {
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Truncated Cauchy product.
    pub fn checked_mul(&self, rhs: &GSeries) -> Result<GSeries, AlgebraError> {
        self.same_order(rhs)?;
        let mut out = GSeries::zero(self.order);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(self.order + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                out.coeffs[i + j] += &(a * b);
            }
        }
        Ok(out)
    }

    fn same_order(&self, rhs: &GSeries) -> Result<(), AlgebraError> {
        if self.order != rhs.order {
            return Err(AlgebraError::OrderMismatch {
                left: self.order,
                right: rhs.order,
            });
        }
        Ok(())
    }

    pub fn scale(&self, c: &Rational) -> GSeries {
        self.map(|p| p.scale(c))
    }

    /// Multiply every coefficient by the polynomial `p`.
    pub fn mul_poly(&self, p: &PhasePoly) -> GSeries {
        self.map(|c| c * p)
    }

    /// Multiply by `g^k`, dropping what falls past the truncation order.
    pub fn shift(&self, k: usize) -> GSeries {
        let mut out = GSeries::zero(self.order);
        for n in 0..=self.order {
            if n + k <= self.order {
                out.coeffs[n + k] = self.coeffs[n].clone();
            }
        }
        out
    }

    pub fn differentiate(&self, var: PhaseVar) -> GSeries {
        self.map(|p| p.differentiate(var))
    }

    pub fn map<F: FnMut(&PhasePoly) -> PhasePoly>(&self, f: F) -> GSeries {
        GSeries {
            order: self.order,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> GSeries {
        let mut acc = GSeries::one(self.order);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplicative inverse. Requires the g⁰ coefficient to be exactly 1.
    pub fn inverse(&self) -> Result<GSeries, AlgebraError> {
        if self.coeffs[0] != PhasePoly::one() {
            return Err(AlgebraError::NonUnitConstant(self.coeffs[0].to_string()));
        }
        // 1/(1+u) = Σ (−u)^k with u = O(g)
        let mut minus_u = -self;
        minus_u.coeffs[0] = PhasePoly::zero();
        let mut acc = GSeries::one(self.order);
        let mut power = GSeries::one(self.order);
        for _ in 0..self.order {
            power = &power * &minus_u;
            acc = &acc + &power;
        }
        Ok(acc)
    }

    /// Substitute `q ↦ q_sub`, `q̇ ↦ qdot_sub` into every coefficient and
    /// re-collect by powers of g.
    pub fn compose(&self, q_sub: &GSeries, qdot_sub: &GSeries) -> Result<GSeries, AlgebraError> {
        self.same_order(q_sub)?;
        self.same_order(qdot_sub)?;
        let mut powers = PowerCache::new(q_sub.clone(), qdot_sub.clone());
        let mut out = GSeries::zero(self.order);
        for (n, p) in self.coeffs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let composed = powers.compose_poly(p);
            out = &out + &composed.shift(n);
        }
        Ok(out)
    }

    /// Bind ω and g to numbers.
    pub fn compile(&self, omega: f64, g: f64) -> CompiledPoly {
        let mut out = CompiledPoly::default();
        let mut gn = 1.0;
        for p in &self.coeffs {
            for (m, c) in p.terms() {
                out.push(to_f64(c) * omega.powi(m.omega) * gn, m.q, m.qdot);
            }
            gn *= g;
        }
        out
    }

    pub fn eval(&self, q: f64, qdot: f64, omega: f64, g: f64) -> f64 {
        self.compile(omega, g).eval(q, qdot)
    }
}

/// Memoized powers of two substitution series.
pub(crate) struct PowerCache {
    q_pows: Vec<GSeries>,
    qdot_pows: Vec<GSeries>,
}

impl PowerCache {
    pub(crate) fn new(q_sub: GSeries, qdot_sub: GSeries) -> Self {
        let order = q_sub.order;
        PowerCache {
            q_pows: vec![GSeries::one(order), q_sub],
            qdot_pows: vec![GSeries::one(order), qdot_sub],
        }
    }

    fn get(pows: &mut Vec<GSeries>, e: u32) -> GSeries {
        while pows.len() <= e as usize {
            let next = &pows[pows.len() - 1] * &pows[1];
            pows.push(next);
        }
        pows[e as usize].clone()
    }

    pub(crate) fn compose_poly(&mut self, p: &PhasePoly) -> GSeries {
        let order = self.q_pows[0].order;
        let mut out = GSeries::zero(order);
        for (m, c) in p.terms() {
            let qp = Self::get(&mut self.q_pows, m.q);
            let vp = Self::get(&mut self.qdot_pows, m.qdot);
            let weight = PhasePoly::from_terms([(PhaseMonomial::new(0, 0, m.omega), c.clone())]);
            out = &out + &(&qp * &vp).mul_poly(&weight);
        }
        out
    }
}

impl<'a> Add<&'a GSeries> for &'a GSeries {
    type Output = GSeries;
    fn add(self, rhs: &GSeries) -> GSeries {
        self.checked_add(rhs).expect("GSeries truncation orders differ")
    }
}

impl<'a> Sub<&'a GSeries> for &'a GSeries {
    type Output = GSeries;
    fn sub(self, rhs: &GSeries) -> GSeries {
        self.checked_sub(rhs).expect("GSeries truncation orders differ")
    }
}

impl<'a> Mul<&'a GSeries> for &'a GSeries {
    type Output = GSeries;
    fn mul(self, rhs: &GSeries) -> GSeries {
        self.checked_mul(rhs).expect("GSeries truncation orders differ")
    }
}

impl Neg for &GSeries {
    type Output = GSeries;
    fn neg(self) -> GSeries {
        self.map(|p| -p)
    }
}

impl Add for GSeries {
    type Output = GSeries;
    fn add(self, rhs: GSeries) -> GSeries {
        &self + &rhs
    }
}

impl Sub for GSeries {
    type Output = GSeries;
    fn sub(self, rhs: GSeries) -> GSeries {
        &self - &rhs
    }
}

impl Mul for GSeries {
    type Output = GSeries;
    fn mul(self, rhs: GSeries) -> GSeries {
        &self * &rhs
    }
}

/// `true` when `a·b` is exactly one through the common truncation order.
pub fn is_reciprocal(a: &GSeries, b: &GSeries) -> bool {
    a.checked_mul(b)
        .map(|p| p == GSeries::one(a.order()))
        .unwrap_or(false)
}

impl GSeries {
    /// `Σₙ gⁿ·cₙ` evaluated exactly at a rational g (ω left symbolic).
    pub fn at_coupling(&self, g: &Rational) -> PhasePoly {
        let mut out = PhasePoly::zero();
        let mut gn = Rational::one();
        for c in &self.coeffs {
            out += &c.scale(&gn);
            gn = &gn * g;
        }
        out
    }
}
