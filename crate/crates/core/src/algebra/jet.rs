//! Polynomials in the jet variables `q, q̇, q̈, q⃛, q⁽⁴⁾`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};

use super::phase::{PhaseMonomial, PhasePoly};
use super::rational::{format_rational, int, to_f64, Rational};
use super::series::GSeries;
use super::AlgebraError;

/// Highest derivative tracked. `V(q, q̇, q̈)` never produces more than q⁽⁴⁾.
pub const JET_LEN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JetVar {
    Q = 0,
    QDot = 1,
    QDDot = 2,
    Q3 = 3,
    Q4 = 4,
}

impl JetVar {
    pub const ALL: [JetVar; JET_LEN] = [JetVar::Q, JetVar::QDot, JetVar::QDDot, JetVar::Q3, JetVar::Q4];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<JetVar> {
        JetVar::ALL.get(i).copied()
    }

    fn symbol(self) -> &'static str {
        match self {
            JetVar::Q => "q",
            JetVar::QDot => "qd",
            JetVar::QDDot => "qdd",
            JetVar::Q3 => "q3",
            JetVar::Q4 => "q4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetMonomial {
    pub pows: [u32; JET_LEN],
    pub omega: i32,
}

impl JetMonomial {
    pub fn degree(&self) -> u32 {
        self.pows.iter().sum()
    }

    pub fn pow(&self, v: JetVar) -> u32 {
        self.pows[v.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JetPoly {
    terms: BTreeMap<JetMonomial, Rational>,
}

impl JetPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, [0; JET_LEN], 0)
    }

    pub fn term(c: Rational, pows: [u32; JET_LEN], omega: i32) -> Self {
        let mut p = Self::zero();
        p.add_term(JetMonomial { pows, omega }, c);
        p
    }

    pub fn var(v: JetVar) -> Self {
        let mut pows = [0; JET_LEN];
        pows[v.index()] = 1;
        Self::term(int(1), pows, 0)
    }

    /// `ω^omega · q^k q̇^l q̈^m`.
    pub fn monomial(k: u32, l: u32, m: u32, omega: i32) -> Self {
        Self::term(int(1), [k, l, m, 0, 0], omega)
    }

    pub fn add_term(&mut self, m: JetMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetMonomial, &Rational)> {
        self.terms.iter()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero();
        for (m, k) in &self.terms {
            out.add_term(*m, k * c);
        }
        out
    }

    /// Multiply by `ω^k`.
    pub fn scale_omega(&self, k: i32) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(JetMonomial { pows: m.pows, omega: m.omega + k }, c.clone());
        }
        out
    }

    /// Highest jet variable appearing with positive power.
    pub fn jet_order(&self) -> Option<JetVar> {
        self.terms
            .keys()
            .filter_map(|m| (0..JET_LEN).rev().find(|&i| m.pows[i] > 0))
            .max()
            .and_then(JetVar::from_index)
    }

    pub fn max_power(&self, v: JetVar) -> u32 {
        self.terms.keys().map(|m| m.pow(v)).max().unwrap_or(0)
    }

    pub fn differentiate(&self, v: JetVar) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.pows[v.index()];
            if e == 0 {
                continue;
            }
            let mut dm = *m;
            dm.pows[v.index()] -= 1;
            out.add_term(dm, c * int(e as i64));
        }
        out
    }

    /// Formal total time derivative, shifting every jet variable up a level.
    pub fn total_derivative(&self) -> Result<Self, AlgebraError> {
        if self.max_power(JetVar::Q4) > 0 {
            return Err(AlgebraError::JetOrderExceeded);
        }
        let mut out = Self::zero();
        for i in 0..JET_LEN - 1 {
            let v = JetVar::ALL[i];
            let next = JetPoly::var(JetVar::ALL[i + 1]);
            out = &out + &(&self.differentiate(v) * &next);
        }
        Ok(out)
    }

    /// Restriction to the `(q, q̇)` variables; fails if a higher jet variable
    /// appears.
    pub fn to_phase(&self) -> Option<PhasePoly> {
        let mut out = PhasePoly::zero();
        for (m, c) in &self.terms {
            if m.pows[2..].iter().any(|&e| e > 0) {
                return None;
            }
            out.add_term(PhaseMonomial::new(m.pows[0], m.pows[1], m.omega), c.clone());
        }
        Some(out)
    }

    pub fn from_phase(p: &PhasePoly) -> Self {
        let mut out = Self::zero();
        for (m, c) in p.terms() {
            out.add_term(
                JetMonomial {
                    pows: [m.q, m.qdot, 0, 0, 0],
                    omega: m.omega,
                },
                c.clone(),
            );
        }
        out
    }

    /// Substitute a g-series for every jet variable of positive degree.
    ///
    /// `q` and `q̇` map to themselves unless overridden.
    pub fn substitute(
        &self,
        assignments: &BTreeMap<JetVar, GSeries>,
        order: usize,
    ) -> Result<GSeries, AlgebraError> {
        let mut subs: Vec<Option<GSeries>> = vec![None; JET_LEN];
        subs[0] = Some(GSeries::from_poly(PhasePoly::q(), order));
        subs[1] = Some(GSeries::from_poly(PhasePoly::qdot(), order));
        for (v, s) in assignments {
            if s.order() != order {
                return Err(AlgebraError::OrderMismatch {
                    left: order,
                    right: s.order(),
                });
            }
            subs[v.index()] = Some(s.clone());
        }
        let mut powers: Vec<Vec<GSeries>> = vec![vec![GSeries::one(order)]; JET_LEN];
        let mut out = GSeries::zero(order);
        for (m, c) in &self.terms {
            let mut acc = GSeries::from_poly(PhasePoly::term(c.clone(), 0, 0, m.omega), order);
            for (i, &e) in m.pows.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let base = subs[i]
                    .as_ref()
                    .ok_or(AlgebraError::MissingAssignment(JetVar::ALL[i]))?;
                let cache = &mut powers[i];
                while cache.len() <= e as usize {
                    let next = &cache[cache.len() - 1] * base;
                    cache.push(next);
                }
                acc = &acc * &cache[e as usize];
            }
            out = &out + &acc;
        }
        Ok(out)
    }

    /// Numeric value with ω bound; `jet[i]` is the value of the i-th derivative.
    pub fn eval(&self, jet: &[f64; JET_LEN], omega: f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = to_f64(c) * omega.powi(m.omega);
                for (x, &e) in jet.iter().zip(&m.pows) {
                    v *= x.powi(e as i32);
                }
                v
            })
            .sum()
    }
}

impl fmt::Display for JetPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let mut factors = vec![format_rational(&c.abs())];
            if m.omega != 0 {
                factors.push(format!("w^{}", m.omega));
            }
            for v in JetVar::ALL {
                match m.pow(v) {
                    0 => {}
                    1 => factors.push(v.symbol().to_string()),
                    e => factors.push(format!("{}^{e}", v.symbol())),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl<'a> Add<&'a JetPoly> for &'a JetPoly {
    type Output = JetPoly;
    fn add(self, rhs: &JetPoly) -> JetPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a JetPoly> for &'a JetPoly {
    type Output = JetPoly;
    fn sub(self, rhs: &JetPoly) -> JetPoly {
        self + &(-rhs)
    }
}

impl Neg for &JetPoly {
    type Output = JetPoly;
    fn neg(self) -> JetPoly {
        self.scale(&int(-1))
    }
}

impl<'a> Mul<&'a JetPoly> for &'a JetPoly {
    type Output = JetPoly;
    fn mul(self, rhs: &JetPoly) -> JetPoly {
        let mut out = JetPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let mut pows = ma.pows;
                for (p, e) in pows.iter_mut().zip(&mb.pows) {
                    *p += e;
                }
                out.add_term(
                    JetMonomial {
                        pows,
                        omega: ma.omega + mb.omega,
                    },
                    ca * cb,
                );
            }
        }
        out
    }
}
