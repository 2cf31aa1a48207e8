//! Polynomials in the phase-space pair `(q, q̇)` with an explicit power of ω
//! carried on every monomial.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::{self, format_rational, int, to_f64, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseVar {
    Q,
    QDot,
}

/// `ω^omega · q^q · q̇^qdot`. The ω exponent is not part of the phase degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseMonomial {
    pub q: u32,
    pub qdot: u32,
    pub omega: i32,
}

impl PhaseMonomial {
    pub const ONE: PhaseMonomial = PhaseMonomial { q: 0, qdot: 0, omega: 0 };

    pub fn new(q: u32, qdot: u32, omega: i32) -> Self {
        PhaseMonomial { q, qdot, omega }
    }

    pub fn degree(&self) -> u32 {
        self.q + self.qdot
    }

    fn times(&self, other: &PhaseMonomial) -> PhaseMonomial {
        PhaseMonomial {
            q: self.q + other.q,
            qdot: self.qdot + other.qdot,
            omega: self.omega + other.omega,
        }
    }
}

// Graded lexicographic: total degree, then q power descending, then ω power.
impl Ord for PhaseMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.q.cmp(&self.q))
            .then_with(|| self.omega.cmp(&other.omega))
    }
}

impl PartialOrd for PhaseMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse exact polynomial in `(q, q̇)` with ω-graded monomials.
///
/// Zero coefficients are never stored, so structural equality is
/// mathematical equality.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PhasePoly {
    terms: BTreeMap<PhaseMonomial, Rational>,
}

impl PhasePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(int(1))
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, 0, 0, 0)
    }

    /// A single term `c · ω^omega · q^q · q̇^qdot`.
    pub fn term(c: Rational, q: u32, qdot: u32, omega: i32) -> Self {
        let mut p = Self::zero();
        p.add_term(PhaseMonomial::new(q, qdot, omega), c);
        p
    }

    pub fn q() -> Self {
        Self::term(int(1), 1, 0, 0)
    }

    pub fn qdot() -> Self {
        Self::term(int(1), 0, 1, 0)
    }

    pub fn var(v: PhaseVar) -> Self {
        match v {
            PhaseVar::Q => Self::q(),
            PhaseVar::QDot => Self::qdot(),
        }
    }

    pub fn from_terms<I: IntoIterator<Item = (PhaseMonomial, Rational)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: PhaseMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (graded lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&PhaseMonomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, q: u32, qdot: u32, omega: i32) -> Rational {
        self.terms
            .get(&PhaseMonomial::new(q, qdot, omega))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Coefficient of `q^q q̇^qdot` summed over every ω power, as `(coeff, ω power)`
    /// pairs. Useful when checking tables that print one ω power per monomial.
    pub fn coefficients_of(&self, q: u32, qdot: u32) -> Vec<(Rational, i32)> {
        self.terms
            .iter()
            .filter(|(m, _)| m.q == q && m.qdot == qdot)
            .map(|(m, c)| (c.clone(), m.omega))
            .collect()
    }

    /// The constant (degree-zero, ω⁰) coefficient.
    pub fn constant_term(&self) -> Rational {
        self.coefficient(0, 0, 0)
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(PhaseMonomial::degree).max()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        PhasePoly {
            terms: self.terms.iter().map(|(m, k)| (*m, k * c)).collect(),
        }
    }

    /// Multiply by `ω^k`.
    pub fn scale_omega(&self, k: i32) -> Self {
        PhasePoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (PhaseMonomial::new(m.q, m.qdot, m.omega + k), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn differentiate(&self, var: PhaseVar) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let (e, dm) = match var {
                PhaseVar::Q if m.q > 0 => (m.q, PhaseMonomial::new(m.q - 1, m.qdot, m.omega)),
                PhaseVar::QDot if m.qdot > 0 => {
                    (m.qdot, PhaseMonomial::new(m.q, m.qdot - 1, m.omega))
                }
                _ => continue,
            };
            out.add_term(dm, c * int(e as i64));
        }
        out
    }

    /// `P` with `∂ᵗP/∂q̇ᵗ = self` and every integration constant (terms of
    /// q̇-degree below `times`) set to zero.
    pub fn antiderive_qdot(&self, times: u32) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut denom = BigInt::one();
            for j in 1..=times {
                denom *= BigInt::from(m.qdot + j);
            }
            out.add_term(
                PhaseMonomial::new(m.q, m.qdot + times, m.omega),
                c / Rational::from_integer(denom),
            );
        }
        out
    }

    /// Antiderivative in q with zero integration constant.
    pub fn antiderive_q(&self) -> Self {
        self.map_terms(|m, c| {
            Some((
                PhaseMonomial::new(m.q + 1, m.qdot, m.omega),
                c / int(m.q as i64 + 1),
            ))
        })
    }

    /// `true` when no term depends on q̇.
    pub fn is_q_only(&self) -> bool {
        self.terms.keys().all(|m| m.qdot == 0)
    }

    /// Sum of the terms with `q-power + q̇-power = d`.
    pub fn homogeneous_component(&self, d: u32) -> Self {
        PhasePoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Distinct phase degrees present, ascending.
    pub fn degrees(&self) -> Vec<u32> {
        let mut ds: Vec<u32> = self.terms.keys().map(PhaseMonomial::degree).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    /// `Some(w)` when every term has the same `omega + qdot` weight.
    ///
    /// With q̇ carrying one power of frequency, this is the ω-dimension of the
    /// object; a dimensionally consistent polynomial has a single weight.
    pub fn frequency_weight(&self) -> Option<i32> {
        let mut it = self.terms.keys().map(|m| m.omega + m.qdot as i32);
        let first = it.next()?;
        it.all(|w| w == first).then_some(first)
    }

    /// `true` when no term carries an odd total degree, i.e. the polynomial is
    /// invariant under `(q, q̇) → (−q, −q̇)`.
    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.degree() % 2 == 0)
    }

    /// Bind ω to a number, producing a floating-point evaluator.
    pub fn compile(&self, omega: f64) -> CompiledPoly {
        let mut out = CompiledPoly::default();
        for (m, c) in &self.terms {
            out.push(to_f64(c) * omega.powi(m.omega), m.q, m.qdot);
        }
        out
    }

    pub fn eval(&self, q: f64, qdot: f64, omega: f64) -> f64 {
        self.compile(omega).eval(q, qdot)
    }

    /// Map every term through `f`, re-accumulating coefficients.
    pub fn map_terms<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&PhaseMonomial, &Rational) -> Option<(PhaseMonomial, Rational)>,
    {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if let Some((m2, c2)) = f(m, c) {
                out.add_term(m2, c2);
            }
        }
        out
    }

    /// Reflection `(q, q̇) → (−q, −q̇)`.
    pub fn reflect(&self) -> Self {
        self.map_terms(|m, c| {
            let c = if m.degree() % 2 == 1 { -c } else { c.clone() };
            Some((*m, c))
        })
    }
}

impl fmt::Display for PhasePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors = Vec::new();
            if m.omega != 0 {
                factors.push(format!("w^{}", m.omega));
            }
            match m.q {
                0 => {}
                1 => factors.push("q".to_string()),
                e => factors.push(format!("q^{e}")),
            }
            match m.qdot {
                0 => {}
                1 => factors.push("qd".to_string()),
                e => factors.push(format!("qd^{e}")),
            }
            let coeff = format_rational(&abs);
            if factors.is_empty() {
                write!(f, "{coeff}")?;
            } else if abs.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else if abs.denom().is_one() {
                write!(f, "{coeff}*{}", factors.join("*"))?;
            } else {
                write!(f, "({coeff})*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a PhasePoly> for &'a PhasePoly {
    type Output = PhasePoly;
    fn add(self, rhs: &PhasePoly) -> PhasePoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for PhasePoly {
    type Output = PhasePoly;
    fn add(mut self, rhs: PhasePoly) -> PhasePoly {
        self += &rhs;
        self
    }
}

impl AddAssign<&PhasePoly> for PhasePoly {
    fn add_assign(&mut self, rhs: &PhasePoly) {
        for (m, c) in &rhs.terms {
            self.add_term(*m, c.clone());
        }
    }
}

impl SubAssign<&PhasePoly> for PhasePoly {
    fn sub_assign(&mut self, rhs: &PhasePoly) {
        for (m, c) in &rhs.terms {
            self.add_term(*m, -c.clone());
        }
    }
}

impl<'a> Sub<&'a PhasePoly> for &'a PhasePoly {
    type Output = PhasePoly;
    fn sub(self, rhs: &PhasePoly) -> PhasePoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for PhasePoly {
    type Output = PhasePoly;
    fn sub(mut self, rhs: PhasePoly) -> PhasePoly {
        self -= &rhs;
        self
    }
}

impl Neg for &PhasePoly {
    type Output = PhasePoly;
    fn neg(self) -> PhasePoly {
        PhasePoly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

impl Neg for PhasePoly {
    type Output = PhasePoly;
    fn neg(self) -> PhasePoly {
        -&self
    }
}

impl<'a> Mul<&'a PhasePoly> for &'a PhasePoly {
    type Output = PhasePoly;
    fn mul(self, rhs: &PhasePoly) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.times(mb), ca * cb);
            }
        }
        out
    }
}

impl Mul for PhasePoly {
    type Output = PhasePoly;
    fn mul(self, rhs: PhasePoly) -> PhasePoly {
        &self * &rhs
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct TermRecord {
    q_pow: u32,
    qdot_pow: u32,
    omega_pow: i32,
    #[serde(
        serialize_with = "rational::serialize",
        deserialize_with = "rational::deserialize"
    )]
    coeff: Rational,
}

impl Serialize for PhasePoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let records: Vec<TermRecord> = self
            .terms
            .iter()
            .map(|(m, c)| TermRecord {
                q_pow: m.q,
                qdot_pow: m.qdot,
                omega_pow: m.omega,
                coeff: c.clone(),
            })
            .collect();
        records.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PhasePoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let records = Vec::<TermRecord>::deserialize(d)?;
        Ok(PhasePoly::from_terms(records.into_iter().map(|r| {
            (PhaseMonomial::new(r.q_pow, r.qdot_pow, r.omega_pow), r.coeff)
        })))
    }
}

/// A phase polynomial with ω (and possibly g) bound to numbers.
#[derive(Debug, Clone, Default)]
pub struct CompiledPoly {
    terms: Vec<(f64, u32, u32)>,
}

impl CompiledPoly {
    pub(crate) fn push(&mut self, c: f64, q: u32, qdot: u32) {
        if c == 0.0 {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.1 == q && t.2 == qdot) {
            t.0 += c;
        } else {
            self.terms.push((c, q, qdot));
        }
    }

    pub fn eval(&self, q: f64, qdot: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, i, j)| c * q.powi(i as i32) * qdot.powi(j as i32))
            .sum()
    }

    pub fn derivative(&self, var: PhaseVar) -> CompiledPoly {
        let mut out = CompiledPoly::default();
        for &(c, i, j) in &self.terms {
            match var {
                PhaseVar::Q if i > 0 => out.push(c * i as f64, i - 1, j),
                PhaseVar::QDot if j > 0 => out.push(c * j as f64, i, j - 1),
                _ => {}
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::rat;

    fn t(c: i64, q: u32, qd: u32, w: i32) -> PhasePoly {
        PhasePoly::term(int(c), q, qd, w)
    }

    #[test]
    fn monomial_products() {
        assert_eq!(&PhasePoly::q() * &PhasePoly::qdot(), t(1, 1, 1, 0));
        assert_eq!(&t(1, 2, 0, 2) * &t(1, 0, 2, 2), t(1, 2, 2, 4));
    }

    #[test]
    fn derivatives() {
        assert_eq!(t(1, 1, 2, 0).differentiate(PhaseVar::QDot), t(2, 1, 1, 0));
        assert_eq!(t(1, 2, 0, 2).differentiate(PhaseVar::Q), t(2, 1, 0, 2));
        assert!(t(1, 3, 0, 2).differentiate(PhaseVar::QDot).is_zero());
    }

    #[test]
    fn antiderivatives() {
        assert_eq!(t(2, 0, 1, 0).antiderive_qdot(1), t(1, 0, 2, 0));
        assert_eq!(t(2, 0, 0, 0).antiderive_qdot(2), t(1, 0, 2, 0));
        let p = t(6, 1, 1, 0).antiderive_qdot(2);
        assert_eq!(p, t(1, 1, 3, 0));
        assert_eq!(
            p.differentiate(PhaseVar::QDot).differentiate(PhaseVar::QDot),
            t(6, 1, 1, 0)
        );
    }

    #[test]
    fn homogeneous_parts() {
        let p = &t(1, 2, 0, 0) + &t(1, 0, 3, 0);
        assert_eq!(p.homogeneous_component(2), t(1, 2, 0, 0));
        assert_eq!(p.homogeneous_component(3), t(1, 0, 3, 0));
        assert!(p.homogeneous_component(5).is_zero());
    }

    #[test]
    fn cancellation_drops_terms() {
        let p = &t(3, 1, 1, 2) - &t(3, 1, 1, 2);
        assert!(p.is_zero());
        assert_eq!(p.len(), 0);
    }

    #[test]
    fn canonical_order_and_display() {
        let p = PhasePoly::from_terms([
            (PhaseMonomial::new(0, 2, 2), int(4)),
            (PhaseMonomial::new(2, 0, 4), int(-5)),
            (PhaseMonomial::new(1, 0, 2), int(-1)),
        ]);
        let order: Vec<_> = p.terms().map(|(m, _)| (m.q, m.qdot)).collect();
        assert_eq!(order, vec![(1, 0), (2, 0), (0, 2)]);
        assert_eq!(p.to_string(), "-w^2*q - 5*w^4*q^2 + 4*w^2*qd^2");
        assert_eq!(t(1, 0, 0, -2).scale(&rat(1, 2)).to_string(), "(1/2)*w^-2");
    }

    #[test]
    fn json_form() {
        let p = PhasePoly::term(rat(25, 6), 4, 0, 6);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"[{"qPow":4,"qdotPow":0,"omegaPow":6,"coeff":"25/6"}]"#);
        let back: PhasePoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn numeric_evaluation() {
        let p = &t(-5, 2, 0, 4) + &t(4, 0, 2, 2);
        assert!((p.eval(0.5, 2.0, 2.0) - (-5.0 * 16.0 * 0.25 + 4.0 * 4.0 * 4.0)).abs() < 1e-12);
        let dp = p.compile(2.0).derivative(PhaseVar::Q);
        assert!((dp.eval(0.5, 2.0) - (-10.0 * 16.0 * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn weights() {
        let f1 = &t(-5, 2, 0, 4) + &t(4, 0, 2, 2);
        assert_eq!(f1.frequency_weight(), Some(4));
        assert_eq!((&f1 + &t(1, 0, 0, 0)).frequency_weight(), None);
    }
}
