//! The harmonic time derivative `D₀ = q̇∂_q − ω²q∂_q̇` and its inversion.
//!
//! In the basis `z = ωq + iq̇`, `z̄ = ωq − iq̇` the operator is diagonal,
//! `D₀ zᵃz̄ᵇ = −iω(a−b) zᵃz̄ᵇ`, so solving `D₀Φ = R` is a division on every
//! `a ≠ b` term. The `a = b` terms are functions of `z z̄ = ω²q² + q̇²` alone:
//! the angle-independent part that must be removed before Φ can exist.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::rational::binomial;
use crate::algebra::{int, rat, PhaseMonomial, PhasePoly, PhaseVar, Rational};

type Gauss = Complex<Rational>;

fn i_pow(k: u32) -> Gauss {
    match k % 4 {
        0 => Gauss::new(int(1), int(0)),
        1 => Gauss::new(int(0), int(1)),
        2 => Gauss::new(int(-1), int(0)),
        _ => Gauss::new(int(0), int(-1)),
    }
}

fn real(r: Rational) -> Gauss {
    Gauss::new(r, Rational::zero())
}

/// Sparse polynomial in `z, z̄` with a power of ω per term.
#[derive(Debug, Clone, Default, PartialEq)]
struct ZPoly(BTreeMap<(u32, u32, i32), Gauss>);

impl ZPoly {
    fn add(&mut self, key: (u32, u32, i32), c: Gauss) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(key).or_insert_with(Gauss::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.0.remove(&key);
        }
    }
}

/// `q = (z + z̄)/(2ω)`, `q̇ = −i(z − z̄)/2`.
fn to_z(p: &PhasePoly) -> ZPoly {
    let mut out = ZPoly::default();
    let half = rat(1, 2);
    for (m, c) in p.terms() {
        // c · (1/2)^(i+j) · ω^(−i) · (z+z̄)^i · (−i)^j (z−z̄)^j
        let mut scale = c.clone();
        for _ in 0..(m.q + m.qdot) {
            scale = &scale * &half;
        }
        let prefactor = real(scale) * i_pow(3 * m.qdot);
        for s in 0..=m.q {
            for t in 0..=m.qdot {
                let mut k = binomial(m.q, s) * binomial(m.qdot, t);
                if (m.qdot - t) % 2 == 1 {
                    k = -k;
                }
                let a = s + t;
                let b = (m.q - s) + (m.qdot - t);
                out.add((a, b, m.omega - m.q as i32), prefactor.clone() * real(k));
            }
        }
    }
    out
}

/// `z = ωq + iq̇`, `z̄ = ωq − iq̇`. Returns `None` if an imaginary part
/// survives, which would mean the input was not the image of a real polynomial.
fn from_z(z: &ZPoly) -> Option<PhasePoly> {
    let mut re = PhasePoly::zero();
    let mut im = PhasePoly::zero();
    for (&(a, b, w), c) in &z.0 {
        for s in 0..=a {
            for t in 0..=b {
                // C(a,s) (ωq)^s (iq̇)^(a−s) · C(b,t) (ωq)^t (−iq̇)^(b−t)
                let k = binomial(a, s) * binomial(b, t);
                let phase = i_pow(a - s) * i_pow(3 * (b - t));
                let coeff = c.clone() * phase * real(k);
                let mono = PhaseMonomial::new(s + t, (a - s) + (b - t), w + (s + t) as i32);
                re.add_term(mono, coeff.re);
                im.add_term(mono, coeff.im);
            }
        }
    }
    im.is_zero().then_some(re)
}

/// `D₀ p = q̇ ∂_q p − ω² q ∂_q̇ p`.
pub fn d0_apply(p: &PhasePoly) -> PhasePoly {
    let a = &PhasePoly::qdot() * &p.differentiate(PhaseVar::Q);
    let b = &PhasePoly::term(int(1), 1, 0, 2) * &p.differentiate(PhaseVar::QDot);
    &a - &b
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct D0Solution {
    /// Solves `D₀ phi = rhs − zero_mode`, with no angle-independent part of its own.
    pub phi: PhasePoly,
    /// Angle-independent part of `rhs`: a polynomial in `ω²q² + q̇²`.
    pub zero_mode: PhasePoly,
}

/// Split `rhs` into its angle-independent part and a `D₀` preimage of the rest.
pub fn d0_solve(rhs: &PhasePoly) -> D0Solution {
    let z = to_z(rhs);
    let mut phi = ZPoly::default();
    let mut zero = ZPoly::default();
    for (&(a, b, w), c) in &z.0 {
        if a == b {
            zero.add((a, b, w), c.clone());
        } else {
            // divide by −iω(a−b): multiply by i/(a−b), lower ω by one
            let d = int(a as i64 - b as i64);
            let c2 = c.clone() * Gauss::new(Rational::zero(), Rational::one() / d);
            phi.add((a, b, w - 1), c2);
        }
    }
    D0Solution {
        phi: from_z(&phi).expect("real input yields real preimage"),
        zero_mode: from_z(&zero).expect("real input yields real zero mode"),
    }
}

/// Angle-independent part of `p`.
pub fn zero_mode(p: &PhasePoly) -> PhasePoly {
    d0_solve(p).zero_mode
}

/// A function of q alone whose zero mode is `−zero_mode`.
///
/// Each `c·ω^p (zz̄)^k` is cancelled by `−c·2^{2k}/C(2k,k) · ω^{p+2k} q^{2k}`.
pub fn zero_mode_canceller(zero_mode: &PhasePoly) -> PhasePoly {
    let z = to_z(zero_mode);
    let mut out = PhasePoly::zero();
    for (&(a, b, w), c) in &z.0 {
        debug_assert_eq!(a, b, "input must be angle independent");
        let k = a;
        let mut ratio = Rational::one();
        for _ in 0..(2 * k) {
            ratio = &ratio * int(2);
        }
        ratio /= binomial(2 * k, k);
        out.add_term(PhaseMonomial::new(2 * k, 0, w + 2 * k as i32), -(c.re.clone() * ratio));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(c: i64, q: u32, qd: u32, w: i32) -> PhasePoly {
        PhasePoly::term(int(c), q, qd, w)
    }

    #[test]
    fn basis_round_trip() {
        let p = &(&t(3, 2, 1, 4) + &t(-7, 0, 3, 0)) + &t(1, 4, 0, -2);
        assert_eq!(from_z(&to_z(&p)).unwrap(), p);
    }

    #[test]
    fn odd_rhs_has_no_zero_mode() {
        let s = d0_solve(&t(1, 2, 1, 0));
        assert!(s.zero_mode.is_zero());
        assert_eq!(s.phi, PhasePoly::term(rat(1, 3), 3, 0, 0));
    }

    #[test]
    fn zero_mode_of_q_squared() {
        let s = d0_solve(&t(1, 2, 0, 0));
        let expect = &PhasePoly::term(rat(1, 2), 2, 0, 0) + &PhasePoly::term(rat(1, 2), 0, 2, -2);
        assert_eq!(s.zero_mode, expect);
        assert_eq!(d0_apply(&s.phi), &t(1, 2, 0, 0) - &expect);
    }

    #[test]
    fn central_binomial_ratio() {
        // zero mode of q^{2k} is C(2k,k)/2^{2k} · r^{2k}, r² = q² + q̇²/ω²
        for k in 1..=5u32 {
            let zm = zero_mode(&t(1, 2 * k, 0, 0));
            let c = zm.coefficient(2 * k, 0, 0);
            let mut expect = binomial(2 * k, k);
            for _ in 0..(2 * k) {
                expect = expect / int(2);
            }
            assert_eq!(c, expect, "k = {k}");
            let cancel = zero_mode_canceller(&zm);
            assert_eq!(cancel, t(-1, 2 * k, 0, 0));
        }
    }

    #[test]
    fn preimage_has_no_zero_mode() {
        let rhs = &(&t(5, 4, 0, 4) + &t(-3, 2, 2, 2)) + &t(2, 0, 4, 0);
        let s = d0_solve(&rhs);
        assert!(zero_mode(&s.phi).is_zero());
        assert_eq!(d0_apply(&s.phi), &rhs - &s.zero_mode);
    }
}
