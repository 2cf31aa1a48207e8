//! Quantum energies of `H = ½p² + ½ω²x² + g c₃x³ + g² c₄x⁴`: second-order
//! Rayleigh–Schrödinger in exact rationals, and a dense Fock-basis
//! diagonalization as a numeric cross-check.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::rational::to_f64;
use crate::algebra::{int, rat, Rational};
use crate::darboux::NormalForm;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("normal form needs order >= 2 to define the cubic and quartic couplings, got {0}")]
    OrderTooLow(usize),
    #[error("order-{order} normal form term x^{x_pow} is not part of the cubic-quartic model")]
    UnexpectedTerm { order: usize, x_pow: u32 },
    #[error("basis size {basis} must exceed the number of levels {levels}")]
    BasisTooSmall { basis: usize, levels: usize },
    #[error("omega and hbar must be positive")]
    NonPositiveScale,
}

/// `c ωᵖ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OmegaTerm {
    #[serde(with = "crate::algebra::rational")]
    pub coeff: Rational,
    pub omega_pow: i32,
}

impl OmegaTerm {
    pub fn new(coeff: Rational, omega_pow: i32) -> Self {
        OmegaTerm { coeff, omega_pow }
    }

    pub fn eval(&self, omega: f64) -> f64 {
        to_f64(&self.coeff) * omega.powi(self.omega_pow)
    }
}

/// Couplings of the x³ (at g) and x⁴ (at g²) terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CubicQuarticModel {
    pub c3: OmegaTerm,
    pub c4: OmegaTerm,
}

impl CubicQuarticModel {
    pub fn new(c3: OmegaTerm, c4: OmegaTerm) -> Self {
        CubicQuarticModel { c3, c4 }
    }

    /// Read `c₃`, `c₄` off a normal form truncated at g².
    ///
    /// The cubic defaults to ω⁴ and the quartic to ω⁶ when absent, which is
    /// the weight for `V = q q̈²`; a zero coefficient makes the choice moot.
    pub fn from_normal_form(nf: &NormalForm) -> Result<Self, SpectrumError> {
        if nf.order() < 2 {
            return Err(SpectrumError::OrderTooLow(nf.order()));
        }
        let mut c3 = OmegaTerm::new(Rational::zero(), 4);
        let mut c4 = OmegaTerm::new(Rational::zero(), 6);
        for e in nf.v_table.iter().filter(|e| e.order <= 2) {
            match (e.order, e.x_pow) {
                (1, 3) => c3 = OmegaTerm::new(e.coeff.clone(), e.omega_pow),
                (2, 4) => c4 = OmegaTerm::new(e.coeff.clone(), e.omega_pow),
                (order, x_pow) => return Err(SpectrumError::UnexpectedTerm { order, x_pow }),
            }
        }
        Ok(CubicQuarticModel { c3, c4 })
    }
}

/// `(a + a†)ᵏ eₙ = Σ c_m e_m` in the unnormalized basis `eₙ = (a†)ⁿ|0⟩`,
/// where `a† eₙ = eₙ₊₁`, `a eₙ = n eₙ₋₁` and `⟨eₙ|eₙ⟩ = n!`. All `c_m` are
/// integers; the diagonal element `⟨n|(a+a†)ᵏ|n⟩` is `c_n` itself.
fn ladder_coefficients(k: u32, n: u32) -> BTreeMap<u32, Rational> {
    let mut state: BTreeMap<u32, Rational> = BTreeMap::new();
    state.insert(n, Rational::one());
    for _ in 0..k {
        let mut next: BTreeMap<u32, Rational> = BTreeMap::new();
        for (&j, c) in &state {
            *next.entry(j + 1).or_insert_with(Rational::zero) += c;
            if j > 0 {
                *next.entry(j - 1).or_insert_with(Rational::zero) += c * int(j as i64);
            }
        }
        state = next;
    }
    state.retain(|_, c| !c.is_zero());
    state
}

/// `⟨m| (a + a†)ᵏ |n⟩²` for every m with a nonzero element: `c_m² m!/n!`.
pub fn ladder_elements_squared(k: u32, n: u32) -> BTreeMap<u32, Rational> {
    ladder_coefficients(k, n)
        .into_iter()
        .map(|(m, c)| {
            let mut r = &c * &c;
            if m >= n {
                for j in n + 1..=m {
                    r *= int(j as i64);
                }
            } else {
                for j in m + 1..=n {
                    r /= int(j as i64);
                }
            }
            (m, r)
        })
        .collect()
}

/// `E_n = (n + ½)ħω + g²ħ² Σ cᵢ ωᵖⁱ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnergyLevel {
    pub n: u32,
    #[serde(with = "crate::algebra::rational")]
    pub alpha0: Rational,
    /// Coefficient of `g²ħ²`, as a sum over ω powers.
    pub alpha2: Vec<OmegaTerm>,
}

impl EnergyLevel {
    pub fn eval(&self, omega: f64, hbar: f64, g: f64) -> f64 {
        let shift: f64 = self.alpha2.iter().map(|t| t.eval(omega)).sum();
        to_f64(&self.alpha0) * hbar * omega + g * g * hbar * hbar * shift
    }

    /// The g²ħ² coefficient when it carries a single ω power.
    pub fn alpha2_at(&self, omega_pow: i32) -> Rational {
        self.alpha2
            .iter()
            .filter(|t| t.omega_pow == omega_pow)
            .map(|t| t.coeff.clone())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnergyTable {
    pub model: CubicQuarticModel,
    pub levels: Vec<EnergyLevel>,
}

/// First-order shift of `λx⁴` in units of `ħ²`: `λ/(4ω²) ⟨n|(a+a†)⁴|n⟩`.
pub fn quartic_shift(lambda: &OmegaTerm, n: u32) -> OmegaTerm {
    let c = ladder_coefficients(4, n)
        .remove(&n)
        .unwrap_or_else(Rational::zero);
    OmegaTerm::new(&lambda.coeff * c * rat(1, 4), lambda.omega_pow - 2)
}

/// Second-order shift of `λx³` in units of `ħ²`:
/// `λ²/(8ω⁴) Σ_{m≠n} |⟨m|(a+a†)³|n⟩|²/(n − m)`.
pub fn cubic_shift(lambda: &OmegaTerm, n: u32) -> OmegaTerm {
    let mut sum = Rational::zero();
    for (m, e2) in ladder_elements_squared(3, n) {
        if m != n {
            sum += e2 / int(n as i64 - m as i64);
        }
    }
    let l2 = &lambda.coeff * &lambda.coeff;
    OmegaTerm::new(l2 * sum * rat(1, 8), 2 * lambda.omega_pow - 4)
}

/// Rayleigh–Schrödinger energies through g² for levels `0..=n_max`.
pub fn rs_energies(model: &CubicQuarticModel, n_max: u32) -> EnergyTable {
    let levels = (0..=n_max)
        .map(|n| {
            let mut by_pow: BTreeMap<i32, Rational> = BTreeMap::new();
            for t in [quartic_shift(&model.c4, n), cubic_shift(&model.c3, n)] {
                *by_pow.entry(t.omega_pow).or_insert_with(Rational::zero) += t.coeff;
            }
            EnergyLevel {
                n,
                alpha0: int(n as i64) + rat(1, 2),
                alpha2: by_pow
                    .into_iter()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(p, c)| OmegaTerm::new(c, p))
                    .collect(),
            }
        })
        .collect();
    EnergyTable {
        model: model.clone(),
        levels,
    }
}

/// Outcome of a truncated Fock-basis diagonalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FockResult {
    pub basis_size: usize,
    pub energies: Vec<f64>,
    /// Same levels with `basis_size + 50` states.
    pub energies_enlarged: Vec<f64>,
    pub max_change: f64,
}

impl FockResult {
    pub fn converged(&self, tol: f64) -> bool {
        self.max_change <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub omega: f64,
    pub hbar: f64,
}

impl Default for Scales {
    fn default() -> Self {
        Scales {
            omega: 1.0,
            hbar: 1.0,
        }
    }
}

fn lowest_levels(
    model: &CubicQuarticModel,
    scales: Scales,
    g: f64,
    basis: usize,
    levels: usize,
) -> Vec<f64> {
    let Scales { omega, hbar } = scales;
    // Build x in a slightly larger space so x³ and x⁴ are exact on the kept block.
    let big = basis + 4;
    let s = (hbar / (2.0 * omega)).sqrt();
    let mut x = DMatrix::<f64>::zeros(big, big);
    for n in 0..big - 1 {
        let v = s * ((n + 1) as f64).sqrt();
        x[(n, n + 1)] = v;
        x[(n + 1, n)] = v;
    }
    let x2 = &x * &x;
    let x3 = &x2 * &x;
    let x4 = &x2 * &x2;
    let c3 = g * model.c3.eval(omega);
    let c4 = g * g * model.c4.eval(omega);
    let mut h = DMatrix::<f64>::zeros(basis, basis);
    for i in 0..basis {
        for j in 0..basis {
            h[(i, j)] = c3 * x3[(i, j)] + c4 * x4[(i, j)];
        }
        h[(i, i)] += hbar * omega * (i as f64 + 0.5);
    }
    let eig = SymmetricEigen::new(h);
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.truncate(levels);
    ev
}

/// Lowest `levels` eigenvalues of H in the first `basis` Fock states.
pub fn fock_diagonalize(
    model: &CubicQuarticModel,
    scales: Scales,
    g: f64,
    basis: usize,
    levels: usize,
) -> Result<FockResult, SpectrumError> {
    if basis <= levels {
        return Err(SpectrumError::BasisTooSmall { basis, levels });
    }
    if !(scales.omega > 0.0 && scales.hbar > 0.0) {
        return Err(SpectrumError::NonPositiveScale);
    }
    let energies = lowest_levels(model, scales, g, basis, levels);
    let energies_enlarged = lowest_levels(model, scales, g, basis + 50, levels);
    let max_change = energies
        .iter()
        .zip(&energies_enlarged)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(FockResult {
        basis_size: basis,
        energies,
        energies_enlarged,
        max_change,
    })
}

/// The two couplings of the β-family Hamiltonian for `V = q q̈²`.
pub fn beta_family_model(beta: &Rational) -> CubicQuarticModel {
    let c3 = -(beta + int(1));
    let c4 = int(5) * (beta * beta / int(2) + beta + rat(4, 3));
    CubicQuarticModel::new(OmegaTerm::new(c3, 4), OmegaTerm::new(c4, 6))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_elements_of_x() {
        let e = ladder_elements_squared(1, 3);
        assert_eq!(e.get(&4), Some(&int(4)));
        assert_eq!(e.get(&2), Some(&int(3)));
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn quartic_first_order_closed_form() {
        // (3λ/4)(ħ/ω)²(2n²+2n+1)
        let lambda = OmegaTerm::new(rat(7, 3), 0);
        for n in 0..8u32 {
            let s = quartic_shift(&lambda, n);
            let n = n as i64;
            assert_eq!(s.coeff, rat(7, 3) * rat(3, 4) * int(2 * n * n + 2 * n + 1));
            assert_eq!(s.omega_pow, -2);
        }
    }

    #[test]
    fn cubic_second_order_closed_form() {
        // −(λ²ħ²/8ω⁴)(30n²+30n+11)
        let lambda = OmegaTerm::new(rat(-2, 5), 0);
        for n in 0..8u32 {
            let s = cubic_shift(&lambda, n);
            let n = n as i64;
            assert_eq!(s.coeff, -rat(4, 25) * rat(1, 8) * int(30 * n * n + 30 * n + 11));
            assert_eq!(s.omega_pow, -4);
        }
    }

    #[test]
    fn beta_family_matches_closed_form() {
        for beta in [int(-1), int(0), int(3), rat(-5, 2), rat(2, 7)] {
            let table = rs_energies(&beta_family_model(&beta), 6);
            let b1 = &beta + int(1);
            for lvl in &table.levels {
                let n = lvl.n as i64;
                let expect = rat(25, 8) * int(n * n + (n + 1) * (n + 1)) + rat(1, 2) * &b1 * &b1;
                assert_eq!(lvl.alpha2_at(4), expect);
                assert_eq!(lvl.alpha2.len(), 1);
            }
        }
    }

    #[test]
    fn harmonic_limit_is_exact() {
        let m = beta_family_model(&int(0));
        let r = fock_diagonalize(&m, Scales::default(), 0.0, 40, 5).unwrap();
        for (n, e) in r.energies.iter().enumerate() {
            assert!((e - (n as f64 + 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonalization_matches_perturbation_theory() {
        let m = beta_family_model(&int(-1));
        let r = fock_diagonalize(&m, Scales::default(), 0.01, 200, 3).unwrap();
        assert!((r.energies[0] - (0.5 + 3.125e-4)).abs() < 1e-6);
        assert!(r.converged(1e-9));
    }

    #[test]
    fn remainder_is_fourth_order() {
        let m = beta_family_model(&int(0));
        let rs = rs_energies(&m, 2);
        let gap = |g: f64| -> Vec<f64> {
            let r = fock_diagonalize(&m, Scales::default(), g, 120, 3).unwrap();
            rs.levels.iter().zip(&r.energies).map(|(l, e)| (l.eval(1.0, 1.0, g) - e).abs()).collect()
        };
        let (a, b) = (gap(0.01), gap(0.005));
        for (x, y) in a.iter().zip(&b) {
            let p = (x / y).log2();
            assert!((p - 4.0).abs() < 0.3, "exponent {p}");
        }
    }

    #[test]
    fn rejects_tiny_basis() {
        let m = beta_family_model(&int(0));
        assert!(fock_diagonalize(&m, Scales::default(), 0.01, 3, 3).is_err());
    }
}
