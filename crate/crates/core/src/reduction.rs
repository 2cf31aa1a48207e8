//! Reduction to the constraint surface: the projected momenta `[p1]`, `[p2]`,
//! the reduced symplectic factor, the Dirac bracket `{q, q̇}_D` and the reduced
//! Hamiltonian `[H]`.

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraError, GSeries, JetVar, PhasePoly, PhaseVar};
use crate::constraint::{d_apply, solve_constraint, Bracket, FSeries};
use crate::model::{
    first_momentum_of, lagrangian_value, ostrogradski_momenta, CoupledJet, ModelSpec,
};

/// Everything living on the reduced `(q, q̇)` phase space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReducedSector {
    pub f: FSeries,
    pub p1_red: GSeries,
    pub p2_red: GSeries,
    /// Factor multiplying `dq̇ ∧ dq` in the reduced symplectic form.
    pub omega_factor: GSeries,
    pub h_red: GSeries,
}

/// Solve for f and reduce.
pub fn reduce(spec: &ModelSpec) -> ReducedSector {
    let f = solve_constraint(spec);
    reduce_with(spec, f)
}

/// Reduce with a caller-supplied f. Used for negative controls: with an f
/// that does not solve the constraint the identities in [`hamilton_check`]
/// fail.
pub fn reduce_with(spec: &ModelSpec, f: FSeries) -> ReducedSector {
    let order = f.order();
    let (p1, p2) = ostrogradski_momenta(spec);
    let lagrangian = lagrangian_value(spec);
    let mut br = Bracket::new(&f);
    let p1_red = br.apply_coupled(&p1);
    let p2_red = br.apply_coupled(&p2);
    let l_red = br.apply_coupled(&lagrangian);
    let omega_factor =
        &p1_red.differentiate(PhaseVar::QDot) - &p2_red.differentiate(PhaseVar::Q);
    let qdot = GSeries::from_poly(PhasePoly::qdot(), order);
    let h_red = &(&(&p1_red * &qdot) + &(&p2_red * f.series())) - &l_red;
    ReducedSector {
        f,
        p1_red,
        p2_red,
        omega_factor,
        h_red,
    }
}

/// `{q, q̇}_D`, the series inverse of the symplectic factor.
pub fn dirac_bracket_qqdot(sector: &ReducedSector) -> Result<GSeries, AlgebraError> {
    sector.omega_factor.inverse()
}

/// Poisson bracket `{φ₁, φ₂}` of the two second-class constraints
/// `φ₁ = p₁ − [p₁]`, `φ₂ = p₂ − [p₂]`, assembled directly from V:
///
/// `−1 − g ∂_q[∂V/∂q̈] − g ∂_q̇[−∂V/∂q̇ + d/dt ∂V/∂q̈]`.
///
/// The `−1` is the contribution of the free `q̇` inside `[p₁]`.
pub fn phi_poisson_bracket(spec: &ModelSpec, f: &FSeries) -> GSeries {
    let order = f.order();
    let v = spec.potential().to_jet();
    let dv_dqdd = v.differentiate(JetVar::QDDot);
    let inner = &(-&v.differentiate(JetVar::QDot))
        + &dv_dqdd.total_derivative().expect("jet order");
    let mut br = Bracket::new(f);
    let a = br.apply(&dv_dqdd).differentiate(PhaseVar::Q);
    let b = br.apply(&inner).differentiate(PhaseVar::QDot);
    let coupled = (&a + &b).shift(1);
    &(-&GSeries::one(order)) - &coupled
}

/// Time derivatives of both constraints projected onto the surface. Both
/// vanish identically when f solves the constraint (no secondary
/// constraints):
///
/// `dφ₁/dt ≈ [∂L/∂q] − D[p₁]`, `dφ₂/dt ≈ [∂L/∂q̇ − p₁] − D[p₂]`.
pub fn secondary_constraints(spec: &ModelSpec, f: &FSeries) -> (GSeries, GSeries) {
    let l = lagrangian_value(spec);
    let p1 = first_momentum_of(&l);
    let p2 = l.differentiate(JetVar::QDDot);
    let mut br = Bracket::new(f);
    let p1_red = br.apply_coupled(&p1);
    let p2_red = br.apply_coupled(&p2);
    let p1_dot = br.apply_coupled(&l.differentiate(JetVar::Q));
    let p2_dot = br.apply_coupled(&CoupledJet::sub(&l.differentiate(JetVar::QDot), &p1));
    let phi1 = &p1_dot - &d_apply(&p1_red, f).expect("same order");
    let phi2 = &p2_dot - &d_apply(&p2_red, f).expect("same order");
    (phi1, phi2)
}

/// `D[H]`, zero when the reduced Hamiltonian is conserved.
pub fn energy_rate(sector: &ReducedSector) -> GSeries {
    d_apply(&sector.h_red, &sector.f).expect("same order")
}

/// Outcome of one identity at one order of g.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OrderCheck {
    pub order: usize,
    pub passed: bool,
    /// Difference of the two sides; empty when the check passed.
    pub residual: PhasePoly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityCheck {
    pub name: String,
    pub orders: Vec<OrderCheck>,
}

impl IdentityCheck {
    /// Compare two series order by order.
    pub fn compare(name: &str, lhs: &GSeries, rhs: &GSeries) -> IdentityCheck {
        let diff = lhs - rhs;
        IdentityCheck {
            name: name.to_string(),
            orders: diff
                .coeffs()
                .iter()
                .enumerate()
                .map(|(n, c)| OrderCheck {
                    order: n,
                    passed: c.is_zero(),
                    residual: c.clone(),
                })
                .collect(),
        }
    }

    pub fn passed(&self) -> bool {
        self.orders.iter().all(|o| o.passed)
    }

    pub fn first_failure(&self) -> Option<&OrderCheck> {
        self.orders.iter().find(|o| !o.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HamiltonReport {
    pub checks: Vec<IdentityCheck>,
}

impl HamiltonReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    /// Lowest order at which any identity fails.
    pub fn first_failing_order(&self) -> Option<usize> {
        self.checks
            .iter()
            .filter_map(|c| c.first_failure().map(|o| o.order))
            .min()
    }
}

/// Hamilton's equations on the reduced space as exact series identities:
///
/// * `∂[H]/∂q = −f·{q,q̇}_D⁻¹` and `∂[H]/∂q̇ = q̇·{q,q̇}_D⁻¹`
/// * `{q, [H]}_D = q̇` and `{q̇, [H]}_D = f`
///
/// With a single pair, `{A, B}_D = {q,q̇}_D (∂_q A ∂_q̇ B − ∂_q̇ A ∂_q B)`.
pub fn hamilton_check(sector: &ReducedSector) -> Result<HamiltonReport, AlgebraError> {
    let order = sector.h_red.order();
    let w = &sector.omega_factor;
    let dirac = w.inverse()?;
    let f = sector.f.series();
    let qdot = GSeries::from_poly(PhasePoly::qdot(), order);
    let dh_dq = sector.h_red.differentiate(PhaseVar::Q);
    let dh_dqd = sector.h_red.differentiate(PhaseVar::QDot);

    let grad_q = IdentityCheck::compare("dH/dq = -f {q,qdot}_D^-1", &dh_dq, &-&(f * w));
    let grad_qd = IdentityCheck::compare("dH/dqdot = qdot {q,qdot}_D^-1", &dh_dqd, &(&qdot * w));
    let q_eq = IdentityCheck::compare("{q,H}_D = qdot", &(&dirac * &dh_dqd), &qdot);
    let qd_eq = IdentityCheck::compare("{qdot,H}_D = f", &-&(&dirac * &dh_dq), f);
    Ok(HamiltonReport {
        checks: vec![grad_q, grad_qd, q_eq, qd_eq],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, is_reciprocal, rat};
    use crate::model::PotentialSpec;

    fn t(c: i64, q: u32, qd: u32, w: i32) -> PhasePoly {
        PhasePoly::term(int(c), q, qd, w)
    }

    fn harmonic_energy() -> PhasePoly {
        &PhasePoly::term(rat(1, 2), 0, 2, 0) + &PhasePoly::term(rat(1, 2), 2, 0, 2)
    }

    #[test]
    fn symplectic_factor_first_order() {
        let s = reduce(&ModelSpec::q_qddot_squared(1));
        assert_eq!(s.omega_factor.coeff(0), PhasePoly::one());
        assert_eq!(s.omega_factor.coeff(1), t(-8, 1, 0, 2));
    }

    #[test]
    fn reduced_hamiltonian_first_order() {
        let s = reduce(&ModelSpec::q_qddot_squared(1));
        assert_eq!(s.h_red.coeff(0), harmonic_energy());
        assert_eq!(s.h_red.coeff(1), &t(-1, 3, 0, 4) + &t(-4, 1, 2, 2));
    }

    #[test]
    fn harmonic_limit() {
        let s = reduce(&ModelSpec::q_qddot_squared(0));
        assert_eq!(s.omega_factor, GSeries::one(0));
        assert_eq!(s.h_red.coeff(0), harmonic_energy());
        assert_eq!(dirac_bracket_qqdot(&s).unwrap(), GSeries::one(0));
        assert!(hamilton_check(&s).unwrap().passed());
    }

    #[test]
    fn dirac_bracket_inverts_factor() {
        let s = reduce(&ModelSpec::q_qddot_squared(3));
        let d = dirac_bracket_qqdot(&s).unwrap();
        assert_eq!(d.coeff(1), t(8, 1, 0, 2));
        assert!(is_reciprocal(&s.omega_factor, &d));
    }

    #[test]
    fn constraint_bracket_matches_symplectic_factor() {
        let spec = ModelSpec::q_qddot_squared(3);
        let s = reduce(&spec);
        let pb = phi_poisson_bracket(&spec, &s.f);
        assert_eq!(pb, -&s.omega_factor);
        assert_eq!(pb.coeff(1), t(8, 1, 0, 2));
        let pb0 = phi_poisson_bracket(&spec.with_order(0), &FSeries::harmonic(0));
        assert_eq!(pb0, -&GSeries::one(0));
    }

    #[test]
    fn reduced_hamiltonian_closed_form() {
        // ½q̇² + ½ω²q² + g(−q f² + 2q̇² f + 2q q̇² ∂f/∂q + 2q q̇ f ∂f/∂q̇)
        let spec = ModelSpec::q_qddot_squared(3);
        let s = reduce(&spec);
        let n = spec.order();
        let f = s.f.series();
        let q = GSeries::from_poly(PhasePoly::q(), n);
        let qd = GSeries::from_poly(PhasePoly::qdot(), n);
        let fq = f.differentiate(PhaseVar::Q);
        let fqd = f.differentiate(PhaseVar::QDot);
        let two = int(2);
        let inner = &(&(&(-&(&q * &(f * f))) + &(&(&qd * &qd) * f).scale(&two))
            + &(&(&(&q * &qd) * &qd) * &fq).scale(&two))
            + &(&(&(&q * &qd) * f) * &fqd).scale(&two);
        let expect = &GSeries::from_poly(harmonic_energy(), n) + &inner.shift(1);
        assert_eq!(s.h_red, expect);
    }

    #[test]
    fn hamilton_equations_hold() {
        let s = reduce(&ModelSpec::q_qddot_squared(3));
        let report = hamilton_check(&s).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn corrupted_f_fails_at_second_order() {
        let spec = ModelSpec::q_qddot_squared(3);
        let f = solve_constraint(&spec).without_order(2);
        let s = reduce_with(&spec, f);
        let report = hamilton_check(&s).unwrap();
        assert!(!report.passed());
        assert_eq!(report.first_failing_order(), Some(2));
    }

    #[test]
    fn no_secondary_constraints_and_conserved_energy() {
        for (k, l, m) in [(1, 0, 2), (0, 1, 2), (2, 0, 3)] {
            let spec = ModelSpec::new(PotentialSpec::monomial(k, l, m), 3).unwrap();
            let s = reduce(&spec);
            let (a, b) = secondary_constraints(&spec, &s.f);
            assert!(a.is_zero() && b.is_zero());
            assert!(energy_rate(&s).is_zero());
        }
    }
}
