use proptest::prelude::*;

use hdsector::algebra::{int, rat, GSeries, JetPoly, JetVar, PhasePoly, PhaseVar, Rational};
use hdsector::constraint::{bracket, d_apply, solve_constraint, FSeries};
use hdsector::darboux::{build_map, invert_map, verify_map, GaugePolicy};
use hdsector::model::{
    euler_lagrange, first_momentum_of, lagrangian_value, ostrogradski_momenta,
    second_momentum_of, variational_derivative, ModelSpec, PotentialSpec,
};
use hdsector::reduction::{
    dirac_bracket_qqdot, energy_rate, hamilton_check, phi_poisson_bracket, reduce,
    secondary_constraints,
};

fn coeff() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=5).prop_map(|(n, d)| rat(n, d))
}

fn phase_poly(max_pow: u32, max_terms: usize) -> impl Strategy<Value = PhasePoly> {
    prop::collection::vec((coeff(), 0..=max_pow, 0..=max_pow, 0i32..=4), 0..=max_terms).prop_map(
        |ts| {
            let mut p = PhasePoly::zero();
            for (c, q, qd, w) in ts {
                p += &PhasePoly::term(c, q, qd, w);
            }
            p
        },
    )
}

fn series(order: usize) -> impl Strategy<Value = GSeries> {
    prop::collection::vec(phase_poly(2, 3), order + 1)
        .prop_map(move |cs| GSeries::from_coeffs(cs, order))
}

/// Random jet polynomial in the first `vars` jet variables.
fn jet_poly(vars: usize, max_terms: usize) -> impl Strategy<Value = JetPoly> {
    prop::collection::vec((coeff(), prop::collection::vec(0u32..=2, vars), 0i32..=2), 1..=max_terms)
        .prop_map(move |ts| {
            let mut p = JetPoly::zero();
            for (c, pows, w) in ts {
                let mut full = [0u32; 5];
                full[..pows.len()].copy_from_slice(&pows);
                p = &p + &JetPoly::term(c, full, w);
            }
            p
        })
}

fn monomial_spec(max_order: usize) -> impl Strategy<Value = ModelSpec> {
    (0u32..=2, 0u32..=1, 2u32..=3, 1..=max_order)
        .prop_map(|(k, l, m, n)| ModelSpec::new(PotentialSpec::monomial(k, l, m), n).unwrap())
}

proptest! {
    #[test]
    fn ring_laws(a in phase_poly(3, 4), b in phase_poly(3, 4), c in phase_poly(3, 4)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &PhasePoly::one(), a.clone());
    }

    #[test]
    fn antiderivative_inverts_derivative(p in phase_poly(4, 5), k in 1u32..=3) {
        let mut d = p.antiderive_qdot(k);
        for _ in 0..k {
            d = d.differentiate(PhaseVar::QDot);
        }
        prop_assert_eq!(d, p.clone());
        prop_assert_eq!(p.antiderive_q().differentiate(PhaseVar::Q), p);
    }

    #[test]
    fn product_rule(a in phase_poly(3, 4), b in phase_poly(3, 4)) {
        for v in [PhaseVar::Q, PhaseVar::QDot] {
            let lhs = (&a * &b).differentiate(v);
            let rhs = &(&a.differentiate(v) * &b) + &(&a * &b.differentiate(v));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn cauchy_product_matches_expansion(a in series(3), b in series(3)) {
        let prod = a.checked_mul(&b).unwrap();
        for n in 0..=3usize {
            let mut expect = PhasePoly::zero();
            for i in 0..=n {
                expect += &(&a.coeff(i) * &b.coeff(n - i));
            }
            prop_assert_eq!(prod.coeff(n), expect);
        }
        prop_assert!(a.checked_mul(&b.with_order(2)).is_err());
    }

    #[test]
    fn inverse_of_unit_series(tail in series(3)) {
        let mut s = tail;
        s.set_coeff(0, PhasePoly::one());
        let inv = s.inverse().unwrap();
        prop_assert_eq!(&s * &inv, GSeries::one(3));
    }

    #[test]
    fn euler_lagrange_is_variational_derivative(v in jet_poly(3, 4), n in 0usize..=2) {
        let v = &v + &JetPoly::monomial(1, 0, 2, 0);
        let spec = match ModelSpec::new(PotentialSpec::General(v), n) {
            Ok(s) => s,
            Err(_) => return Ok(()),
        };
        let l = lagrangian_value(&spec);
        prop_assert_eq!(euler_lagrange(&spec), variational_derivative(&l).neg());
        let (p1, p2) = ostrogradski_momenta(&spec);
        prop_assert_eq!(p1, first_momentum_of(&l));
        prop_assert_eq!(p2, second_momentum_of(&l));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// `[dF/dt] = D[F]` and `[d²F/dt²] = D²[F]`, for any f.
    #[test]
    fn bracket_commutes_with_time_derivative(
        fq in jet_poly(3, 3),
        tail in series(2),
        order in 0usize..=2,
    ) {
        let mut fs = tail.with_order(order);
        fs.set_coeff(0, &fs.coeff(0) + &PhasePoly::term(int(-1), 1, 0, 2));
        let f = FSeries::from_series(fs);
        let once = fq.total_derivative().unwrap();
        let lhs = bracket(&once, &f);
        let rhs = d_apply(&bracket(&fq, &f), &f).unwrap();
        prop_assert_eq!(&lhs, &rhs);
        let twice = once.total_derivative().unwrap();
        prop_assert_eq!(bracket(&twice, &f), d_apply(&rhs, &f).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reduced_sector_identities(spec in monomial_spec(3)) {
        let sector = reduce(&spec);
        let dirac = dirac_bracket_qqdot(&sector).unwrap();
        // {q, q̇}_D = −1/{φ₁, φ₂}
        let c = phi_poisson_bracket(&spec, &sector.f);
        prop_assert_eq!(&(&dirac * &c), &GSeries::one(spec.order()).scale(&int(-1)));
        prop_assert_eq!(&dirac * &sector.omega_factor, GSeries::one(spec.order()));
        let report = hamilton_check(&sector).unwrap();
        prop_assert!(report.passed(), "{:?}", report.first_failing_order());
        let (s1, s2) = secondary_constraints(&spec, &sector.f);
        prop_assert!(s1.is_zero() && s2.is_zero());
        prop_assert!(energy_rate(&sector).is_zero());
    }

    #[test]
    fn darboux_map_identities(spec in monomial_spec(3)) {
        let f = solve_constraint(&spec);
        let (map, nf) = build_map(&spec, &f, &GaugePolicy::Minimal).unwrap();
        let checks = verify_map(&spec, &map, &nf);
        prop_assert!(checks.passed(), "{:?}", checks);
        let inv = invert_map(&map);
        prop_assert_eq!(inv.position.coeff(0), PhasePoly::q());
        prop_assert!(nf.potential.coeffs().iter().all(|c| c.is_q_only()));
    }
}

#[test]
fn potential_without_qddot_is_rejected() {
    let v = JetPoly::var(JetVar::Q);
    assert!(ModelSpec::new(PotentialSpec::General(v), 1).is_err());
}
