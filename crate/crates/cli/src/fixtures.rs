//! Published coefficient tables for `V = q q̈²` and the comparison run by
//! `reproduce-paper`.

use hdsector::algebra::rational::format_rational;
use hdsector::algebra::{int, rat, GSeries, PhasePoly, Rational};
use hdsector::constraint::solve_constraint;
use hdsector::darboux::{build_map, invert_map, verify_map, GaugePolicy, NormalForm};
use hdsector::model::ModelSpec;
use hdsector::reduction::reduce;
use hdsector::spectrum::{fock_diagonalize, rs_energies, CubicQuarticModel, Scales};
use serde::Serialize;

use crate::report::{Check, Report, Table};

/// `(num, den, q power, q̇ power, ω power)`.
type Term = (i64, i64, u32, u32, i32);

const F_SERIES: &[&[Term]] = &[
    &[(-1, 1, 1, 0, 2)],
    &[(-5, 1, 2, 0, 4), (4, 1, 0, 2, 2)],
    &[(-76, 1, 3, 0, 6), (140, 1, 1, 2, 4)],
    &[(-1959, 1, 4, 0, 8), (6800, 1, 2, 2, 6), (-736, 1, 0, 4, 4)],
];

const INVERSE_MAP: &[&[Term]] = &[
    &[(1, 1, 1, 0, 0)],
    &[(1, 1, 2, 0, 2), (-2, 1, 0, 2, 0)],
    &[(50, 3, 3, 0, 4), (-18, 1, 1, 2, 2)],
    &[(760, 3, 4, 0, 6), (-716, 1, 2, 2, 4), (-84, 1, 0, 4, 2)],
    &[(111422, 15, 5, 0, 8), (-25928, 1, 3, 2, 6), (3030, 1, 1, 4, 4)],
];

const NORMAL_FORM: &[&[Term]] = &[&[], &[], &[(25, 6, 4, 0, 6)], &[], &[(30136, 45, 6, 0, 10)]];

const REDUCED_H: &[&[Term]] = &[
    &[(1, 2, 0, 2, 0), (1, 2, 2, 0, 2)],
    &[(-1, 1, 3, 0, 4), (-4, 1, 1, 2, 2)],
];

fn poly(terms: &[Term]) -> PhasePoly {
    terms.iter().fold(PhasePoly::zero(), |p, &(n, d, q, qd, w)| {
        &p + &PhasePoly::term(rat(n, d), q, qd, w)
    })
}

fn series(table: &[&[Term]]) -> GSeries {
    GSeries::from_coeffs(table.iter().map(|t| poly(t)).collect(), table.len() - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FixtureRow {
    pub table: String,
    pub order: usize,
    pub expected: String,
    pub computed: String,
    pub matches: bool,
}

fn compare(name: &str, computed: &GSeries, expected: &GSeries, rows: &mut Vec<FixtureRow>) -> bool {
    let mut all = true;
    for n in 0..=expected.order() {
        let (c, e) = (computed.coeff(n), expected.coeff(n));
        all &= c == e;
        rows.push(FixtureRow {
            table: name.into(),
            order: n,
            expected: e.to_string(),
            computed: c.to_string(),
            matches: c == e,
        });
    }
    all
}

fn beta_normal_form(beta: &Rational) -> Result<NormalForm, String> {
    let spec = ModelSpec::q_qddot_squared(2);
    let f = solve_constraint(&spec);
    let gauge = GaugePolicy::BetaFamily { beta: beta.clone() };
    let (map, nf) = build_map(&spec, &f, &gauge).map_err(|e| e.to_string())?;
    if !verify_map(&spec, &map, &nf).passed() {
        return Err(format!("beta = {}: map checks failed", format_rational(beta)));
    }
    Ok(nf)
}

/// Seven β values: every tabulated quantity is at most quadratic in β, so
/// agreement on these points is agreement as polynomials.
fn betas() -> Vec<Rational> {
    vec![int(-1), int(0), int(1), int(-3), rat(1, 2), rat(-7, 3), rat(11, 5)]
}

fn beta_checks(report: &mut Report) -> Result<(), String> {
    let mut nf_ok = true;
    let mut rs_ok = true;
    let mut t = Table::new("beta family", &["beta", "g x^3", "g^2 x^4", "g^2 hbar^2 shift of E_n"]);
    for b in betas() {
        let nf = beta_normal_form(&b)?;
        let b1 = &b + int(1);
        let cubic = -b1.clone();
        let quartic = int(5) * (&b * &b / int(2) + &b + rat(4, 3));
        let want = GSeries::from_coeffs(
            vec![
                PhasePoly::zero(),
                PhasePoly::term(cubic, 3, 0, 4),
                PhasePoly::term(quartic, 4, 0, 6),
            ],
            2,
        );
        nf_ok &= nf.potential == want;
        let model = CubicQuarticModel::from_normal_form(&nf).map_err(|e| e.to_string())?;
        for lvl in rs_energies(&model, 6).levels {
            let n = lvl.n as i64;
            let want = rat(25, 8) * int(n * n + (n + 1) * (n + 1)) + rat(1, 2) * &b1 * &b1;
            rs_ok &= lvl.alpha2.len() == 1 && lvl.alpha2_at(4) == want;
        }
        t.row(vec![
            format_rational(&b),
            format_rational(&nf.coefficient(1, 3, 4)),
            format_rational(&nf.coefficient(2, 4, 6)),
            format!("w^4 (25/8 (n^2 + (n+1)^2) + {})", format_rational(&(rat(1, 2) * &b1 * &b1))),
        ]);
    }
    report.tables.push(t);
    report.check(Check::new(
        "beta family normal form",
        nf_ok,
        format!("{} values of beta, identity for degree <= 2", betas().len()),
    ));
    report.check(Check::new("beta family energies", rs_ok, "levels 0..6 at every beta"));
    Ok(())
}

fn spectrum_checks(report: &mut Report) -> Result<(), String> {
    let g = 0.01;
    let parity = CubicQuarticModel::from_normal_form(&beta_normal_form(&int(-1))?).map_err(|e| e.to_string())?;
    let zero = CubicQuarticModel::from_normal_form(&beta_normal_form(&int(0))?).map_err(|e| e.to_string())?;
    let a = fock_diagonalize(&parity, Scales::default(), g, 200, 3).map_err(|e| e.to_string())?;
    let b = fock_diagonalize(&zero, Scales::default(), g, 200, 3).map_err(|e| e.to_string())?;
    let e0 = a.energies[0];
    let gap = b.energies[0] - e0;
    report.check(Check::new(
        "ground state at beta = -1, g = 0.01",
        (e0 - 0.5003125).abs() <= 1e-6,
        format!("E0 = {e0:.10}, expected 0.5003125"),
    ));
    report.check(Check::new(
        "beta = 0 vs beta = -1 gap",
        (gap - 5e-5).abs() <= 1e-6,
        format!("gap = {gap:.6e}, expected 5e-5"),
    ));
    Ok(())
}

/// Run every comparison and record it on `report`.
pub fn reproduce(report: &mut Report) {
    let mut rows = Vec::new();

    let f = solve_constraint(&ModelSpec::q_qddot_squared(3));
    let ok = compare("f", f.series(), &series(F_SERIES), &mut rows);
    report.check(Check::new("f series, N = 3", ok, "exact"));

    let s = reduce(&ModelSpec::q_qddot_squared(1));
    let ok = compare("[H]", &s.h_red, &series(REDUCED_H), &mut rows);
    report.check(Check::new("reduced Hamiltonian, N = 1", ok, "exact"));
    let lead = s.h_red.coeff(1).coefficient(3, 0, 4);
    report.check(Check::new(
        "[H] unbounded below",
        lead < int(0),
        format!("g q^3 coefficient {}", format_rational(&lead)),
    ));

    let spec = ModelSpec::q_qddot_squared(4);
    let f = solve_constraint(&spec);
    match build_map(&spec, &f, &GaugePolicy::ParityCancel) {
        Ok((map, nf)) => {
            let inv = invert_map(&map);
            let ok = compare("q(x, xd)", &inv.position, &series(INVERSE_MAP), &mut rows);
            report.check(Check::new("inverse map, N = 4", ok, "exact"));
            let ok = compare("V~", &nf.potential, &series(NORMAL_FORM), &mut rows);
            report.check(Check::new("normal form, N = 4", ok, "exact"));
            let positive = !nf.v_table.is_empty() && nf.v_table.iter().all(|e| e.coeff > int(0));
            report.check(Check::new("normal form positive", positive, "all coefficients through g^4"));
            report.check(Check::new("map self-checks", verify_map(&spec, &map, &nf).passed(), "pullback, round trip, standard form"));
        }
        Err(e) => report.fail_stage("darboux", e.to_string()),
    }

    if let Err(e) = beta_checks(report) {
        report.fail_stage("beta family", e);
    }
    if let Err(e) = spectrum_checks(report) {
        report.fail_stage("spectrum", e);
    }

    let mut t = Table::new("coefficient tables", &["table", "order", "match", "computed"]);
    for r in &rows {
        let m = if r.matches { "yes" } else { "NO" };
        t.row(vec![r.table.clone(), r.order.to_string(), m.into(), r.computed.clone()]);
    }
    report.tables.insert(0, t);
    report.result("fixtures", &rows);
}
