//! One function per subcommand. Each fills a [`Report`]; stage errors are
//! recorded on the report rather than returned.

use hdsector::algebra::rational::format_rational;
use hdsector::algebra::{int, GSeries, PhasePoly};
use hdsector::constraint::{residual, solve_constraint};
use hdsector::darboux::{build_map, invert_map, verify_map, GaugePolicy};
use hdsector::model::{ModelSpec, ModelSummary};
use hdsector::numeric::{scaling_study, ScalingConfig};
use hdsector::reduction::{
    dirac_bracket_qqdot, energy_rate, hamilton_check, reduce, secondary_constraints, IdentityCheck,
};
use hdsector::spectrum::{
    fock_diagonalize, rs_energies, CubicQuarticModel, OmegaTerm, Scales,
};

use crate::config::{RunConfig, Validated};
use crate::fixtures;
use crate::report::{Check, Report, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SolveF,
    Reduce,
    Darboux,
    Spectrum,
    Verify,
    ReproducePaper,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SolveF => "solve-f",
            Command::Reduce => "reduce",
            Command::Darboux => "darboux",
            Command::Spectrum => "spectrum",
            Command::Verify => "verify",
            Command::ReproducePaper => "reproduce-paper",
        }
    }
}

pub fn run(cmd: Command, cfg: &RunConfig, v: &Validated) -> Report {
    let mut r = Report::new(cmd.name(), cfg);
    if cmd != Command::ReproducePaper {
        r.result("model", &ModelSummary::from(&v.spec));
    }
    match cmd {
        Command::SolveF => solve_f(&mut r, v),
        Command::Reduce => reduce_cmd(&mut r, v),
        Command::Darboux => darboux(&mut r, v),
        Command::Spectrum => spectrum(&mut r, cfg, v),
        Command::Verify => verify(&mut r, cfg, v),
        Command::ReproducePaper => fixtures::reproduce(&mut r),
    }
    r
}

fn identity(r: &mut Report, c: &IdentityCheck) {
    let detail = match c.first_failure() {
        Some(o) => format!("fails at g^{}: {}", o.order, o.residual),
        None => format!("exact through g^{}", c.orders.len().saturating_sub(1)),
    };
    r.check(Check::new(c.name.clone(), c.passed(), detail));
}

fn zero_check(r: &mut Report, name: &str, s: &GSeries) {
    let detail = match s.valuation() {
        None => "identically zero".to_string(),
        Some(n) => format!("nonzero at g^{n}: {}", s.coeff(n)),
    };
    r.check(Check::new(name, s.is_zero(), detail));
}

fn series_table(title: &str, cols: &[(&str, &GSeries)]) -> Table {
    let mut headers = vec!["order"];
    headers.extend(cols.iter().map(|c| c.0));
    let mut t = Table::new(title, &headers);
    let order = cols.iter().map(|c| c.1.order()).max().unwrap_or(0);
    for n in 0..=order {
        let mut row = vec![n.to_string()];
        row.extend(cols.iter().map(|c| c.1.coeff(n).to_string()));
        t.row(row);
    }
    t
}

fn solve_f(r: &mut Report, v: &Validated) {
    let f = solve_constraint(&v.spec);
    zero_check(r, "constraint residual", &residual(&v.spec, &f));
    r.tables.push(series_table("f = qdd on the constraint surface", &[("f_n", f.series())]));
    r.result("f", &f);
}

fn reduce_cmd(r: &mut Report, v: &Validated) {
    let sector = reduce(&v.spec);
    r.tables.push(series_table(
        "reduced sector",
        &[
            ("[p1]", &sector.p1_red),
            ("[p2]", &sector.p2_red),
            ("W", &sector.omega_factor),
            ("[H]", &sector.h_red),
        ],
    ));
    match dirac_bracket_qqdot(&sector) {
        Ok(d) => {
            r.tables.push(series_table("Dirac bracket", &[("{q, qd}_D", &d)]));
            let one = GSeries::one(v.spec.order());
            identity(r, &IdentityCheck::compare("{q, qd}_D W = 1", &(&d * &sector.omega_factor), &one));
            r.result("diracBracket", &d);
        }
        Err(e) => r.fail_stage("dirac bracket", e.to_string()),
    }
    match hamilton_check(&sector) {
        Ok(h) => {
            for c in &h.checks {
                identity(r, c);
            }
        }
        Err(e) => r.fail_stage("hamilton check", e.to_string()),
    }
    let (s1, s2) = secondary_constraints(&v.spec, &sector.f);
    zero_check(r, "no secondary constraint from phi1", &s1);
    zero_check(r, "no secondary constraint from phi2", &s2);
    zero_check(r, "D[H] = 0", &energy_rate(&sector));
    r.result("omegaFactor", &sector.omega_factor);
    r.result("hRed", &sector.h_red);
    r.result("p1Red", &sector.p1_red);
    r.result("p2Red", &sector.p2_red);
}

fn darboux(r: &mut Report, v: &Validated) {
    let f = solve_constraint(&v.spec);
    let (map, nf) = match build_map(&v.spec, &f, &v.gauge) {
        Ok(x) => x,
        Err(e) => return r.fail_stage("darboux", e.to_string()),
    };
    let checks = verify_map(&v.spec, &map, &nf);
    for c in [&checks.pullback, &checks.round_trip_position, &checks.round_trip_velocity, &checks.transport] {
        identity(r, c);
    }
    let mut t = Table::new(&format!("gauge {}", map.gauge), &["order", "m_n", "S_n", "alpha_n"]);
    for n in 0..map.m_list.len() {
        t.row(vec![
            (n + 1).to_string(),
            map.m_list[n].to_string(),
            map.s_list.get(n).map(PhasePoly::to_string).unwrap_or_default(),
            map.alpha_list
                .get(n)
                .and_then(|a| a.as_ref())
                .map(format_rational)
                .unwrap_or_else(|| "-".into()),
        ]);
    }
    r.tables.push(t);
    let fwd = map.forward();
    let inv = invert_map(&map);
    r.tables.push(series_table(
        "inverse map",
        &[("q(x, xd)", &inv.position), ("qd(x, xd)", &inv.velocity)],
    ));
    let mut vt = Table::new("normal form potential", &["order", "coeff", "omega power", "x power"]);
    for e in &nf.v_table {
        vt.row(vec![
            e.order.to_string(),
            format_rational(&e.coeff),
            e.omega_pow.to_string(),
            e.x_pow.to_string(),
        ]);
    }
    r.tables.push(vt);
    // Signs are reported, not asserted.
    let signs: Vec<String> = nf
        .v_table
        .iter()
        .map(|e| format!("g^{} x^{}: {}", e.order, e.x_pow, if e.coeff > int(0) { "+" } else { "-" }))
        .collect();
    r.result("normalFormSigns", &signs);
    r.result("forward", &fwd);
    r.result("inverse", &inv);
    r.result("map", &map);
    r.result("normalForm", &nf);
}

fn omega_terms(ts: &[OmegaTerm]) -> String {
    if ts.is_empty() {
        return "0".into();
    }
    ts.iter()
        .map(|t| format!("{} w^{}", format_rational(&t.coeff), t.omega_pow))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn spectrum_model(v: &Validated) -> Result<CubicQuarticModel, String> {
    // With β set the model is the β family of `V = q q̈²`.
    let (spec, gauge) = match &v.beta {
        Some(b) => (ModelSpec::q_qddot_squared(2), GaugePolicy::BetaFamily { beta: b.clone() }),
        None => (v.spec.with_order(2), v.gauge.clone()),
    };
    let f = solve_constraint(&spec);
    let (_, nf) = build_map(&spec, &f, &gauge).map_err(|e| e.to_string())?;
    CubicQuarticModel::from_normal_form(&nf).map_err(|e| e.to_string())
}

fn spectrum(r: &mut Report, cfg: &RunConfig, v: &Validated) {
    let s = &cfg.spectrum;
    let model = match spectrum_model(v) {
        Ok(m) => m,
        Err(e) => return r.fail_stage("spectrum model", e),
    };
    let table = rs_energies(&model, s.levels as u32 - 1);
    let scales = Scales { omega: cfg.numeric.omega, hbar: s.hbar };
    let fock = match fock_diagonalize(&model, scales, s.g, s.basis, s.levels) {
        Ok(f) => f,
        Err(e) => return r.fail_stage("fock diagonalization", e.to_string()),
    };
    let mut t = Table::new(
        &format!("energies at g = {}", s.g),
        &["n", "alpha0", "g^2 hbar^2 coefficient", "E (RS)", "E (Fock)", "difference"],
    );
    for (lvl, ef) in table.levels.iter().zip(&fock.energies) {
        let e = lvl.eval(scales.omega, scales.hbar, s.g);
        t.row(vec![
            lvl.n.to_string(),
            format_rational(&lvl.alpha0),
            omega_terms(&lvl.alpha2),
            format!("{e:.12}"),
            format!("{ef:.12}"),
            format!("{:.3e}", ef - e),
        ]);
    }
    r.tables.push(t);
    r.check(Check::new(
        "Fock basis converged",
        fock.converged(s.tol),
        format!("change {:.3e} from {} to {} states", fock.max_change, s.basis, s.basis + 50),
    ));
    let e0 = table.levels[0].eval(scales.omega, scales.hbar, s.g);
    let d = (fock.energies[0] - e0).abs();
    r.check(Check::new(
        "ground state: perturbation theory vs diagonalization",
        d <= s.tol,
        format!("|difference| = {d:.3e}, tolerance {:e}", s.tol),
    ));
    r.result("rs", &table);
    r.result("fock", &fock);
}

fn verify(r: &mut Report, cfg: &RunConfig, v: &Validated) {
    let n = &cfg.numeric;
    let sc = ScalingConfig {
        orders: n.orders.clone(),
        couplings: n.couplings.clone(),
        omega: n.omega,
        tol: n.tol,
        dt: n.dt,
        horizon: n.horizon,
        q0: n.q0,
        qdot0: n.qdot0,
        gauge: v.gauge.clone(),
    };
    let rep = match scaling_study(&v.spec, &sc) {
        Ok(x) => x,
        Err(e) => return r.fail_stage("scaling study", e.to_string()),
    };
    let mut t = Table::new("sweep", &["N", "g", "EL residual", "energy drift", "normal form deviation"]);
    for row in &rep.rows {
        t.row(vec![
            row.order.to_string(),
            row.g.to_string(),
            format!("{:.3e}", row.el_residual),
            format!("{:.3e}", row.energy_drift),
            format!("{:.3e}", row.normal_form_deviation),
        ]);
    }
    r.tables.push(t);
    for fit in &rep.fits {
        r.check(Check::new(
            format!("N = {} {} exponent", fit.order, fit.quantity),
            fit.passed,
            format!("{:.3}, expected {} +/- 0.5", fit.exponent, fit.expected),
        ));
    }
    let top_n = *n.orders.iter().max().expect("validated");
    let top_g = n.couplings.iter().copied().fold(f64::MIN, f64::max);
    if let Some(row) = rep.row(top_n, top_g) {
        r.check(Check::new(
            format!("energy drift at N = {top_n}, g = {top_g}"),
            row.energy_drift <= n.drift_bound,
            format!("{:.3e}, bound {:e}", row.energy_drift, n.drift_bound),
        ));
    }
    r.result("scaling", &rep);
}
