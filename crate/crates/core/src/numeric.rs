//! Floating-point checks on the perturbative sector: integrate `q̈ = f(q, q̇)`,
//! measure the Euler–Lagrange residual and energy drift along the solution,
//! compare with evolution in normal-form coordinates, and evaluate the
//! unreduced Ostrogradski Hamiltonian.

use nalgebra::Vector2;
use ode_solvers::dop_shared::IntegrationError;
use ode_solvers::{Dop853, OutputType, System};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{CompiledPoly, JetVar, PhaseVar};
use crate::constraint::{d_apply, FSeries};
use crate::constraint::solve_constraint;
use crate::darboux::{build_map, invert_map, DarbouxError, DarbouxMap, GaugePolicy, NormalForm};
use crate::model::{euler_lagrange, lagrangian_value, CoupledJet, ModelSpec};
use crate::reduction::{reduce_with, ReducedSector};

#[derive(Debug, Error)]
pub enum NumericError {
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("second momentum cannot be inverted for qdd: {0}")]
    Domain(String),
    #[error("trajectories sampled on different grids")]
    GridMismatch,
    #[error("scaling study needs exactly two distinct couplings, got {0:?}")]
    Couplings(Vec<f64>),
    #[error(transparent)]
    Darboux(#[from] DarbouxError),
}

impl From<IntegrationError> for NumericError {
    fn from(e: IntegrationError) -> Self {
        NumericError::Integration(e.to_string())
    }
}

/// Numeric values bound to the exact objects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NumericParams {
    pub omega: f64,
    pub g: f64,
    /// Used as both relative and absolute tolerance.
    pub tol: f64,
    /// Spacing of the dense output.
    pub dt: f64,
}

impl Default for NumericParams {
    fn default() -> Self {
        NumericParams {
            omega: 1.0,
            g: 0.0,
            tol: 1e-10,
            dt: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `(q, q̇)` per sample.
    pub states: Vec<[f64; 2]>,
    pub params: NumericParams,
    pub order: usize,
    pub potential: String,
}

struct SecondOrder<'a> {
    accel: &'a dyn Fn(f64, f64) -> f64,
}

impl System<f64, Vector2<f64>> for SecondOrder<'_> {
    fn system(&self, _t: f64, y: &Vector2<f64>, dy: &mut Vector2<f64>) {
        dy[0] = y[1];
        dy[1] = (self.accel)(y[0], y[1]);
    }
}

fn check_tol(tol: f64) -> Result<(), NumericError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(NumericError::BadTolerance(tol))
    }
}

/// Dense samples of `ẍ = accel(x, ẋ)` on `[0, t_end]`.
fn integrate_dense(
    accel: &dyn Fn(f64, f64) -> f64,
    y0: [f64; 2],
    t_end: f64,
    dt: f64,
    tol: f64,
) -> Result<(Vec<f64>, Vec<[f64; 2]>), NumericError> {
    check_tol(tol)?;
    let mut solver = Dop853::new(
        SecondOrder { accel },
        0.0,
        t_end,
        dt,
        Vector2::new(y0[0], y0[1]),
        tol,
        tol,
    );
    solver.integrate()?;
    let times = solver.x_out().clone();
    let mut states = Vec::with_capacity(times.len());
    for (t, y) in times.iter().zip(solver.y_out()) {
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(NumericError::NonFinite(*t));
        }
        states.push([y[0], y[1]]);
    }
    Ok((times, states))
}

/// State at `t1` starting from `y0` at `t0`; `t1 < t0` integrates backwards.
pub fn propagate(
    f: &FSeries,
    params: &NumericParams,
    y0: [f64; 2],
    t0: f64,
    t1: f64,
) -> Result<[f64; 2], NumericError> {
    check_tol(params.tol)?;
    let fc = f.series().compile(params.omega, params.g);
    let accel = |q: f64, qd: f64| fc.eval(q, qd);
    let mut solver = Dop853::new(
        SecondOrder { accel: &accel },
        t0,
        t1,
        (t1 - t0).abs(),
        Vector2::new(y0[0], y0[1]),
        params.tol,
        params.tol,
    );
    solver.set_output(OutputType::Sparse);
    solver.integrate()?;
    let y = solver.y_out().last().expect("initial state is always recorded");
    Ok([y[0], y[1]])
}

/// Integrate the constrained dynamics `q̈ = f(q, q̇)` on `[0, t_end]`.
pub fn integrate_constrained(
    spec: &ModelSpec,
    f: &FSeries,
    params: &NumericParams,
    q0: f64,
    qdot0: f64,
    t_end: f64,
) -> Result<Trajectory, NumericError> {
    let fc = f.series().compile(params.omega, params.g);
    let accel = |q: f64, qd: f64| fc.eval(q, qd);
    let (times, states) = integrate_dense(&accel, [q0, qdot0], t_end, params.dt, params.tol)?;
    Ok(Trajectory {
        times,
        states,
        params: *params,
        order: f.order(),
        potential: spec.potential().to_string(),
    })
}

/// `f`, `Df`, `D²f` as exact polynomials, with no truncation in g beyond
/// what f itself carries.
struct JetEvaluator {
    f: CompiledPoly,
    df: CompiledPoly,
    d2f: CompiledPoly,
}

impl JetEvaluator {
    fn new(f: &FSeries, omega: f64, g: f64) -> Self {
        let wide = f.with_order(3 * f.order());
        let df = d_apply(wide.series(), &wide).expect("same order");
        let d2f = d_apply(&df, &wide).expect("same order");
        JetEvaluator {
            f: wide.series().compile(omega, g),
            df: df.compile(omega, g),
            d2f: d2f.compile(omega, g),
        }
    }

    fn jet(&self, q: f64, qd: f64) -> [f64; 5] {
        [q, qd, self.f.eval(q, qd), self.df.eval(q, qd), self.d2f.eval(q, qd)]
    }
}

/// Max over the samples of the Euler–Lagrange expression with the higher
/// derivatives taken by chaining D along the constraint surface.
pub fn el_residual(spec: &ModelSpec, f: &FSeries, traj: &Trajectory) -> f64 {
    let NumericParams { omega, g, .. } = traj.params;
    let jets = JetEvaluator::new(f, omega, g);
    let el = euler_lagrange(spec);
    traj.states
        .iter()
        .map(|s| el.eval(&jets.jet(s[0], s[1]), omega, g).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DriftReport {
    pub initial_energy: f64,
    pub max_drift: f64,
}

/// `max |[H](t) − [H](0)|`.
pub fn energy_drift(sector: &ReducedSector, traj: &Trajectory) -> DriftReport {
    let h = sector.h_red.compile(traj.params.omega, traj.params.g);
    let e0 = h.eval(traj.states[0][0], traj.states[0][1]);
    let max_drift = traj
        .states
        .iter()
        .map(|s| (h.eval(s[0], s[1]) - e0).abs())
        .fold(0.0, f64::max);
    DriftReport {
        initial_energy: e0,
        max_drift,
    }
}

/// Evolve in normal-form coordinates and map back; sup-norm distance to
/// `traj` over its samples.
pub fn normal_form_compare(
    map: &DarbouxMap,
    nf: &NormalForm,
    traj: &Trajectory,
) -> Result<f64, NumericError> {
    let NumericParams { omega, g, tol, dt } = traj.params;
    let fwd = map.forward();
    let inv = invert_map(map);
    let (x0, xd0) = {
        let s = traj.states[0];
        (
            fwd.position.eval(s[0], s[1], omega, g),
            fwd.velocity.eval(s[0], s[1], omega, g),
        )
    };
    let dv = nf.potential.differentiate(PhaseVar::Q).compile(omega, g);
    let accel = |x: f64, xd: f64| -omega * omega * x - dv.eval(x, xd);
    let t_end = *traj.times.last().expect("non-empty trajectory");
    let (times, states) = integrate_dense(&accel, [x0, xd0], t_end, dt, tol)?;
    if times.len() != traj.times.len() {
        return Err(NumericError::GridMismatch);
    }
    let qc = inv.position.compile(omega, g);
    let qdc = inv.velocity.compile(omega, g);
    let mut dev: f64 = 0.0;
    for (s, r) in states.iter().zip(&traj.states) {
        let q = qc.eval(s[0], s[1]);
        let qd = qdc.eval(s[0], s[1]);
        dev = dev.max((q - r[0]).abs()).max((qd - r[1]).abs());
    }
    Ok(dev)
}

/// `H = p₁q₂ + p₂q̈ − L` with q̈ recovered from `p₂ = −g ∂V/∂q̈` by Newton
/// iteration started at `q̈ = −ω²q₁`.
pub fn numeric_ostrogradski_h(
    spec: &ModelSpec,
    omega: f64,
    g: f64,
    [q1, q2, p1, p2]: [f64; 4],
) -> Result<f64, NumericError> {
    let v = spec.potential().to_jet();
    let v2 = v.differentiate(JetVar::QDDot);
    let v22 = v2.differentiate(JetVar::QDDot);
    let mut a = -omega * omega * q1;
    let mut converged = false;
    for _ in 0..100 {
        let jet = [q1, q2, a, 0.0, 0.0];
        let resid = -g * v2.eval(&jet, omega) - p2;
        let slope = -g * v22.eval(&jet, omega);
        if !slope.is_finite() || slope.abs() < 1e-300 {
            return Err(NumericError::Domain(format!(
                "d p2 / d qdd vanishes at q1 = {q1}, q2 = {q2}"
            )));
        }
        let step = resid / slope;
        a -= step;
        if !a.is_finite() {
            return Err(NumericError::Domain("Newton iterate diverged".into()));
        }
        if step.abs() <= 1e-15 * (1.0 + a.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(NumericError::Domain("Newton iteration did not converge".into()));
    }
    let l: &CoupledJet = &lagrangian_value(spec);
    Ok(p1 * q2 + p2 * a - l.eval(&[q1, q2, a, 0.0, 0.0], omega, g))
}

/// `log(r₁/r₂) / log(g₁/g₂)`.
pub fn scaling_exponent(r1: f64, g1: f64, r2: f64, g2: f64) -> f64 {
    (r1 / r2).ln() / (g1 / g2).ln()
}

/// Inputs of a g-halving study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScalingConfig {
    pub orders: Vec<usize>,
    pub couplings: Vec<f64>,
    pub omega: f64,
    pub tol: f64,
    pub dt: f64,
    pub horizon: f64,
    pub q0: f64,
    pub qdot0: f64,
    pub gauge: GaugePolicy,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            orders: vec![1, 3],
            couplings: vec![0.01, 0.005],
            omega: 1.0,
            tol: 1e-12,
            dt: 0.05,
            horizon: 20.0,
            q0: 1.0,
            qdot0: 0.0,
            gauge: GaugePolicy::ParityCancel,
        }
    }
}

/// Measurements at one `(N, g)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScalingRow {
    pub order: usize,
    pub g: f64,
    pub el_residual: f64,
    pub energy_drift: f64,
    pub normal_form_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScalingFit {
    pub order: usize,
    pub quantity: String,
    pub exponent: f64,
    pub expected: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScalingReport {
    pub config: ScalingConfig,
    pub rows: Vec<ScalingRow>,
    pub fits: Vec<ScalingFit>,
}

impl ScalingReport {
    pub fn passed(&self) -> bool {
        self.fits.iter().all(|f| f.passed)
    }

    pub fn row(&self, order: usize, g: f64) -> Option<&ScalingRow> {
        self.rows.iter().find(|r| r.order == order && r.g == g)
    }
}

/// Residual, drift and normal-form deviation at every `(N, g)`, with the
/// exponent of each fitted from the two couplings. A fit passes when it is
/// within ½ of `N + 1`.
pub fn scaling_study(base: &ModelSpec, cfg: &ScalingConfig) -> Result<ScalingReport, NumericError> {
    let [g1, g2] = match cfg.couplings[..] {
        [a, b] if a != b && a > 0.0 && b > 0.0 => [a, b],
        _ => return Err(NumericError::Couplings(cfg.couplings.clone())),
    };
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &n in &cfg.orders {
        let spec = base.with_order(n);
        let f = solve_constraint(&spec);
        let sector = reduce_with(&spec, f.clone());
        let (map, nf) = build_map(&spec, &f, &cfg.gauge)?;
        let mut pair = Vec::new();
        for g in [g1, g2] {
            let p = NumericParams { omega: cfg.omega, g, tol: cfg.tol, dt: cfg.dt };
            let traj = integrate_constrained(&spec, &f, &p, cfg.q0, cfg.qdot0, cfg.horizon)?;
            let row = ScalingRow {
                order: n,
                g,
                el_residual: el_residual(&spec, &f, &traj),
                energy_drift: energy_drift(&sector, &traj).max_drift,
                normal_form_deviation: normal_form_compare(&map, &nf, &traj)?,
            };
            pair.push(row.clone());
            rows.push(row);
        }
        let expected = n as f64 + 1.0;
        let quantities: [(&str, fn(&ScalingRow) -> f64); 3] = [
            ("elResidual", |r| r.el_residual),
            ("energyDrift", |r| r.energy_drift),
            ("normalFormDeviation", |r| r.normal_form_deviation),
        ];
        for (name, get) in quantities {
            let exponent = scaling_exponent(get(&pair[0]), g1, get(&pair[1]), g2);
            fits.push(ScalingFit {
                order: n,
                quantity: name.to_string(),
                exponent,
                expected,
                passed: (exponent - expected).abs() <= 0.5,
            });
        }
    }
    Ok(ScalingReport { config: cfg.clone(), rows, fits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::reduce;

    fn params(g: f64) -> NumericParams {
        NumericParams {
            g,
            tol: 1e-12,
            ..NumericParams::default()
        }
    }

    #[test]
    fn harmonic_limit() {
        let spec = ModelSpec::q_qddot_squared(2);
        let f = solve_constraint(&spec);
        let traj = integrate_constrained(&spec, &f, &params(0.0), 1.0, 0.0, 20.0).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s[0] - t.cos()).abs() < 1e-8);
        }
        assert!((traj.times.last().unwrap() - 20.0).abs() < 1e-9);
        assert!(el_residual(&spec, &f, &traj) < 1e-9);
        assert!(energy_drift(&reduce(&spec), &traj).max_drift < 1e-10);
    }

    #[test]
    fn time_reversal() {
        let spec = ModelSpec::q_qddot_squared(3);
        let f = solve_constraint(&spec);
        let p = NumericParams { g: 0.01, tol: 1e-10, ..NumericParams::default() };
        let end = propagate(&f, &p, [1.0, 0.0], 0.0, 20.0).unwrap();
        let back = propagate(&f, &p, end, 20.0, 0.0).unwrap();
        assert!((back[0] - 1.0).abs() < 10.0 * p.tol, "{back:?}");
        assert!(back[1].abs() < 10.0 * p.tol, "{back:?}");
    }

    #[test]
    fn rejects_bad_tolerance() {
        let spec = ModelSpec::q_qddot_squared(1);
        let f = solve_constraint(&spec);
        let p = NumericParams { tol: 0.0, ..NumericParams::default() };
        assert!(integrate_constrained(&spec, &f, &p, 1.0, 0.0, 1.0).is_err());
    }

    fn closed_form(omega: f64, g: f64, [q1, q2, p1, p2]: [f64; 4]) -> f64 {
        p1 * q2 - p2 * p2 / (4.0 * g * q1) - 0.5 * q2 * q2 + 0.5 * omega * omega * q1 * q1
    }

    #[test]
    fn ostrogradski_hamiltonian_closed_form() {
        let spec = ModelSpec::q_qddot_squared(1);
        let (omega, g) = (1.0, 0.01);
        for z in [[1.0, 0.0, 0.0, 2.0 * g], [0.7, -0.3, 1.2, -0.05], [-2.0, 1.0, 0.5, 0.3]] {
            let h = numeric_ostrogradski_h(&spec, omega, g, z).unwrap();
            assert!((h - closed_form(omega, g, z)).abs() < 1e-10);
        }
        assert!(numeric_ostrogradski_h(&spec, omega, g, [0.0, 1.0, 0.0, 0.1]).is_err());
    }

    #[test]
    fn ostrogradski_on_constraint_surface() {
        // [p1], [p2] and [H] are truncated at g³, so the two sides differ at g⁴.
        let spec = ModelSpec::q_qddot_squared(3);
        let sector = reduce(&spec);
        let omega = 1.3;
        let gap = |g: f64, q: f64, qd: f64| {
            let p1 = sector.p1_red.eval(q, qd, omega, g);
            let p2 = sector.p2_red.eval(q, qd, omega, g);
            let h = numeric_ostrogradski_h(&spec, omega, g, [q, qd, p1, p2]).unwrap();
            (h - sector.h_red.eval(q, qd, omega, g)).abs()
        };
        for (q, qd) in [(0.8, 0.1), (-0.5, 0.4)] {
            assert!(gap(1e-3, q, qd) < 1e-8);
            let p = scaling_exponent(gap(0.01, q, qd), 0.01, gap(0.005, q, qd), 0.005);
            assert!((p - 4.0).abs() < 0.5, "{p}");
        }
    }

    #[test]
    fn residual_scales_with_truncation() {
        for n in [1usize, 3] {
            let spec = ModelSpec::q_qddot_squared(n);
            let f = solve_constraint(&spec);
            let r = |g: f64| {
                let t = integrate_constrained(&spec, &f, &params(g), 1.0, 0.0, 20.0).unwrap();
                el_residual(&spec, &f, &t)
            };
            let p = scaling_exponent(r(0.01), 0.01, r(0.005), 0.005);
            assert!((p - (n as f64 + 1.0)).abs() < 0.5, "N = {n}: {p}");
        }
    }

    #[test]
    fn scaling_study_default() {
        let r = scaling_study(&ModelSpec::q_qddot_squared(1), &ScalingConfig::default()).unwrap();
        assert!(r.passed(), "{:?}", r.fits);
        assert_eq!(r.rows.len(), 4);
    }

    #[test]
    fn normal_form_harmonic_limit() {
        let spec = ModelSpec::q_qddot_squared(2);
        let f = solve_constraint(&spec);
        let (map, nf) = build_map(&spec, &f, &GaugePolicy::Minimal).unwrap();
        let traj = integrate_constrained(&spec, &f, &params(0.0), 0.6, 0.3, 20.0).unwrap();
        assert!(normal_form_compare(&map, &nf, &traj).unwrap() < 1e-8);
    }
}
