//! Order-by-order construction of canonical coordinates `(x, ẋ)` in which the
//! reduced symplectic form is `dẋ ∧ dx` and the Hamiltonian reads
//! `½ẋ² + ½ω²x² + Ṽ(x)`.
//!
//! The map is `x = q − M`, `ẋ = q̇ − DM` with `M = Σ gⁿ mₙ(q, q̇)`. Writing
//! `mₙ = ∂Φₙ/∂q̇`, the order-n flatness condition becomes
//! `∂²(D₀Φₙ)/∂q̇² = Kₙ` with `Kₙ` built from lower orders, so
//! `D₀Φₙ = Rₙ + Sₙ(q)` where `Rₙ` is the double q̇-antiderivative of `Kₙ` and
//! the gauge function `Sₙ` must remove the angle-independent part.

mod beta;
mod d0;

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::rational::{format_rational, parse_rational};
use crate::algebra::{AlgebraError, GSeries, PhaseMonomial, PhasePoly, PhaseVar, Rational};
use crate::constraint::{d_apply, FSeries};
use crate::model::ModelSpec;
use crate::reduction::{reduce_with, IdentityCheck};

pub use beta::{beta_family_m, beta_family_velocity};
pub use d0::{d0_apply, d0_solve, zero_mode, zero_mode_canceller, D0Solution};

#[derive(Debug, Error)]
pub enum DarbouxError {
    #[error("parity gauge needs a monomial potential of odd total degree, got {0}")]
    ParityNeedsOddDegree(String),
    #[error("beta family is defined only for V = q*qdd^2 through order 2 ({0})")]
    BetaFamilyUnsupported(String),
    #[error("order {order}: zero mode {zero_mode} is not cancelled by the gauge function")]
    ZeroModeNotCancelled { order: usize, zero_mode: String },
    #[error("order {order}: solved m does not satisfy the flatness equation")]
    FlatnessFailed { order: usize },
    #[error("order {order}: no gauge parameter removes x^{power} (coefficient independent of alpha)")]
    ParityDegenerate { order: usize, power: u32 },
    #[error("order {order}: transported Hamiltonian keeps velocity-dependent terms: {residual}")]
    NotStandardForm { order: usize, residual: String },
    #[error("symplectic pullback fails at order {0}")]
    PullbackFailed(usize),
    #[error("fixture check failed: {0}")]
    FixtureMismatch(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// How the residual `Sₙ(q)` freedom is fixed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum GaugePolicy {
    /// `Sₙ` only cancels the zero mode.
    Minimal,
    /// As minimal, plus `αₙ q^{n(a−2)+2}` at odd n tuned so the odd part of Ṽ vanishes.
    ParityCancel,
    /// The one-parameter family for `V = q q̈²` through order 2.
    BetaFamily {
        #[serde(with = "crate::algebra::rational")]
        beta: Rational,
    },
}

impl fmt::Display for GaugePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugePolicy::Minimal => write!(f, "minimal"),
            GaugePolicy::ParityCancel => write!(f, "parity"),
            GaugePolicy::BetaFamily { beta } => write!(f, "beta={}", format_rational(beta)),
        }
    }
}

impl FromStr for GaugePolicy {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "minimal" => Ok(GaugePolicy::Minimal),
            "parity" | "parityCancel" => Ok(GaugePolicy::ParityCancel),
            other => match other.strip_prefix("beta=") {
                Some(b) => Ok(GaugePolicy::BetaFamily {
                    beta: parse_rational(b)?,
                }),
                None => Err(AlgebraError::ParseRational(format!("unknown gauge `{other}`"))),
            },
        }
    }
}

/// The constructed transformation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DarbouxMap {
    pub order: usize,
    pub gauge: GaugePolicy,
    /// `m₁ … m_N`.
    pub m_list: Vec<PhasePoly>,
    pub phi_list: Vec<PhasePoly>,
    pub s_list: Vec<PhasePoly>,
    /// Parity parameter per order; `None` where no tuning happened.
    #[serde(with = "opt_rational_list")]
    pub alpha_list: Vec<Option<Rational>>,
    /// The constraint solution the map was built on; `DM` needs it.
    pub f: FSeries,
}

mod opt_rational_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::algebra::rational::{format_rational, parse_rational};
    use crate::algebra::Rational;

    pub fn serialize<S: Serializer>(v: &[Option<Rational>], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<Option<String>> = v.iter().map(|o| o.as_ref().map(format_rational)).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<Rational>>, D::Error> {
        let strs: Vec<Option<String>> = Vec::deserialize(d)?;
        strs.into_iter()
            .map(|o| {
                o.map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
                    .transpose()
            })
            .collect()
    }
}

impl DarbouxMap {
    /// `M = Σ gⁿ mₙ`.
    pub fn m_series(&self) -> GSeries {
        m_series_of(&self.m_list, self.order)
    }

    /// `x(q, q̇)` and `ẋ(q, q̇)`.
    pub fn forward(&self) -> SeriesPair {
        forward_of(&self.m_series(), &self.f.with_order(self.order))
    }
}

fn m_series_of(ms: &[PhasePoly], order: usize) -> GSeries {
    let mut coeffs = vec![PhasePoly::zero()];
    coeffs.extend(ms.iter().take(order).cloned());
    coeffs.resize(order + 1, PhasePoly::zero());
    GSeries::from_coeffs(coeffs, order)
}

/// A pair of series in two phase variables, e.g. `(x(q,q̇), ẋ(q,q̇))` or
/// `(q(x,ẋ), q̇(x,ẋ))`. In the second case the polynomial variables q and q̇
/// stand for x and ẋ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeriesPair {
    pub position: GSeries,
    pub velocity: GSeries,
}

fn forward_of(m: &GSeries, f: &FSeries) -> SeriesPair {
    let order = m.order();
    let q = GSeries::from_poly(PhasePoly::q(), order);
    let qd = GSeries::from_poly(PhasePoly::qdot(), order);
    let dm = d_apply(m, f).expect("same order");
    SeriesPair {
        position: &q - m,
        velocity: &qd - &dm,
    }
}

/// `∂ẋ/∂q̇ ∂x/∂q − ∂ẋ/∂q ∂x/∂q̇`: the factor with `dẋ∧dx = J dq̇∧dq`.
fn jacobian(map: &SeriesPair) -> GSeries {
    let (x, xd) = (&map.position, &map.velocity);
    &(&xd.differentiate(PhaseVar::QDot) * &x.differentiate(PhaseVar::Q))
        - &(&xd.differentiate(PhaseVar::Q) * &x.differentiate(PhaseVar::QDot))
}

fn invert(m: &GSeries, f: &FSeries) -> SeriesPair {
    let order = m.order();
    let x = GSeries::from_poly(PhasePoly::q(), order);
    let xd = GSeries::from_poly(PhasePoly::qdot(), order);
    let dm = d_apply(m, f).expect("same order");
    let mut q = x.clone();
    let mut qd = xd.clone();
    // Each pass fixes one more order since M starts at g¹.
    for _ in 0..=order {
        let nq = &x + &m.compose(&q, &qd).expect("same order");
        let nqd = &xd + &dm.compose(&q, &qd).expect("same order");
        q = nq;
        qd = nqd;
    }
    SeriesPair {
        position: q,
        velocity: qd,
    }
}

/// `q(x, ẋ)` and `q̇(x, ẋ)`.
pub fn invert_map(map: &DarbouxMap) -> SeriesPair {
    invert(&map.m_series(), &map.f.with_order(map.order))
}

/// One entry `vₙ ωᵖ xᵏ` of the normal-form potential.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VEntry {
    pub order: usize,
    #[serde(with = "crate::algebra::rational")]
    pub coeff: Rational,
    pub omega_pow: i32,
    pub x_pow: u32,
}

/// `Ṽ(x; g)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NormalForm {
    /// Ṽ as a series whose coefficients depend on q only (read as x).
    pub potential: GSeries,
    pub v_table: Vec<VEntry>,
}

impl NormalForm {
    pub fn from_potential(potential: GSeries) -> Self {
        let mut v_table = Vec::new();
        for (n, c) in potential.coeffs().iter().enumerate() {
            for (m, v) in c.terms() {
                v_table.push(VEntry {
                    order: n,
                    coeff: v.clone(),
                    omega_pow: m.omega,
                    x_pow: m.q,
                });
            }
        }
        v_table.sort_by_key(|e| (e.order, e.x_pow, e.omega_pow));
        NormalForm { potential, v_table }
    }

    /// Coefficient of `gⁿ ωᵖ xᵏ`, zero if absent.
    pub fn coefficient(&self, n: usize, x_pow: u32, omega_pow: i32) -> Rational {
        self.potential.coeff(n).coefficient(x_pow, 0, omega_pow)
    }

    pub fn order(&self) -> usize {
        self.potential.order()
    }
}

fn harmonic_hamiltonian() -> PhasePoly {
    &PhasePoly::term(Rational::new(1.into(), 2.into()), 0, 2, 0)
        + &PhasePoly::term(Rational::new(1.into(), 2.into()), 2, 0, 2)
}

/// `[H](q(x,ẋ), q̇(x,ẋ))`.
fn transport(h: &GSeries, inverse: &SeriesPair) -> GSeries {
    h.compose(&inverse.position, &inverse.velocity)
        .expect("same order")
}

/// Split a transported Hamiltonian into `Ṽ(x)` and whatever is left that is
/// not of standard form.
fn split_standard(h: &GSeries) -> (GSeries, GSeries) {
    let order = h.order();
    let mut v = GSeries::zero(order);
    let mut rest = GSeries::zero(order);
    let mut h0 = h.coeff(0);
    h0 -= &harmonic_hamiltonian();
    rest.set_coeff(0, h0);
    for n in 1..=order {
        let c = h.coeff(n);
        let (xo, other): (Vec<_>, Vec<_>) = c
            .terms()
            .map(|(m, v)| (*m, v.clone()))
            .partition(|(m, _)| m.qdot == 0);
        v.set_coeff(n, PhasePoly::from_terms(xo));
        rest.set_coeff(n, PhasePoly::from_terms(other));
    }
    (v, rest)
}

/// Incremental builder; holds orders `1..=built` of the map.
#[derive(Debug, Clone)]
pub struct MapBuilder {
    spec: ModelSpec,
    f: FSeries,
    omega_factor: GSeries,
    h_red: GSeries,
    m: Vec<PhasePoly>,
    phi: Vec<PhasePoly>,
    s: Vec<PhasePoly>,
    alpha: Vec<Option<Rational>>,
}

impl MapBuilder {
    pub fn new(spec: &ModelSpec, f: &FSeries) -> Self {
        let f = f.with_order(spec.order());
        let sector = reduce_with(spec, f.clone());
        MapBuilder {
            spec: spec.clone(),
            f,
            omega_factor: sector.omega_factor,
            h_red: sector.h_red,
            m: Vec::new(),
            phi: Vec::new(),
            s: Vec::new(),
            alpha: Vec::new(),
        }
    }

    pub fn built(&self) -> usize {
        self.m.len()
    }

    /// `Kₙ` for the next order `n = built + 1`: the order-n mismatch between
    /// the Jacobian of the map built so far and the symplectic factor.
    pub fn flatness_rhs(&self) -> PhasePoly {
        let n = self.built() + 1;
        let m = m_series_of(&self.m, n);
        let j = jacobian(&forward_of(&m, &self.f.with_order(n)));
        &j.coeff(n) - &self.omega_factor.coeff(n)
    }

    /// `Rₙ`, with zero integration constants.
    pub fn r_next(&self) -> PhasePoly {
        self.flatness_rhs().antiderive_qdot(2)
    }

    /// ω-weight `(l+2m−2)n + 2` of `Rₙ`, when the potential is a monomial.
    fn r_weight(&self, n: usize) -> Option<i32> {
        self.spec.frequency_step().map(|s| s * n as i32 + 2)
    }

    /// Solve the next order with gauge function `s`.
    pub fn push(&mut self, s: PhasePoly, alpha: Option<Rational>) -> Result<(), DarbouxError> {
        let n = self.built() + 1;
        let k = self.flatness_rhs();
        let rhs = &k.antiderive_qdot(2) + &s;
        let sol = d0_solve(&rhs);
        if !sol.zero_mode.is_zero() {
            return Err(DarbouxError::ZeroModeNotCancelled {
                order: n,
                zero_mode: sol.zero_mode.to_string(),
            });
        }
        let m = sol.phi.differentiate(PhaseVar::QDot);
        let check = &d0_apply(&m).differentiate(PhaseVar::QDot) + &m.differentiate(PhaseVar::Q);
        if check != k {
            return Err(DarbouxError::FlatnessFailed { order: n });
        }
        self.m.push(m);
        self.phi.push(sol.phi);
        self.s.push(s);
        self.alpha.push(alpha);
        Ok(())
    }

    /// Install a prescribed `mₙ` (fixture gauges), recovering `Φₙ` and `Sₙ`.
    pub fn push_prescribed(&mut self, m: PhasePoly) -> Result<(), DarbouxError> {
        let n = self.built() + 1;
        let k = self.flatness_rhs();
        let check = &d0_apply(&m).differentiate(PhaseVar::QDot) + &m.differentiate(PhaseVar::Q);
        if check != k {
            return Err(DarbouxError::FlatnessFailed { order: n });
        }
        let r = k.antiderive_qdot(2);
        // Φ = ∫m dq̇ + h(q); h is fixed by requiring D₀Φ − R to be q-only.
        let base = m.antiderive_qdot(1);
        let t = &d0_apply(&base) - &r;
        let linear = t.map_terms(|mono, c| {
            (mono.qdot == 1).then(|| (PhaseMonomial::new(mono.q, 0, mono.omega), c.clone()))
        });
        let h = -&linear.antiderive_q();
        let phi = &base + &h;
        let s = &d0_apply(&phi) - &r;
        if !s.is_q_only() {
            return Err(DarbouxError::FixtureMismatch(format!(
                "order {n}: gauge function depends on qdot: {s}"
            )));
        }
        self.m.push(m);
        self.phi.push(phi);
        self.s.push(s);
        self.alpha.push(None);
        Ok(())
    }

    /// Ṽ through the built order, or an error if the transported
    /// Hamiltonian is not of standard form.
    pub fn potential(&self) -> Result<GSeries, DarbouxError> {
        let n = self.built();
        let m = m_series_of(&self.m, n);
        let inv = invert(&m, &self.f.with_order(n));
        let h = transport(&self.h_red.with_order(n), &inv);
        let (v, rest) = split_standard(&h);
        if let Some(k) = rest.valuation() {
            return Err(DarbouxError::NotStandardForm {
                order: k,
                residual: rest.coeff(k).to_string(),
            });
        }
        Ok(v)
    }

    pub fn finish(self, gauge: GaugePolicy) -> DarbouxMap {
        DarbouxMap {
            order: self.spec.order(),
            gauge,
            m_list: self.m,
            phi_list: self.phi,
            s_list: self.s,
            alpha_list: self.alpha,
            f: self.f,
        }
    }
}

/// Gauge function cancelling the zero mode of the next `Rₙ` and nothing more.
pub fn minimal_gauge(builder: &MapBuilder) -> PhasePoly {
    zero_mode_canceller(&zero_mode(&builder.r_next()))
}

fn parity_degree(spec: &ModelSpec) -> Result<u32, DarbouxError> {
    match spec.degree() {
        Some(a) if a % 2 == 1 => Ok(a),
        _ => Err(DarbouxError::ParityNeedsOddDegree(spec.potential().to_string())),
    }
}

/// `αₙ` for the next (odd) order: the value for which the `x^{n(a−2)+2}` term
/// of Ṽₙ vanishes once `Sₙ = minimal + α ω^w q^{n(a−2)+2}` is used.
pub fn parity_tune(builder: &MapBuilder) -> Result<Rational, DarbouxError> {
    let a = parity_degree(&builder.spec)?;
    let n = builder.built() + 1;
    let d = n as u32 * (a - 2) + 2;
    let w = builder.r_weight(n).expect("monomial potential");
    let base = minimal_gauge(builder);
    let probe = |alpha: &Rational| -> Result<Rational, DarbouxError> {
        let mut b = builder.clone();
        b.push(&base + &PhasePoly::term(alpha.clone(), d, 0, w), None)?;
        Ok(b.potential()?.coeff(n).coefficient(d, 0, w))
    };
    let v0 = probe(&Rational::zero())?;
    let v1 = probe(&Rational::one())?;
    let slope = &v1 - &v0;
    if slope.is_zero() {
        return Err(DarbouxError::ParityDegenerate { order: n, power: d });
    }
    Ok(-v0 / slope)
}

/// Build the map through `spec.order()` under `gauge` and read off Ṽ.
pub fn build_map(
    spec: &ModelSpec,
    f: &FSeries,
    gauge: &GaugePolicy,
) -> Result<(DarbouxMap, NormalForm), DarbouxError> {
    let order = spec.order();
    let mut b = MapBuilder::new(spec, f);
    match gauge {
        GaugePolicy::Minimal => {
            for _ in 1..=order {
                let s = minimal_gauge(&b);
                b.push(s, None)?;
            }
        }
        GaugePolicy::ParityCancel => {
            let a = parity_degree(spec)?;
            for n in 1..=order {
                let s = minimal_gauge(&b);
                if n % 2 == 1 {
                    let alpha = parity_tune(&b)?;
                    let d = n as u32 * (a - 2) + 2;
                    let w = b.r_weight(n).expect("monomial potential");
                    b.push(&s + &PhasePoly::term(alpha.clone(), d, 0, w), Some(alpha))?;
                } else {
                    b.push(s, None)?;
                }
            }
        }
        GaugePolicy::BetaFamily { beta } => {
            if !spec.potential().is_q_qddot_squared() || order > 2 {
                return Err(DarbouxError::BetaFamilyUnsupported(format!(
                    "V = {}, N = {order}",
                    spec.potential()
                )));
            }
            for n in 1..=order {
                b.push_prescribed(beta_family_m(beta, n))?;
            }
        }
    }
    let potential = b.potential()?;
    let map = b.finish(gauge.clone());
    if let GaugePolicy::BetaFamily { beta } = gauge {
        let expect = beta_family_velocity(beta, order);
        if map.forward().velocity != expect {
            return Err(DarbouxError::FixtureMismatch(
                "velocity line of the beta family".into(),
            ));
        }
    }
    let w = reduce_with(spec, map.f.clone()).omega_factor;
    let pull = pullback_check(&map, &w);
    if let Some(o) = pull.first_failure() {
        return Err(DarbouxError::PullbackFailed(o.order));
    }
    Ok((map, NormalForm::from_potential(potential)))
}

/// `W(q(x,ẋ), q̇(x,ẋ)) · det ∂(q̇, q)/∂(ẋ, x) = 1` order by order.
pub fn pullback_check(map: &DarbouxMap, omega_factor: &GSeries) -> IdentityCheck {
    let inv = invert_map(map);
    let w = omega_factor
        .with_order(map.order)
        .compose(&inv.position, &inv.velocity)
        .expect("same order");
    let det = jacobian(&inv);
    IdentityCheck::compare("symplectic pullback", &(&w * &det), &GSeries::one(map.order))
}

/// Self-checks of a built map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MapChecks {
    pub pullback: IdentityCheck,
    pub round_trip_position: IdentityCheck,
    pub round_trip_velocity: IdentityCheck,
    pub transport: IdentityCheck,
}

impl MapChecks {
    pub fn passed(&self) -> bool {
        self.pullback.passed()
            && self.round_trip_position.passed()
            && self.round_trip_velocity.passed()
            && self.transport.passed()
    }
}

pub fn verify_map(spec: &ModelSpec, map: &DarbouxMap, nf: &NormalForm) -> MapChecks {
    let order = map.order;
    let sector = reduce_with(&spec.with_order(order), map.f.with_order(order));
    let inv = invert_map(map);
    let fwd = map.forward();
    let x = GSeries::from_poly(PhasePoly::q(), order);
    let xd = GSeries::from_poly(PhasePoly::qdot(), order);
    let rt_x = fwd.position.compose(&inv.position, &inv.velocity).expect("same order");
    let rt_xd = fwd.velocity.compose(&inv.position, &inv.velocity).expect("same order");
    let h = transport(&sector.h_red, &inv);
    let standard = &GSeries::from_poly(harmonic_hamiltonian(), order) + &nf.potential.with_order(order);
    MapChecks {
        pullback: pullback_check(map, &sector.omega_factor),
        round_trip_position: IdentityCheck::compare("round trip x", &rt_x, &x),
        round_trip_velocity: IdentityCheck::compare("round trip xdot", &rt_xd, &xd),
        transport: IdentityCheck::compare("standard form", &h, &standard),
    }
}
