//! Run configuration: a TOML file with `[model]`, `[numeric]` and
//! `[spectrum]` sections, overridden field by field from the command line.

use std::path::Path;

use anyhow::Context;
use hdsector::algebra::rational::parse_rational;
use hdsector::algebra::{JetPoly, Rational};
use hdsector::darboux::GaugePolicy;
use hdsector::model::{ModelSpec, PotentialSpec};
use hdsector::numeric::ScalingConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub model: ModelConfig,
    pub numeric: NumericConfig,
    pub spectrum: SpectrumConfig,
}

/// `V = q^k q̇^l q̈^m`, or the sum of `terms` when that list is non-empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ModelConfig {
    pub k: u32,
    pub l: u32,
    pub m: u32,
    pub terms: Vec<TermConfig>,
    pub order: usize,
    pub gauge: String,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            k: 1,
            l: 0,
            m: 2,
            terms: Vec::new(),
            order: 4,
            gauge: "parity".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct TermConfig {
    pub coeff: String,
    #[serde(default)]
    pub q: u32,
    #[serde(default)]
    pub qdot: u32,
    #[serde(default)]
    pub qddot: u32,
    #[serde(default)]
    pub omega: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct NumericConfig {
    pub omega: f64,
    pub couplings: Vec<f64>,
    pub orders: Vec<usize>,
    pub tol: f64,
    pub dt: f64,
    pub horizon: f64,
    pub q0: f64,
    pub qdot0: f64,
    /// Bound on the energy drift at the largest coupling and order.
    pub drift_bound: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        let s = ScalingConfig::default();
        NumericConfig {
            omega: s.omega,
            couplings: s.couplings,
            orders: s.orders,
            tol: s.tol,
            dt: s.dt,
            horizon: s.horizon,
            q0: s.q0,
            qdot0: s.qdot0,
            drift_bound: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SpectrumConfig {
    /// When set, the spectrum uses that member of the β family for `V = q q̈²`;
    /// otherwise the normal form under `model.gauge`.
    pub beta: Option<String>,
    pub g: f64,
    pub hbar: f64,
    pub levels: usize,
    pub basis: usize,
    /// Allowed ground-state gap between perturbation theory and diagonalization.
    pub tol: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            beta: Some("-1".into()),
            g: 0.01,
            hbar: 1.0,
            levels: 3,
            basis: 200,
            tol: 1e-6,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).context("invalid configuration file")
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Canonical JSON used for hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Check everything up front and report all problems at once.
    pub fn validate(&self) -> Result<Validated, ConfigError> {
        let mut errs = Vec::new();
        let potential = if self.model.terms.is_empty() {
            Some(PotentialSpec::monomial(self.model.k, self.model.l, self.model.m))
        } else {
            let mut v = JetPoly::zero();
            let mut ok = true;
            for t in &self.model.terms {
                match parse_rational(&t.coeff) {
                    Ok(c) => v = &v + &JetPoly::term(c, [t.q, t.qdot, t.qddot, 0, 0], t.omega),
                    Err(e) => {
                        ok = false;
                        errs.push(format!("model.terms: {e}"));
                    }
                }
            }
            ok.then_some(PotentialSpec::General(v))
        };
        let spec = potential.and_then(|p| match ModelSpec::new(p, self.model.order) {
            Ok(s) => Some(s),
            Err(e) => {
                errs.push(format!("model: {e}"));
                None
            }
        });
        let gauge = match self.model.gauge.parse::<GaugePolicy>() {
            Ok(g) => Some(g),
            Err(_) => {
                errs.push(format!(
                    "model.gauge: expected minimal, parity or beta=<rational>, got `{}`",
                    self.model.gauge
                ));
                None
            }
        };
        let beta = match &self.spectrum.beta {
            None => None,
            Some(b) => match parse_rational(b) {
                Ok(r) => Some(r),
                Err(e) => {
                    errs.push(format!("spectrum.beta: {e}"));
                    None
                }
            },
        };
        let n = &self.numeric;
        let positive = [
            ("numeric.omega", n.omega),
            ("numeric.tol", n.tol),
            ("numeric.dt", n.dt),
            ("numeric.horizon", n.horizon),
            ("numeric.drift-bound", n.drift_bound),
            ("spectrum.hbar", self.spectrum.hbar),
            ("spectrum.tol", self.spectrum.tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("{name}: must be positive, got {v}"));
            }
        }
        if n.couplings.len() != 2 || n.couplings[0] == n.couplings[1] || n.couplings.iter().any(|g| !(*g > 0.0)) {
            errs.push(format!("numeric.couplings: need two distinct positive values, got {:?}", n.couplings));
        }
        if n.orders.is_empty() || n.orders.contains(&0) {
            errs.push(format!("numeric.orders: need at least one order >= 1, got {:?}", n.orders));
        }
        if !(self.spectrum.g >= 0.0 && self.spectrum.g.is_finite()) {
            errs.push(format!("spectrum.g: must be non-negative, got {}", self.spectrum.g));
        }
        if self.spectrum.levels == 0 || self.spectrum.basis <= self.spectrum.levels {
            errs.push(format!(
                "spectrum: need 0 < levels < basis, got levels = {}, basis = {}",
                self.spectrum.levels, self.spectrum.basis
            ));
        }
        match (spec, gauge) {
            (Some(spec), Some(gauge)) if errs.is_empty() => Ok(Validated { spec, gauge, beta }),
            _ => Err(ConfigError(errs)),
        }
    }
}

/// All validation failures of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub Vec<String>);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "configuration rejected:")?;
        for e in &self.0 {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Parsed and checked pieces of a configuration.
#[derive(Debug, Clone)]
pub struct Validated {
    pub spec: ModelSpec,
    pub gauge: GaugePolicy,
    pub beta: Option<Rational>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let v = RunConfig::default().validate().unwrap();
        assert!(v.spec.potential().is_q_qddot_squared());
        assert_eq!(v.gauge, GaugePolicy::ParityCancel);
    }

    #[test]
    fn file_round_trip() {
        let c = RunConfig::default();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = RunConfig::from_toml("[model]\norder = 2\n").unwrap();
        assert_eq!(c.model.order, 2);
        assert_eq!(c.model.m, 2);
        assert!(RunConfig::from_toml("[model]\nbogus = 1\n").is_err());
    }

    #[test]
    fn errors_are_aggregated() {
        let mut c = RunConfig::default();
        c.model.m = 1;
        c.model.gauge = "nope".into();
        c.numeric.tol = -1.0;
        let e = c.validate().unwrap_err();
        assert_eq!(e.0.len(), 3, "{e}");
        assert!(e.to_string().contains("second derivatives"));
    }

    #[test]
    fn explicit_terms() {
        let c = RunConfig::from_toml(
            "[model]\nterms = [{ coeff = \"1\", q = 1, qddot = 2 }, { coeff = \"1/2\", qddot = 2 }]\n",
        )
        .unwrap();
        let v = c.validate().unwrap();
        assert!(v.spec.degree().is_none());
    }
}
