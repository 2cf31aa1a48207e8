//! Report model, JSON serialization and aligned text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    /// SHA-256 of the effective configuration.
    pub config_hash: String,
}

impl Provenance {
    pub fn new(config: &RunConfig) -> Self {
        let digest = Sha256::digest(config.canonical_json().as_bytes());
        let config_hash = digest.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Provenance {
            tool: "hdsector".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            core_version: hdsector::VERSION.into(),
            config_hash,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

/// Column table for the text rendering.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: &str, headers: &[&str]) -> Self {
        Table {
            title: title.into(),
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    fn render(&self, out: &mut String) {
        let cols = self.headers.len();
        let mut w = vec![0; cols];
        for r in std::iter::once(&self.headers).chain(&self.rows) {
            for (i, c) in r.iter().enumerate().take(cols) {
                w[i] = w[i].max(c.chars().count());
            }
        }
        let line = |cells: &[String], out: &mut String| {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{c:<width$}", width = w[i]))
                .collect();
            let _ = writeln!(out, "  {}", parts.join("  ").trim_end());
        };
        let _ = writeln!(out, "{}", self.title);
        line(&self.headers, out);
        let rule: Vec<String> = w.iter().map(|n| "-".repeat(*n)).collect();
        line(&rule, out);
        for r in &self.rows {
            line(r, out);
        }
        out.push('\n');
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub provenance: Provenance,
    pub config: RunConfig,
    pub passed: bool,
    pub error: Option<StageError>,
    pub checks: Vec<Check>,
    pub results: BTreeMap<String, serde_json::Value>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            provenance: Provenance::new(config),
            config: config.clone(),
            passed: true,
            error: None,
            checks: Vec::new(),
            results: BTreeMap::new(),
            tables: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn result<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).expect("result serializes");
        self.results.insert(key.into(), v);
    }

    pub fn fail_stage(&mut self, stage: &str, message: String) {
        self.passed = false;
        self.error = Some(StageError {
            stage: stage.into(),
            message,
        });
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "hdsector {} (schema {})", self.command, self.schema_version);
        let _ = writeln!(out, "config {}", self.provenance.config_hash);
        out.push('\n');
        for t in &self.tables {
            t.render(&mut out);
        }
        if !self.checks.is_empty() {
            let mut t = Table::new("checks", &["check", "result", "detail"]);
            for c in &self.checks {
                let r = if c.passed { "PASS" } else { "FAIL" };
                t.row(vec![c.name.clone(), r.into(), c.detail.clone()]);
            }
            t.render(&mut out);
        }
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error in stage {}: {}", e.stage, e.message);
        }
        let _ = writeln!(out, "overall: {}", if self.passed { "PASS" } else { "FAIL" });
        out
    }
}
