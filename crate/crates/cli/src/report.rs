use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Equal,
}

/// One asserted property: measured value, threshold, verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
    /// Diagnostics are reported but do not affect the exit status.
    pub gated: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, relation: Relation, threshold: f64) -> Self {
        let pass = match relation {
            Relation::Below => measured < threshold,
            Relation::AtMost => measured <= threshold,
            Relation::AtLeast => measured >= threshold,
            Relation::Equal => measured == threshold,
        };
        Self {
            name: name.into(),
            measured,
            relation,
            threshold,
            pass,
            gated: true,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Relation::Equal, 1.0)
    }

    pub fn diagnostic(mut self) -> Self {
        self.gated = false;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub qflow: &'static str,
    pub qflow_core: &'static str,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            qflow: env!("CARGO_PKG_VERSION"),
            qflow_core: qflow_core::VERSION,
        }
    }
}

/// What a run writes to `report.json`. Wall-clock timings go to a separate
/// file so that reports of identical runs compare byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub mode: &'static str,
    pub config: RunConfig,
    pub versions: Versions,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub payload: Value,
}

impl RunReport {
    pub fn gates_pass(&self) -> bool {
        self.checks.iter().filter(|c| c.gated).all(|c| c.pass)
    }

    /// Fixed-width summary, one line per check.
    pub fn summary(&self) -> String {
        let mut out = format!("qflow {}: {}\n", self.mode, if self.passed { "PASS" } else { "FAIL" });
        for c in &self.checks {
            let rel = match c.relation {
                Relation::Below => "<",
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
                Relation::Equal => "==",
            };
            out.push_str(&format!(
                "  {:<5} {:<44} {:>12.4e} {rel:>2} {:<10.1e}{}\n",
                if c.pass { "ok" } else { "FAIL" },
                c.name,
                c.measured,
                c.threshold,
                if c.gated { "" } else { " (diagnostic)" }
            ));
        }
        out
    }
}
