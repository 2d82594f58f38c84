//! Serializable verification reports and their text rendering.

use serde::Serialize;

/// Schema version of the JSON report document.
pub const SCHEMA_VERSION: u32 = 1;

/// Echo of the run configuration, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub model: String,
    pub order: usize,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

/// One verification check row.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    /// `None` encodes a non-finite residual (serialized as `null`).
    pub max_residual: Option<f64>,
    pub samples: usize,
    pub paper_anchor: String,
}

impl CheckRow {
    pub fn new(name: &str, passed: bool, residual: f64, samples: usize, anchor: &str) -> CheckRow {
        CheckRow {
            name: name.to_string(),
            passed,
            max_residual: residual.is_finite().then_some(residual),
            samples,
            paper_anchor: anchor.to_string(),
        }
    }
}

/// The full report document.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub checks: Vec<CheckRow>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn new(config: ConfigEcho, checks: Vec<CheckRow>) -> SuiteReport {
        let passed = checks.iter().all(|c| c.passed);
        SuiteReport {
            schema_version: SCHEMA_VERSION,
            config,
            checks,
            passed,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    /// Fixed-order, aligned text table for diffable logs.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "model {}  order {}  samples {}  tol {:e}  seed {}\n",
            self.config.model,
            self.config.order,
            self.config.samples,
            self.config.tol,
            self.config.seed
        ));
        out.push_str(&format!(
            "{:<28} {:<6} {:>13} {:>8}  {}\n",
            "check", "status", "max_residual", "samples", "anchor"
        ));
        for c in &self.checks {
            let residual = match c.max_residual {
                Some(r) => format!("{r:.6e}"),
                None => "inf".to_string(),
            };
            out.push_str(&format!(
                "{:<28} {:<6} {:>13} {:>8}  {}\n",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                residual,
                c.samples,
                c.paper_anchor
            ));
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.passed { "PASS" } else { "FAIL" }
        ));
        out
    }
}
