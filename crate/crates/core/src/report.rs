//! Machine-readable check reports.
//!
//! ```json
//! {"checks":[{"name":..., "d":..., "params":{...}, "measured":..., "tolerance":..., "pass":...}],
//!  "pruned_mass":..., "summary":{...}}
//! ```
//!
//! Checks are sorted by name, then `d`, then parameters, so identical runs
//! produce byte-identical reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;
use crate::tensor::json::to_pretty_json;

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub d: Option<usize>,
    pub params: BTreeMap<String, Value>,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Reported but excluded from the exit status.
    #[serde(skip_serializing_if = "is_false")]
    pub informational: bool,
}

impl Check {
    pub fn new(name: &str, d: usize, measured: f64, tolerance: f64, pass: bool) -> Self {
        Self {
            name: name.to_string(),
            d: Some(d),
            params: BTreeMap::new(),
            measured,
            tolerance,
            pass,
            informational: false,
        }
    }

    /// Passes when `measured ≤ tolerance`.
    pub fn at_most(name: &str, d: usize, measured: f64, tolerance: f64) -> Self {
        Self::new(name, d, measured, tolerance, measured <= tolerance)
    }

    /// Passes when `measured ≥ threshold`.
    pub fn at_least(name: &str, d: usize, measured: f64, threshold: f64) -> Self {
        Self::new(name, d, measured, threshold, measured >= threshold)
    }

    pub fn param(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn informational(mut self, yes: bool) -> Self {
        self.informational = yes;
        self
    }

    fn sort_key(&self) -> (String, Option<usize>, String) {
        (self.name.clone(), self.d, serde_json::to_string(&self.params).unwrap_or_default())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub informational: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    /// Probability mass of branches dropped below the pruning threshold.
    pub pruned_mass: f64,
    pub summary: Summary,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
        self.finalize();
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
        self.finalize();
    }

    pub fn merge(&mut self, other: Report) {
        self.pruned_mass += other.pruned_mass;
        self.extend(other.checks);
    }

    fn finalize(&mut self) {
        self.checks.sort_by_cached_key(Check::sort_key);
        let gating: Vec<&Check> = self.checks.iter().filter(|c| !c.informational).collect();
        self.summary = Summary {
            total: self.checks.len(),
            passed: gating.iter().filter(|c| c.pass).count(),
            failed: gating.iter().filter(|c| !c.pass).count(),
            informational: self.checks.len() - gating.len(),
        };
    }

    /// True when every non-informational check passed.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.informational || c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = to_pretty_json(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// One line per check.
    pub fn human_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                let status = match (c.informational, c.pass) {
                    (true, _) => "INFO",
                    (false, true) => "PASS",
                    (false, false) => "FAIL",
                };
                let d = c.d.map(|d| format!(" d={d}")).unwrap_or_default();
                let params: Vec<String> =
                    c.params.iter().map(|(k, v)| format!("{k}={}", v.to_string().trim_matches('"'))).collect();
                let params = if params.is_empty() { String::new() } else { format!(" [{}]", params.join(" ")) };
                format!("{status} {}{d}{params} measured={:.6e} tol={:.1e}", c.name, c.measured, c.tolerance)
            })
            .collect()
    }
}
