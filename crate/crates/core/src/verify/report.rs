use std::collections::BTreeMap;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSummary {
    pub points: usize,
    pub t_min: f64,
    pub t_max: f64,
}

impl GridSummary {
    pub fn of(ts: &[f64]) -> Self {
        GridSummary {
            points: ts.len(),
            t_min: ts.first().copied().unwrap_or(f64::NAN),
            t_max: ts.last().copied().unwrap_or(f64::NAN),
        }
    }

    pub fn empty() -> Self {
        GridSummary {
            points: 0,
            t_min: f64::NAN,
            t_max: f64::NAN,
        }
    }
}

/// One named claim with its measured residual.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// The mathematical statement being checked.
    pub claim: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub grid: GridSummary,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Check {
    /// Passes when `residual <= tolerance`.
    pub fn at_most(
        name: impl Into<String>,
        claim: impl Into<String>,
        residual: f64,
        tolerance: f64,
        grid: GridSummary,
    ) -> Self {
        Check {
            name: name.into(),
            claim: claim.into(),
            passed: residual <= tolerance,
            residual,
            tolerance,
            grid,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Passes when `residual >= threshold` (negative controls, growth).
    pub fn at_least(
        name: impl Into<String>,
        claim: impl Into<String>,
        residual: f64,
        threshold: f64,
        grid: GridSummary,
    ) -> Self {
        let mut c = Self::at_most(name, claim, residual, threshold, grid);
        c.passed = residual >= threshold;
        c
    }

    /// A check that could not be evaluated.
    pub fn error(name: impl Into<String>, claim: impl Into<String>, err: impl ToString) -> Self {
        let mut c = Self::at_most(name, claim, f64::NAN, 0.0, GridSummary::empty());
        c.passed = false;
        c.notes.push(err.to_string());
        c
    }

    /// Recorded for information; always passes.
    pub fn info(name: impl Into<String>, claim: impl Into<String>, value: f64) -> Self {
        let mut c = Self::at_most(name, claim, value, f64::INFINITY, GridSummary::empty());
        c.passed = true;
        c
    }

    pub fn with_metric(mut self, key: impl Into<String>, value: f64) -> Self {
        self.metrics.insert(key.into(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub subject: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(subject: impl Into<String>, checks: Vec<Check>) -> Self {
        VerificationReport {
            schema_version: SCHEMA_VERSION,
            subject: subject.into(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}
