//! Run report: invariant checks, truncation-tail disclosures and results.

use sdfkit::probspace::Deviation;
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Location {
    pub index: usize,
    pub node: usize,
}

/// One certified property. Lattice checks report absolute deviations; Monte
/// Carlo checks report deviations in standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub location: Option<Location>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `max_deviation <= tolerance`.
    pub fn at_most(name: impl Into<String>, max_deviation: f64, tolerance: f64, location: Option<Location>) -> Self {
        Self { name: name.into(), passed: max_deviation <= tolerance, max_deviation, tolerance, location, note: None }
    }

    pub fn deviation(name: impl Into<String>, d: &Deviation, tolerance: f64) -> Self {
        Self::at_most(name, d.max, tolerance, Some(Location { index: d.index, node: d.node }))
    }

    /// Passes when the smallest value is strictly positive.
    pub fn positive(name: impl Into<String>, min: f64) -> Self {
        Self { name: name.into(), passed: min > 0.0, max_deviation: -min, tolerance: 0.0, location: None, note: Some("max_deviation is minus the smallest value".into()) }
    }

    pub fn failed(name: impl Into<String>, tolerance: f64, note: String) -> Self {
        Self { name: name.into(), passed: false, max_deviation: f64::NAN, tolerance, location: None, note: Some(note) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Mass left beyond the horizon, against its declared bound.
#[derive(Debug, Clone, Serialize)]
pub struct TailDisclosure {
    pub name: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub exceeded: bool,
}

impl TailDisclosure {
    pub fn new(name: impl Into<String>, value: f64, bound: Option<f64>) -> Self {
        let exceeded = bound.is_some_and(|b| value > b);
        Self { name: name.into(), value, bound, exceeded }
    }
}

/// A reported number, with its standard error for Monte Carlo estimates.
#[derive(Debug, Clone, Serialize)]
pub struct Value {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

impl Value {
    pub fn exact(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, std_error: None }
    }

    pub fn estimate(name: impl Into<String>, e: &sdfkit::stats::Estimate) -> Self {
        Self { name: name.into(), value: e.mean, std_error: Some(e.std_error) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub model: String,
    pub seed: u64,
    pub paths: usize,
    pub horizon: usize,
    pub passed: bool,
    pub invariants: Vec<Check>,
    pub tails: Vec<TailDisclosure>,
    pub results: Vec<Value>,
}

impl Report {
    pub fn finalize(&mut self) {
        self.passed = self.invariants.iter().all(|c| c.passed) && self.tails.iter().all(|t| !t.exceeded);
    }
}
