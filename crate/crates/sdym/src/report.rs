//! Machine-readable result reports with a stable JSON layout.
//!
//! Every command that evaluates something emits one of the shapes below.
//! The layouts are designed for byte-level reproducibility: all content
//! except the `meta` block is a pure function of the inputs (configuration
//! and seed), entries are sorted by name, and floating-point values
//! serialize through the shortest round-trip representation — so two runs
//! with identical inputs produce byte-identical files once `meta` (the only
//! wall-clock-dependent part) is stripped, which [`strip_meta`] and
//! [`reports_equal_ignoring_meta`] do.

use serde::{Deserialize, Serialize};
use std::time::{SystemTime, UNIX_EPOCH};
use thiserror::Error;

/// Errors from serializing or comparing reports.
#[derive(Debug, Error)]
pub enum ReportError {
    /// JSON encoding or decoding failed.
    #[error("report JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Wall-clock information, the only non-reproducible part of any report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportMeta {
    /// Unix timestamp (seconds) when the report was assembled.
    pub timestamp: u64,
    /// Wall time of the run in milliseconds.
    pub wall_ms: u64,
}

impl ReportMeta {
    /// Capture the current wall clock with a measured duration.
    pub fn now(wall_ms: u64) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self { timestamp, wall_ms }
    }
}

/// One verification check: what was measured against which bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckOutcome {
    /// Check name, unique within a report.
    pub name: String,
    /// Suite the check belongs to.
    pub suite: String,
    /// Worst measured residual (relative where a scale exists).
    pub residual: f64,
    /// Bound the residual was compared against (after any scaling).
    pub tolerance: f64,
    /// Whether `residual <= tolerance`.
    pub passed: bool,
    /// One-line description of what was verified.
    pub detail: String,
}

impl CheckOutcome {
    /// Assemble an outcome, deriving `passed` from the comparison.
    pub fn measured(
        name: impl Into<String>,
        suite: impl Into<String>,
        residual: f64,
        tolerance: f64,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            suite: suite.into(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
            detail: detail.into(),
        }
    }
}

/// Full output of a verification run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    /// Wall-clock block, excluded from reproducibility comparisons.
    pub meta: ReportMeta,
    /// Suite that was requested.
    pub suite: String,
    /// Seed that drove every random draw.
    pub seed: u64,
    /// Multiplier applied to each check's pinned tolerance.
    pub tolerance_scale: f64,
    /// Whether every check passed.
    pub passed: bool,
    /// Number of passing checks.
    pub checks_passed: usize,
    /// Number of failing checks.
    pub checks_failed: usize,
    /// All checks, sorted by name.
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    /// Assemble a report: sorts checks by name and fills the tallies.
    pub fn assemble(
        suite: impl Into<String>,
        seed: u64,
        tolerance_scale: f64,
        mut checks: Vec<CheckOutcome>,
        wall_ms: u64,
    ) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let checks_passed = checks.iter().filter(|c| c.passed).count();
        let checks_failed = checks.len() - checks_passed;
        Self {
            meta: ReportMeta::now(wall_ms),
            suite: suite.into(),
            seed,
            tolerance_scale,
            passed: checks_failed == 0,
            checks_passed,
            checks_failed,
            checks,
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String, ReportError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Norms of one residual component, as evaluated on supplied fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentNorms {
    /// Component name as the equation catalog labels it.
    pub name: String,
    /// Volume-weighted L² norm of the residual field.
    pub l2: f64,
    /// Pointwise maximum modulus.
    pub linf: f64,
    /// L² norm divided by the component's scale.
    pub relative: f64,
}

/// Output of a file-based residual evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Wall-clock block, excluded from reproducibility comparisons.
    pub meta: ReportMeta,
    /// Equation the fields were checked against.
    pub equation: String,
    /// Input files, in the order supplied.
    pub files: Vec<String>,
    /// Tolerance on the worst relative component norm.
    pub tolerance: f64,
    /// Whether the worst relative norm is within tolerance.
    pub passed: bool,
    /// Worst relative component norm.
    pub max_relative: f64,
    /// Per-component norms.
    pub components: Vec<ComponentNorms>,
}

/// One conserved-quantity drift over a simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftEntry {
    /// Quantity name.
    pub name: String,
    /// Initial value.
    pub initial: f64,
    /// Largest absolute excursion from the initial value.
    pub drift: f64,
}

/// A named scalar error measured against a scenario's exact solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioError {
    /// What was measured, e.g. "final_state_relative_linf".
    pub name: String,
    /// Measured value.
    pub value: f64,
}

/// Summary of one simulation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationSummary {
    /// Wall-clock block, excluded from reproducibility comparisons.
    pub meta: ReportMeta,
    /// Equation that was integrated.
    pub equation: String,
    /// Scenario that supplied the initial state.
    pub scenario: String,
    /// Grid points per axis.
    pub grid: Vec<usize>,
    /// Axis periods.
    pub lengths: Vec<f64>,
    /// Time step.
    pub dt: f64,
    /// Final time.
    pub t_end: f64,
    /// Steps taken.
    pub steps: usize,
    /// Frames written to disk.
    pub frames: usize,
    /// Conserved-quantity drifts over the run.
    pub conserved: Vec<DriftEntry>,
    /// Errors against the scenario's exact solution, where one exists.
    pub errors: Vec<ScenarioError>,
    /// Scalar diagnostics accumulated by the solver.
    pub diagnostics: Vec<ScenarioError>,
}

impl SimulationSummary {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String, ReportError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

impl ResidualReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String, ReportError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Re-serialize a report with its top-level `meta` block removed, in a
/// canonical (compact) encoding.  Two reports of the same run configuration
/// are reproducible exactly when their stripped forms are byte-identical.
pub fn strip_meta(report_json: &str) -> Result<String, ReportError> {
    let mut value: serde_json::Value = serde_json::from_str(report_json)?;
    if let Some(map) = value.as_object_mut() {
        map.remove("meta");
    }
    Ok(serde_json::to_string(&value)?)
}

/// Byte equality of two reports after stripping their `meta` blocks.
pub fn reports_equal_ignoring_meta(a: &str, b: &str) -> Result<bool, ReportError> {
    Ok(strip_meta(a)? == strip_meta(b)?)
}
