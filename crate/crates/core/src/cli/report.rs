//! The JSON report written by every command.

use serde::Serialize;

use crate::analysis::TemperatenessReport;
use crate::morse2d::Morse2dReport;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Informational checks are reported but do not enter the verdict.
    pub informational: bool,
}

impl Check {
    pub fn new(name: &str, max_residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            informational: false,
        }
    }

    pub fn info(mut self) -> Self {
        self.informational = true;
        self
    }

    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub dimension: usize,
    pub seed: u64,
    pub grid_points: usize,
    pub h: Vec<f64>,
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    pub test_functions: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvertibilitySummary {
    pub h: f64,
    pub points: usize,
    /// Points where the split criterion applies and reports injectivity.
    pub injective_points: usize,
    pub min_sigma_restricted: f64,
    pub max_inverse_norm: Option<f64>,
    pub max_bound: Option<f64>,
    /// Largest sine of the principal angle between `ker A` at the first sample and
    /// at any other; 1 when the kernel dimension changes.
    pub kernel_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureSummary {
    /// Matrix `A + 2B` of `G` at the box center, row major, at the first h.
    pub g_at_center: Vec<f64>,
    pub center: Vec<f64>,
    pub terms: usize,
    pub m_infinity: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub name: String,
    pub verdict: Verdict,
    pub environment: Option<Environment>,
    pub checks: Vec<Check>,
    pub structure: Option<StructureSummary>,
    pub temperateness: Option<TemperatenessReport>,
    pub invertibility: Option<InvertibilitySummary>,
    pub morse2d: Option<Morse2dReport>,
    /// Reports of the factors, for `tensor`.
    pub factors: Vec<Report>,
    pub error: Option<String>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str, name: &str) -> Self {
        Report {
            schema: SCHEMA,
            command: command.into(),
            name: name.into(),
            verdict: Verdict::Fail,
            environment: None,
            checks: Vec::new(),
            structure: None,
            temperateness: None,
            invertibility: None,
            morse2d: None,
            factors: Vec::new(),
            error: None,
            notes: Vec::new(),
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Sets the verdict from the non-informational checks and any error.
    pub fn finish(&mut self) {
        let ok = self.error.is_none()
            && !self.checks.is_empty()
            && self.checks.iter().filter(|c| !c.informational).all(|c| c.pass)
            && self.factors.iter().all(|f| f.verdict == Verdict::Pass);
        self.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
