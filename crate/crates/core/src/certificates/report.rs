use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// `d* − d(u_k)`
    DualGap,
    /// `f(x̄(u_k)) − f*`
    ValueError,
    /// `Δ(x̄(u_k))`
    Infeasibility,
    /// `‖x̄(u_k) − x*‖`
    PrimalDistance,
    /// `‖u_k − u*‖`
    DualDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `measured ≤ bound`
    Upper,
    /// `measured ≥ bound`
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Surrogate,
}

/// One inequality evaluated along a trace. All arrays share the length of `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundFamily {
    pub name: String,
    pub measure: Measure,
    pub direction: Direction,
    pub constant_provenance: Provenance,
    pub k: Vec<usize>,
    pub measured: Vec<f64>,
    pub bound: Vec<f64>,
    /// Signed slack: positive when the inequality holds.
    pub margin: Vec<f64>,
    pub violated: Vec<bool>,
    pub tolerance: Vec<f64>,
}

pub fn signed_margin(direction: Direction, measured: f64, bound: f64) -> f64 {
    match direction {
        Direction::Upper => bound - measured,
        Direction::Lower => measured - bound,
    }
}

impl BoundFamily {
    pub fn new(name: &str, measure: Measure, direction: Direction, provenance: Provenance) -> Self {
        Self {
            name: name.to_string(),
            measure,
            direction,
            constant_provenance: provenance,
            k: Vec::new(),
            measured: Vec::new(),
            bound: Vec::new(),
            margin: Vec::new(),
            violated: Vec::new(),
            tolerance: Vec::new(),
        }
    }

    pub fn push(&mut self, k: usize, measured: f64, bound: f64, tolerance: f64) {
        let margin = signed_margin(self.direction, measured, bound);
        self.k.push(k);
        self.measured.push(measured);
        self.bound.push(bound);
        self.margin.push(margin);
        self.violated.push(!(margin >= -tolerance));
        self.tolerance.push(tolerance);
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn violations(&self) -> usize {
        self.violated.iter().filter(|&&v| v).count()
    }

    pub fn first_violation(&self) -> Option<usize> {
        self.violated.iter().position(|&v| v).map(|i| self.k[i])
    }

    /// Smallest margin along the trace.
    pub fn worst_margin(&self) -> Option<f64> {
        self.margin.iter().cloned().reduce(f64::min)
    }

    pub(crate) fn check_shape(&self) -> std::result::Result<(), String> {
        let n = self.k.len();
        let lens = [
            self.measured.len(),
            self.bound.len(),
            self.margin.len(),
            self.violated.len(),
            self.tolerance.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(format!("family {} has arrays of unequal length", self.name));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceBlock {
    pub f_star: f64,
    pub d_star: f64,
    pub u_star: Vec<f64>,
    pub x_star: Vec<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub method: String,
    pub reference: Option<ReferenceBlock>,
    pub constants: BTreeMap<String, f64>,
    pub base_tolerance: f64,
    pub families: Vec<BoundFamily>,
}

impl CertificateReport {
    pub fn total_violations(&self) -> usize {
        self.families.iter().map(BoundFamily::violations).sum()
    }

    pub fn family(&self, name: &str) -> Option<&BoundFamily> {
        self.families.iter().find(|f| f.name == name)
    }

    /// Append the families and constants of another report on the same trace.
    pub fn merge(&mut self, other: CertificateReport) -> Result<()> {
        if other.method != self.method {
            return Err(Error::Config(format!(
                "cannot merge a {} report into a {} report",
                other.method, self.method
            )));
        }
        self.constants.extend(other.constants);
        self.families.extend(other.families);
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let malformed = |reason: String| Error::MalformedReport {
            path: path.display().to_string(),
            reason,
        };
        let text = std::fs::read_to_string(path)?;
        let report: Self = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
        for f in &report.families {
            f.check_shape().map_err(malformed)?;
        }
        Ok(report)
    }
}
