use std::io::{Read, Write};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{DualPoint, ProblemInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    #[serde(rename = "pg")]
    ProjectedGradient,
    Tseng,
    Fista,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::ProjectedGradient => "pg",
            MethodKind::Tseng => "tseng",
            MethodKind::Fista => "fista",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "pg" => Ok(MethodKind::ProjectedGradient),
            "tseng" => Ok(MethodKind::Tseng),
            "fista" => Ok(MethodKind::Fista),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }

    /// Fast methods carry a `β` sequence and hence the weighted average `x̂`.
    pub fn has_beta(self) -> bool {
        !matches!(self, MethodKind::ProjectedGradient)
    }
}

impl std::fmt::Display for MethodKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub u: DualPoint,
    pub d: f64,
    pub dual_gradient: DVector<f64>,
    pub xbar: DVector<f64>,
    pub f_xbar: f64,
    pub delta_xbar: f64,
    pub f_xtilde: f64,
    pub delta_xtilde: f64,
    pub f_xhat: Option<f64>,
    pub delta_xhat: Option<f64>,
    pub beta: Option<f64>,
    pub dist_u_to_ref: Option<f64>,
    /// Nanoseconds since the start of the run.
    pub wall_ns: u64,
    pub inner_iterations: usize,
    pub inner_residual: f64,
}

/// Append-only record of a dual method run, one entry per `u_k`, `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub method: MethodKind,
    /// Step size of the `u` update (`1/L̃` for the fast methods).
    pub alpha: f64,
    pub records: Vec<TraceRecord>,
    /// Tseng's auxiliary starting point.
    pub w0: Option<DVector<f64>>,
}

impl RunTrace {
    pub fn new(method: MethodKind, alpha: f64) -> Self {
        Self {
            method,
            alpha,
            records: Vec::new(),
            w0: None,
        }
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn max_inner_residual(&self) -> f64 {
        self.records.iter().map(|r| r.inner_residual).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_COLUMNS)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            out.write_record([
                r.k.to_string(),
                r.d.to_string(),
                r.f_xbar.to_string(),
                r.delta_xbar.to_string(),
                r.f_xtilde.to_string(),
                r.delta_xtilde.to_string(),
                opt(r.f_xhat),
                opt(r.delta_xhat),
                opt(r.dist_u_to_ref),
                r.wall_ns.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub const CSV_COLUMNS: [&str; 10] = [
    "k",
    "d",
    "f_xbar",
    "delta_xbar",
    "f_xtilde",
    "delta_xtilde",
    "f_xhat",
    "delta_xhat",
    "dist_u_to_ref",
    "wall_ns",
];

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CsvRow {
    pub k: usize,
    pub d: f64,
    pub f_xbar: f64,
    pub delta_xbar: f64,
    pub f_xtilde: f64,
    pub delta_xtilde: f64,
    pub f_xhat: Option<f64>,
    pub delta_xhat: Option<f64>,
    pub dist_u_to_ref: Option<f64>,
    pub wall_ns: u64,
}

pub fn read_trace_csv<R: Read>(r: R) -> Result<Vec<CsvRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::InvalidInput(format!(
            "unexpected trace columns: {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(rd.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Weighted running mean, updated in place.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningAverage {
    sum: DVector<f64>,
    weight: f64,
}

impl RunningAverage {
    pub fn new(n: usize) -> Self {
        Self {
            sum: DVector::zeros(n),
            weight: 0.0,
        }
    }

    pub fn push(&mut self, x: &DVector<f64>, w: f64) {
        self.sum.axpy(w, x, 1.0);
        self.weight += w;
    }

    pub fn mean(&self) -> DVector<f64> {
        if self.weight > 0.0 {
            &self.sum / self.weight
        } else {
            self.sum.clone()
        }
    }
}

/// Running primal averages along a trace: `x̃_k`, the uniform mean of
/// `x̄(u_0..u_k)`, and `x̂_k`, weighted by `1/β_ℓ`.
pub(crate) struct Averager {
    tilde: RunningAverage,
    hat: Option<RunningAverage>,
}

impl Averager {
    pub(crate) fn new(n: usize, with_hat: bool) -> Self {
        Self {
            tilde: RunningAverage::new(n),
            hat: with_hat.then(|| RunningAverage::new(n)),
        }
    }

    /// Push `x̄_k` and write the averaged values into `rec`.
    pub(crate) fn update(&mut self, inst: &ProblemInstance, rec: &mut TraceRecord) -> Result<()> {
        self.tilde.push(&rec.xbar, 1.0);
        let xt = self.tilde.mean();
        rec.f_xtilde = inst.eval_objective(&xt)?;
        rec.delta_xtilde = inst.infeasibility(&xt)?;
        if let Some(hat) = &mut self.hat {
            let beta = rec
                .beta
                .ok_or_else(|| Error::Config("weighted average needs the beta sequence".into()))?;
            hat.push(&rec.xbar, 1.0 / beta);
            let xh = hat.mean();
            rec.f_xhat = Some(inst.eval_objective(&xh)?);
            rec.delta_xhat = Some(inst.infeasibility(&xh)?);
        }
        Ok(())
    }
}

/// Recompute the averaged columns of a trace from its `x̄` history.
pub fn primal_averages(inst: &ProblemInstance, trace: &mut RunTrace, want_hat: bool) -> Result<()> {
    if want_hat && trace.records.iter().any(|r| r.beta.is_none()) {
        return Err(Error::Config(format!(
            "method {} has no beta sequence for the weighted average",
            trace.method
        )));
    }
    let n = inst.n();
    let mut avg = Averager::new(n, want_hat);
    for rec in &mut trace.records {
        avg.update(inst, rec)?;
        if !want_hat {
            rec.f_xhat = None;
            rec.delta_xhat = None;
        }
    }
    Ok(())
}
