use std::collections::HashMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DVector;

use crate::certificates::{
    fg_rate_envelopes, pg_rate_envelopes, pointwise_report, report::signed_margin,
    CertificateContext, CertificateReport, FastVariant, Measure, Provenance, SlaterData,
};
use crate::error::{Error, Result};
use crate::methods::{
    fista_dual, projected_dual_gradient, read_trace_csv, tseng_fast_gradient, CsvRow, MethodConfig,
    MethodKind, RunTrace, StepSizeRule,
};
use crate::oracle::OracleConfig;
use crate::problem::{DualPoint, ProblemInstance};

use super::ReferenceSolution;

/// Inequality entries of `ũ` used by the compact-X rule. For affine
/// inequalities the rule does not depend on it.
pub const COMPACT_U_TILDE: f64 = -1e6;

/// Step-size rule of the projected gradient method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaRule {
    Linear,
    Compact,
    Lipschitz,
    Explicit(f64),
}

impl FromStr for AlphaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "linear" => Ok(AlphaRule::Linear),
            "compact" => Ok(AlphaRule::Compact),
            "lipschitz" => Ok(AlphaRule::Lipschitz),
            other => match other.strip_prefix("explicit:") {
                Some(v) => v
                    .trim()
                    .parse::<f64>()
                    .map(AlphaRule::Explicit)
                    .map_err(|_| Error::Config(format!("bad explicit step '{v}'"))),
                None => Err(Error::Config(format!(
                    "unknown alpha rule '{other}' (linear|compact|lipschitz|explicit:<val>)"
                ))),
            },
        }
    }
}

impl AlphaRule {
    /// Resolve to a concrete rule. `u0` and `reference` size the dual
    /// diameter of the Lipschitz-g rule as `2‖u₀ − u*‖`.
    pub fn resolve(
        self,
        inst: &ProblemInstance,
        u0: &DualPoint,
        reference: &ReferenceSolution,
    ) -> Result<StepSizeRule> {
        let u_tilde = DVector::from_element(inst.m(), COMPACT_U_TILDE);
        match self {
            AlphaRule::Linear => StepSizeRule::linear_case(inst),
            AlphaRule::Compact => StepSizeRule::compact_x(inst, &u_tilde),
            AlphaRule::Lipschitz => {
                let diam = 2.0 * (u0.values() - &reference.u_star).norm();
                StepSizeRule::lipschitz_g(inst, &u_tilde, diam)
            }
            AlphaRule::Explicit(a) => StepSizeRule::explicit(a),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub methods: Vec<MethodKind>,
    pub iterations: usize,
    pub alpha_rule: AlphaRule,
    pub oracle: OracleConfig,
}

impl ExperimentConfig {
    pub fn new(methods: Vec<MethodKind>, iterations: usize, alpha_rule: AlphaRule) -> Self {
        Self {
            methods,
            iterations,
            alpha_rule,
            oracle: OracleConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MethodOutput {
    pub trace: RunTrace,
    pub report: CertificateReport,
    pub trace_path: PathBuf,
    pub report_path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub methods: Vec<MethodOutput>,
    /// `None` when no method was requested.
    pub summary_path: Option<PathBuf>,
}

pub fn trace_file(dir: &Path, method: MethodKind) -> PathBuf {
    dir.join(format!("{}_trace.csv", method.name()))
}

pub fn report_file(dir: &Path, method: MethodKind) -> PathBuf {
    dir.join(format!("{}_cert.json", method.name()))
}

/// `1, 2, 5, 10, 20, 50, …` up to `k_max`, with `k_max` appended.
pub fn log_grid(k_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut decade = 1usize;
    'outer: loop {
        for m in [1, 2, 5] {
            let k = m * decade;
            if k > k_max {
                break 'outer;
            }
            out.push(k);
        }
        decade = match decade.checked_mul(10) {
            Some(d) => d,
            None => break,
        };
    }
    if k_max > 0 && out.last() != Some(&k_max) {
        out.push(k_max);
    }
    out
}

fn run_method(
    inst: &ProblemInstance,
    reference: &ReferenceSolution,
    kind: MethodKind,
    cfg: &ExperimentConfig,
) -> Result<(RunTrace, CertificateReport)> {
    let u0 = DualPoint::zeros(inst);
    let mcfg = MethodConfig {
        oracle: cfg.oracle,
        ..MethodConfig::new(cfg.iterations).with_reference(reference.u_star.clone())
    };
    let ctx = CertificateContext::new(inst, reference)?;
    let mut rule = None;
    let trace = match kind {
        MethodKind::ProjectedGradient => {
            let r = cfg.alpha_rule.resolve(inst, &u0, reference)?;
            rule = Some(r);
            projected_dual_gradient(inst, &u0, &r, &mcfg)?
        }
        MethodKind::Tseng => tseng_fast_gradient(inst, &u0, &u0, ctx.l_tilde, &mcfg)?,
        MethodKind::Fista => fista_dual(inst, &u0, &mcfg)?,
    };
    let mut report = pointwise_report(&ctx, &trace)?;
    let envelopes = match kind {
        MethodKind::ProjectedGradient => {
            // a surrogate rule guarantees α < 2/L̂ for its own L̂, which bounds ∇d's
            // Lipschitz constant on the region the iterates visit
            let pg_ctx = match rule.and_then(|r| r.l_hat) {
                Some(l) if ctx.l_provenance == Provenance::Surrogate => {
                    ctx.clone().with_l_tilde(l, Provenance::Surrogate)
                }
                _ => ctx.clone(),
            };
            pg_rate_envelopes(&pg_ctx, &trace)?
        }
        MethodKind::Tseng | MethodKind::Fista => {
            let variant = match kind {
                MethodKind::Tseng => FastVariant::Tseng {
                    l_tilde: ctx.l_tilde,
                    w0: u0.values().clone(),
                },
                _ => FastVariant::Fista,
            };
            // u = 0 serves as the non-optimal ū of the inequality-only bound
            let d0 = trace.records[0].d;
            let slater = (inst.p() == 0
                && inst.slater_point().is_some()
                && reference.d_star - d0 > ctx.reference_tolerance)
                .then(|| SlaterData {
                    u_bar: u0.values().clone(),
                    d_u_bar: d0,
                });
            fg_rate_envelopes(&ctx, &trace, &variant, slater.as_ref())?
        }
    };
    let l_pointwise = ctx.l_tilde;
    let l_envelope = envelopes.constants.get("l_tilde").copied();
    report.merge(envelopes)?;
    report.constants.insert("l_tilde".into(), l_pointwise);
    if let Some(l) = l_envelope.filter(|&l| l != l_pointwise) {
        report.constants.insert("l_tilde_envelope".into(), l);
    }
    Ok((trace, report))
}

fn write_summary(path: &Path, outputs: &[MethodOutput], reference: &ReferenceSolution, k_max: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "method",
        "k",
        "dual_gap",
        "value_error_xbar",
        "value_error_xtilde",
        "value_error_xhat",
        "infeasibility_xbar",
    ])?;
    let grid = log_grid(k_max);
    for out in outputs {
        for &k in &grid {
            let Some(r) = out.trace.records.get(k) else { break };
            w.write_record([
                out.trace.method.name().to_string(),
                k.to_string(),
                (reference.d_star - r.d).to_string(),
                (r.f_xbar - reference.f_star).abs().to_string(),
                (r.f_xtilde - reference.f_star).abs().to_string(),
                r.f_xhat.map(|f| (f - reference.f_star).abs().to_string()).unwrap_or_default(),
                r.delta_xbar.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Run every requested method from `u₀ = 0`, certify the traces against
/// `reference` and write `<method>_trace.csv`, `<method>_cert.json` and
/// `summary.csv` into `outdir`. Methods run concurrently.
pub fn run_experiment(
    inst: &ProblemInstance,
    reference: &ReferenceSolution,
    cfg: &ExperimentConfig,
    outdir: &Path,
) -> Result<ExperimentOutput> {
    if cfg.methods.is_empty() {
        return Ok(ExperimentOutput {
            methods: Vec::new(),
            summary_path: None,
        });
    }
    reference.check(inst)?;
    let mut seen = cfg.methods.clone();
    seen.sort_by_key(|m| m.name());
    seen.dedup();
    if seen.len() != cfg.methods.len() {
        return Err(Error::Config("duplicate method in experiment".into()));
    }
    std::fs::create_dir_all(outdir)?;

    let results: Vec<Result<(RunTrace, CertificateReport)>> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg
            .methods
            .iter()
            .map(|&kind| s.spawn(move || run_method(inst, reference, kind, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("method thread panicked"))
            .collect()
    });

    let mut outputs = Vec::new();
    for (kind, res) in cfg.methods.iter().zip(results) {
        let (trace, report) = res?;
        let trace_path = trace_file(outdir, *kind);
        trace.write_csv(BufWriter::new(File::create(&trace_path)?))?;
        let report_path = report_file(outdir, *kind);
        report.write(&report_path)?;
        outputs.push(MethodOutput {
            trace,
            report,
            trace_path,
            report_path,
        });
    }
    let summary = outdir.join("summary.csv");
    write_summary(&summary, &outputs, reference, cfg.iterations)?;
    Ok(ExperimentOutput {
        methods: outputs,
        summary_path: Some(summary),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyCheck {
    pub method: String,
    pub family: String,
    pub worst_margin: Option<f64>,
    pub violations: usize,
    pub first_violation: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyOutcome {
    pub families: Vec<FamilyCheck>,
}

impl VerifyOutcome {
    pub fn total_violations(&self) -> usize {
        self.families.iter().map(|f| f.violations).sum()
    }

    pub fn passed(&self) -> bool {
        self.total_violations() == 0
    }

    pub fn violated_families(&self) -> Vec<String> {
        self.families
            .iter()
            .filter(|f| f.violations > 0)
            .map(|f| format!("{}/{}", f.method, f.family))
            .collect()
    }
}

impl std::fmt::Display for VerifyOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.families {
            let worst = c.worst_margin.map_or("-".to_string(), |m| format!("{m:+.3e}"));
            write!(f, "{:<6} {:<32} worst margin {worst:>11}", c.method, c.family)?;
            match c.first_violation {
                Some(k) => writeln!(f, "  VIOLATED x{} (first at k = {k})", c.violations)?,
                None => writeln!(f, "  ok")?,
            }
        }
        Ok(())
    }
}

fn csv_measure(row: &CsvRow, measure: Measure, f_star: f64, d_star: f64) -> Option<f64> {
    match measure {
        Measure::DualGap => Some(d_star - row.d),
        Measure::ValueError => Some(row.f_xbar - f_star),
        Measure::Infeasibility => Some(row.delta_xbar),
        Measure::DualDistance => row.dist_u_to_ref,
        Measure::PrimalDistance => None,
    }
}

/// Re-check every certificate report in `dir` against its trace CSV. The
/// measured values are recomputed from the CSV where it carries them, so an
/// edited trace is caught even if the report itself was left untouched.
pub fn verify_report(dir: &Path) -> Result<VerifyOutcome> {
    let mut reports: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with("_cert.json"))
        })
        .collect();
    reports.sort();
    if reports.is_empty() {
        return Err(Error::MalformedReport {
            path: dir.display().to_string(),
            reason: "no *_cert.json reports found".into(),
        });
    }

    let mut outcome = VerifyOutcome::default();
    for path in reports {
        let report = CertificateReport::read(&path)?;
        let reference = report.reference.as_ref().ok_or(Error::ReferenceRequired)?;
        let stem = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_suffix("_cert.json"))
            .unwrap_or_default();
        let trace_path = dir.join(format!("{stem}_trace.csv"));
        let rows = read_trace_csv(File::open(&trace_path).map_err(|e| Error::MalformedReport {
            path: trace_path.display().to_string(),
            reason: e.to_string(),
        })?)
        .map_err(|e| Error::MalformedReport {
            path: trace_path.display().to_string(),
            reason: e.to_string(),
        })?;
        let by_k: HashMap<usize, &CsvRow> = rows.iter().map(|r| (r.k, r)).collect();

        for fam in &report.families {
            let monotone = fam.name.ends_with("_monotone");
            let mut check = FamilyCheck {
                method: report.method.clone(),
                family: fam.name.clone(),
                worst_margin: None,
                violations: 0,
                first_violation: None,
            };
            for i in 0..fam.len() {
                let k = fam.k[i];
                let row = by_k.get(&k);
                let measured = row
                    .and_then(|r| csv_measure(r, fam.measure, reference.f_star, reference.d_star))
                    .unwrap_or(fam.measured[i]);
                // the monotone family compares against the previous entry
                let bound = if monotone {
                    k.checked_sub(1)
                        .and_then(|p| by_k.get(&p))
                        .and_then(|r| csv_measure(r, fam.measure, reference.f_star, reference.d_star))
                        .unwrap_or(fam.bound[i])
                } else {
                    fam.bound[i]
                };
                let margin = signed_margin(fam.direction, measured, bound);
                let violated = fam.violated[i] || !(margin >= -fam.tolerance[i]);
                check.worst_margin = Some(check.worst_margin.map_or(margin, |w: f64| w.min(margin)));
                if violated {
                    check.violations += 1;
                    check.first_violation.get_or_insert(k);
                }
            }
            outcome.families.push(check);
        }
    }
    Ok(outcome)
}
