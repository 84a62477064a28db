//! Primal error bounds in terms of dual errors, and the rate envelopes of the
//! dual methods, evaluated along a trace against a reference solution.

mod lemmas;
pub mod report;

pub use lemmas::{lemma_checks, LemmaConfig, LemmaReport};
pub use report::{BoundFamily, CertificateReport, Direction, Measure, Provenance, ReferenceBlock};

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::harness::ReferenceSolution;
use crate::linalg;
use crate::methods::{MethodKind, RunTrace, TraceRecord};
use crate::problem::{DualPoint, ProblemInstance};

pub const POINTWISE_TOLERANCE: f64 = 1e-7;
pub const ENVELOPE_TOLERANCE: f64 = 1e-9;
/// Environment variable overriding both base tolerances.
pub const TOLERANCE_ENV: &str = "DUALCERT_TOL";

fn env_tolerance() -> Option<f64> {
    std::env::var(TOLERANCE_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|v| *v >= 0.0 && v.is_finite())
}

/// `γ(u) = √(m+1)/θ · max{σmax(A), maxᵢ ‖∇g⁽ⁱ⁾(x̄(u))‖}` at `xbar = x̄(u)`.
pub fn gamma_at(inst: &ProblemInstance, xbar: &DVector<f64>) -> f64 {
    let g = inst
        .inequalities()
        .iter()
        .map(|c| c.gradient(xbar).norm())
        .fold(0.0, f64::max);
    ((inst.m() + 1) as f64).sqrt() / inst.theta() * inst.spectral_constants().sigma_max_eq.max(g)
}

/// Global Lipschitz constant of `∇d` on `D`: `σmax²(Ã)/θ` when every
/// constraint is affine, otherwise the surrogate `γ̂ (σmax²(A) + Σ L_i²)^½`
/// built from the gradient bounds of the constraints.
pub fn dual_lipschitz(inst: &ProblemInstance) -> (f64, Provenance) {
    let c = inst.spectral_constants();
    if let Some(s) = c.sigma_max_stacked {
        return (s * s / inst.theta(), Provenance::Exact);
    }
    let grad = inst
        .inequalities()
        .iter()
        .map(|g| g.gradient_bound())
        .fold(0.0, f64::max);
    let gamma_hat = ((inst.m() + 1) as f64).sqrt() / inst.theta() * c.sigma_max_eq.max(grad);
    let l = gamma_hat * (c.sigma_max_eq.powi(2) + inst.sum_lipschitz_sq()).sqrt();
    (l, Provenance::Surrogate)
}

/// Problem constants and reference values shared by every bound.
#[derive(Debug, Clone)]
pub struct CertificateContext<'a> {
    inst: &'a ProblemInstance,
    reference: &'a ReferenceSolution,
    pub theta: f64,
    pub sigma_max_eq: f64,
    pub sigma_max_stacked: Option<f64>,
    pub l_tilde: f64,
    pub l_provenance: Provenance,
    /// `γ(u*)`
    pub gamma_star: f64,
    /// `‖∇d(u*)‖`
    pub grad_star_norm: f64,
    /// Accuracy budget of the reference, `1e−10·(1 + |d*|)`.
    pub reference_tolerance: f64,
    pub pointwise_tolerance: f64,
    pub envelope_tolerance: f64,
}

impl<'a> CertificateContext<'a> {
    pub fn new(inst: &'a ProblemInstance, reference: &'a ReferenceSolution) -> Result<Self> {
        check_dim("reference x*", inst.n(), reference.x_star.len())?;
        check_dim("reference u*", inst.dual_dim(), reference.u_star.len())?;
        let (l_tilde, l_provenance) = dual_lipschitz(inst);
        let c = inst.spectral_constants();
        let env = env_tolerance();
        Ok(Self {
            inst,
            reference,
            theta: inst.theta(),
            sigma_max_eq: c.sigma_max_eq,
            sigma_max_stacked: c.sigma_max_stacked,
            l_tilde,
            l_provenance,
            gamma_star: gamma_at(inst, &reference.x_star),
            grad_star_norm: inst.constraint_vector(&reference.x_star).norm(),
            reference_tolerance: 1e-10 * (1.0 + reference.d_star.abs()),
            pointwise_tolerance: env.unwrap_or(POINTWISE_TOLERANCE),
            envelope_tolerance: env.unwrap_or(ENVELOPE_TOLERANCE),
        })
    }

    /// Replace the dual Lipschitz constant, e.g. by a user-supplied `L̃`.
    pub fn with_l_tilde(mut self, l: f64, provenance: Provenance) -> Self {
        self.l_tilde = l;
        self.l_provenance = provenance;
        self
    }

    pub fn instance(&self) -> &ProblemInstance {
        self.inst
    }

    pub fn reference(&self) -> &ReferenceSolution {
        self.reference
    }

    /// `d* − d(u)`, rejecting dual values above `d*` beyond `slack`.
    fn gap(&self, d_u: f64, slack: f64) -> Result<f64> {
        let gap = self.reference.d_star - d_u;
        if gap < -(self.reference_tolerance + slack) {
            return Err(Error::ReferenceInconsistent(format!(
                "d(u) = {d_u:.17e} exceeds d* = {:.17e}",
                self.reference.d_star
            )));
        }
        Ok(gap)
    }

    fn reference_block(&self) -> ReferenceBlock {
        let r = self.reference;
        ReferenceBlock {
            f_star: r.f_star,
            d_star: r.d_star,
            u_star: r.u_star.as_slice().to_vec(),
            x_star: r.x_star.as_slice().to_vec(),
            tolerance: self.reference_tolerance,
        }
    }

    fn empty_report(&self, trace: &RunTrace, base: f64) -> CertificateReport {
        let mut constants = BTreeMap::new();
        constants.insert("theta".into(), self.theta);
        constants.insert("sigma_max_eq".into(), self.sigma_max_eq);
        if let Some(s) = self.sigma_max_stacked {
            constants.insert("sigma_max_stacked".into(), s);
        }
        constants.insert("l_tilde".into(), self.l_tilde);
        constants.insert("gamma_star".into(), self.gamma_star);
        CertificateReport {
            method: trace.method.name().to_string(),
            reference: Some(self.reference_block()),
            constants,
            base_tolerance: base,
            families: Vec::new(),
        }
    }

    fn measured(&self, r: &TraceRecord, measure: Measure) -> f64 {
        let re = self.reference;
        match measure {
            Measure::DualGap => re.d_star - r.d,
            Measure::ValueError => r.f_xbar - re.f_star,
            Measure::Infeasibility => r.delta_xbar,
            Measure::PrimalDistance => (&r.xbar - &re.x_star).norm(),
            Measure::DualDistance => (r.u.values() - &re.u_star).norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBounds {
    /// `γ(u*)‖u − u*‖`
    pub via_dual_distance: f64,
    /// `√(2(d* − d(u))/θ)`
    pub via_gap: f64,
}

pub fn distance_bounds(ctx: &CertificateContext, u: &DualPoint, d_u: f64) -> Result<DistanceBounds> {
    check_dim("dual point", ctx.inst.dual_dim(), u.len())?;
    let gap = ctx.gap(d_u, 0.0)?.max(0.0);
    Ok(DistanceBounds {
        via_dual_distance: ctx.gamma_star * (u.values() - &ctx.reference.u_star).norm(),
        via_gap: (2.0 * gap / ctx.theta).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueBounds {
    /// Upper bound on `f(x̄(u)) − f*`.
    pub upper: f64,
    /// Lower bound on `f(x̄(u)) − f*` (nonpositive).
    pub lower: f64,
    /// Upper bound on `Δ(x̄(u))`.
    pub infeasibility: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueBoundSet {
    /// In terms of the dual Lipschitz constant `L̃`.
    pub lipschitz: ValueBounds,
    /// The sharper forms in `σmax(Ã)`, all-linear instances only.
    pub linear: Option<ValueBounds>,
}

pub fn value_and_infeasibility_bounds(
    ctx: &CertificateContext,
    u: &DualPoint,
    d_u: f64,
) -> Result<ValueBoundSet> {
    check_dim("dual point", ctx.inst.dual_dim(), u.len())?;
    let gap = ctx.gap(d_u, 0.0)?.max(0.0);
    Ok(value_bounds_from_gap(ctx, u.values(), gap))
}

fn value_bounds_from_gap(ctx: &CertificateContext, u: &DVector<f64>, gap: f64) -> ValueBoundSet {
    let l = ctx.l_tilde;
    let mp = ctx.inst.dual_dim() as f64;
    let u_star_norm = ctx.reference.u_star.norm();
    let sg = gap.sqrt();
    let lipschitz = ValueBounds {
        upper: (linalg::norm_inf(u) * (2.0 * l * mp).sqrt() + sg) * sg,
        lower: -u_star_norm * (2.0 * l * gap).sqrt(),
        infeasibility: (2.0 * l * gap).sqrt(),
    };
    let linear = ctx.sigma_max_stacked.map(|s| {
        let r = s * (2.0 * gap / ctx.theta).sqrt();
        ValueBounds {
            upper: u.norm() * r,
            lower: -u_star_norm * r,
            infeasibility: r,
        }
    });
    ValueBoundSet { lipschitz, linear }
}

/// Pointwise bounds at every `u_k`: distance via `γ(u*)` and via the dual gap,
/// value and infeasibility via `L̃`, and the linear-case forms when
/// applicable.
pub fn pointwise_report(ctx: &CertificateContext, trace: &RunTrace) -> Result<CertificateReport> {
    let mut report = ctx.empty_report(trace, ctx.pointwise_tolerance);
    let lp = ctx.l_provenance;
    let mut dist_dual = BoundFamily::new(
        "distance_via_dual_distance",
        Measure::PrimalDistance,
        Direction::Upper,
        Provenance::Exact,
    );
    let mut dist_gap = BoundFamily::new(
        "distance_via_dual_gap",
        Measure::PrimalDistance,
        Direction::Upper,
        Provenance::Exact,
    );
    let mut up = BoundFamily::new("value_upper", Measure::ValueError, Direction::Upper, lp);
    let mut lo = BoundFamily::new("value_lower", Measure::ValueError, Direction::Lower, lp);
    let mut inf = BoundFamily::new("infeasibility", Measure::Infeasibility, Direction::Upper, lp);
    let mut linear = ctx.sigma_max_stacked.map(|_| {
        let e = Provenance::Exact;
        (
            BoundFamily::new("value_upper_linear", Measure::ValueError, Direction::Upper, e),
            BoundFamily::new("value_lower_linear", Measure::ValueError, Direction::Lower, e),
            BoundFamily::new("infeasibility_linear", Measure::Infeasibility, Direction::Upper, e),
        )
    });

    for r in &trace.records {
        let tol = ctx.pointwise_tolerance + r.inner_residual;
        let gap = ctx.gap(r.d, tol)?.max(0.0) + gap_resolution(ctx.reference.d_star, r.d);
        let dist = ctx.measured(r, Measure::PrimalDistance);
        let verr = ctx.measured(r, Measure::ValueError);
        dist_dual.push(
            r.k,
            dist,
            ctx.gamma_star * ctx.measured(r, Measure::DualDistance),
            tol,
        );
        dist_gap.push(r.k, dist, (2.0 * gap / ctx.theta).sqrt(), tol);
        let b = value_bounds_from_gap(ctx, r.u.values(), gap);
        up.push(r.k, verr, b.lipschitz.upper, tol);
        lo.push(r.k, verr, b.lipschitz.lower, tol);
        inf.push(r.k, r.delta_xbar, b.lipschitz.infeasibility, tol);
        if let (Some((fu, fl, fi)), Some(bl)) = (linear.as_mut(), b.linear) {
            fu.push(r.k, verr, bl.upper, tol);
            fl.push(r.k, verr, bl.lower, tol);
            fi.push(r.k, r.delta_xbar, bl.infeasibility, tol);
        }
    }
    report.families.extend([dist_dual, dist_gap, up, lo, inf]);
    if let Some((a, b, c)) = linear {
        report.families.extend([a, b, c]);
    }
    Ok(report)
}

/// Rounding resolution of `d* − d(u)`: below it the computed gap may be zero
/// while the true one is not, so gap-driven bounds along a trace are
/// evaluated at `max(gap, 0)` plus this amount.
pub fn gap_resolution(d_star: f64, d_u: f64) -> f64 {
    f64::EPSILON * (d_star.abs() + d_u.abs())
}

fn envelope_tol(ctx: &CertificateContext, r: &TraceRecord) -> f64 {
    ctx.envelope_tolerance + ctx.reference_tolerance + r.inner_residual
}

/// Theorem-style envelopes of the projected dual gradient method with step
/// `α = trace.alpha`: with `E_k = R₀/(1 + kR₀δ/ρ)`, bounds on the dual gap,
/// the primal distance, value error and infeasibility, the linear-case value
/// bound, and monotonicity of `‖u_k − u*‖`.
pub fn pg_rate_envelopes(ctx: &CertificateContext, trace: &RunTrace) -> Result<CertificateReport> {
    if trace.method != MethodKind::ProjectedGradient {
        return Err(Error::Config(format!(
            "projected-gradient envelopes applied to a {} trace",
            trace.method
        )));
    }
    let first = trace.records.first().ok_or_else(|| Error::Config("empty trace".into()))?;
    let alpha = trace.alpha;
    let l = ctx.l_tilde;
    let delta = 1.0 / alpha - l / 2.0;
    if !(delta > 0.0) {
        return Err(Error::Config(format!(
            "step {alpha:e} is not admissible for L = {l:e} (δ = {delta:e})"
        )));
    }
    let r0 = ctx.gap(first.d, envelope_tol(ctx, first))?.max(0.0);
    let dist0 = ctx.measured(first, Measure::DualDistance);
    let rho = (ctx.grad_star_norm + l * dist0 + dist0 / alpha).powi(2);
    let u_star_norm = ctx.reference.u_star.norm();
    let mp = ctx.inst.dual_dim() as f64;

    let mut report = ctx.empty_report(trace, ctx.envelope_tolerance);
    for (k, v) in [("alpha", alpha), ("r0", r0), ("delta", delta), ("rho", rho)] {
        report.constants.insert(k.into(), v);
    }
    let lp = ctx.l_provenance;
    let mut gap_f = BoundFamily::new("pg_dual_gap", Measure::DualGap, Direction::Upper, lp);
    let mut dist_f = BoundFamily::new("pg_distance", Measure::PrimalDistance, Direction::Upper, lp);
    let mut up_f = BoundFamily::new("pg_value_upper", Measure::ValueError, Direction::Upper, lp);
    let mut lo_f = BoundFamily::new("pg_value_lower", Measure::ValueError, Direction::Lower, lp);
    let mut inf_f = BoundFamily::new("pg_infeasibility", Measure::Infeasibility, Direction::Upper, lp);
    let mut lin_f = ctx.sigma_max_stacked.map(|s| {
        (
            s,
            BoundFamily::new("pg_value_upper_linear", Measure::ValueError, Direction::Upper, lp),
        )
    });
    let mut mono = BoundFamily::new(
        "pg_dual_distance_monotone",
        Measure::DualDistance,
        Direction::Upper,
        Provenance::Exact,
    );

    let mut prev_dist: Option<f64> = None;
    for r in &trace.records {
        let tol = envelope_tol(ctx, r);
        ctx.gap(r.d, tol)?;
        let e = if r0 > 0.0 {
            r0 / (1.0 + r.k as f64 * r0 * delta / rho)
        } else {
            0.0
        };
        let verr = ctx.measured(r, Measure::ValueError);
        gap_f.push(r.k, ctx.measured(r, Measure::DualGap), e, tol);
        dist_f.push(r.k, ctx.measured(r, Measure::PrimalDistance), (2.0 * e / ctx.theta).sqrt(), tol);
        up_f.push(
            r.k,
            verr,
            (u_star_norm + dist0) * (2.0 * mp * l * e).sqrt() + e,
            tol,
        );
        lo_f.push(r.k, verr, -u_star_norm * (2.0 * l * e).sqrt(), tol);
        inf_f.push(r.k, r.delta_xbar, (2.0 * l * e).sqrt(), tol);
        if let Some((s, f)) = lin_f.as_mut() {
            f.push(r.k, verr, *s * (u_star_norm + dist0) * (2.0 * e / ctx.theta).sqrt(), tol);
        }
        let dist = ctx.measured(r, Measure::DualDistance);
        if let Some(p) = prev_dist {
            mono.push(r.k, dist, p, ctx.envelope_tolerance);
        }
        prev_dist = Some(dist);
    }
    report.families.extend([gap_f, dist_f, up_f, lo_f, inf_f]);
    if let Some((_, f)) = lin_f {
        report.families.push(f);
    }
    report.families.push(mono);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FastVariant {
    Tseng { l_tilde: f64, w0: DVector<f64> },
    Fista,
}

/// Extra data for the `‖u_k‖`-free value bound of inequality-only problems:
/// a non-optimal `ū ∈ D` and `d(ū)`; the Slater point comes from the instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaterData {
    pub u_bar: DVector<f64>,
    pub d_u_bar: f64,
}

/// `O(1/k²)` dual and `O(1/k)` primal envelopes of the fast methods, `k ≥ 1`.
pub fn fg_rate_envelopes(
    ctx: &CertificateContext,
    trace: &RunTrace,
    variant: &FastVariant,
    slater: Option<&SlaterData>,
) -> Result<CertificateReport> {
    let expected = match variant {
        FastVariant::Tseng { .. } => MethodKind::Tseng,
        FastVariant::Fista => MethodKind::Fista,
    };
    if trace.method != expected {
        return Err(Error::Config(format!(
            "{} envelopes applied to a {} trace",
            expected, trace.method
        )));
    }
    let first = trace.records.first().ok_or_else(|| Error::Config("empty trace".into()))?;
    let theta = ctx.theta;
    let u_star = &ctx.reference.u_star;
    let u_star_norm = u_star.norm();
    let mp = ctx.inst.dual_dim() as f64;
    let mut report = ctx.empty_report(trace, ctx.envelope_tolerance);

    // slater-based bound: coefficient c with bound c/(k+1) + tail(k), valid for k > threshold
    let slater_bound = match slater {
        Some(s) if ctx.inst.p() == 0 => {
            let x = ctx.inst.slater_point().ok_or_else(|| {
                Error::Config("the inequality-only value bound needs a Slater point".into())
            })?;
            check_dim("u_bar", ctx.inst.dual_dim(), s.u_bar.len())?;
            let gmax = ctx.inst.inequality_values(x).max();
            let fx = ctx.inst.eval_objective(x)?;
            let gap_bar = ctx.reference.d_star - s.d_u_bar;
            if !(gap_bar > ctx.reference_tolerance) {
                return Err(Error::Config("u_bar must be non-optimal".into()));
            }
            Some(((s.d_u_bar - fx) / gmax, gap_bar))
        }
        Some(_) => {
            return Err(Error::Config(
                "the inequality-only value bound needs p = 0".into(),
            ))
        }
        None => None,
    };

    let (prefix, lp) = match variant {
        FastVariant::Tseng { .. } => ("tseng", ctx.l_provenance),
        FastVariant::Fista => ("fista", Provenance::Exact),
    };
    let name = |s: &str| format!("{prefix}_{s}");
    let mut gap_f = BoundFamily::new(&name("dual_gap"), Measure::DualGap, Direction::Upper, lp);
    let mut dist_f = BoundFamily::new(&name("distance"), Measure::PrimalDistance, Direction::Upper, lp);
    let mut up_f = BoundFamily::new(&name("value_upper"), Measure::ValueError, Direction::Upper, lp);
    let mut lo_f = BoundFamily::new(&name("value_lower"), Measure::ValueError, Direction::Lower, lp);
    let mut inf_f = BoundFamily::new(&name("infeasibility"), Measure::Infeasibility, Direction::Upper, lp);
    let mut sl_f = slater_bound.map(|_| {
        BoundFamily::new(&name("value_upper_slater"), Measure::ValueError, Direction::Upper, lp)
    });

    // per-variant closed forms in j = k + 1
    type Env = Box<dyn Fn(f64, &DVector<f64>) -> [f64; 5]>;
    let (env, slater_term, threshold): (Env, Box<dyn Fn(f64) -> f64>, f64) = match variant {
        FastVariant::Tseng { l_tilde, w0 } => {
            check_dim("w0", ctx.inst.dual_dim(), w0.len())?;
            let l = *l_tilde;
            let q = 0.5 * (u_star - w0).norm_squared();
            report.constants.insert("l_tilde".into(), l);
            report.constants.insert("q".into(), q);
            let env: Env = Box::new(move |j, u| {
                let dual = 4.0 * l * q / (j * j);
                [
                    dual,
                    (8.0 * l * q / theta).sqrt() / j,
                    l * linalg::norm_inf(u) * (8.0 * mp * q).sqrt() / j + dual,
                    -l * u_star_norm * (8.0 * q).sqrt() / j,
                    l * (8.0 * q).sqrt() / j,
                ]
            });
            let (coef, gap_bar) = slater_bound.unwrap_or((0.0, 1.0));
            let term = Box::new(move |j: f64| {
                l * coef * (8.0 * mp * q).sqrt() / j + 4.0 * l * q / (j * j)
            });
            (env, term, (4.0 * l * q / gap_bar).sqrt())
        }
        FastVariant::Fista => {
            let s = ctx.sigma_max_stacked.ok_or_else(|| {
                Error::Unsupported("FISTA envelopes need affine constraints".into())
            })?;
            let r0 = (first.u.values() - u_star).norm();
            report.constants.insert("r0".into(), r0);
            let s2 = s * s;
            let env: Env = Box::new(move |j, u| {
                [
                    2.0 * s2 * r0 * r0 / (theta * j * j),
                    2.0 * s * r0 / (theta * j),
                    2.0 * u.norm() * s2 * r0 / (theta * j),
                    -2.0 * u_star_norm * s2 * r0 / (theta * j),
                    2.0 * s2 * r0 / (theta * j),
                ]
            });
            let (coef, gap_bar) = slater_bound.unwrap_or((0.0, 1.0));
            let term = Box::new(move |j: f64| 2.0 * s2 * coef * r0 / (theta * j));
            (env, term, s * r0 * (2.0 / (theta * gap_bar)).sqrt())
        }
    };
    if slater_bound.is_some() {
        report.constants.insert("slater_threshold".into(), threshold);
    }

    for r in trace.records.iter().filter(|r| r.k >= 1) {
        let tol = envelope_tol(ctx, r);
        ctx.gap(r.d, tol)?;
        let j = r.k as f64 + 1.0;
        let [dual, dist, up, lo, inf] = env(j, r.u.values());
        let verr = ctx.measured(r, Measure::ValueError);
        gap_f.push(r.k, ctx.measured(r, Measure::DualGap), dual, tol);
        dist_f.push(r.k, ctx.measured(r, Measure::PrimalDistance), dist, tol);
        up_f.push(r.k, verr, up, tol);
        lo_f.push(r.k, verr, lo, tol);
        inf_f.push(r.k, r.delta_xbar, inf, tol);
        if let Some(f) = sl_f.as_mut() {
            if r.k as f64 > threshold {
                f.push(r.k, verr, slater_term(j), tol);
            }
        }
    }
    report.families.extend([gap_f, dist_f, up_f, lo_f, inf_f]);
    if let Some(f) = sl_f {
        report.families.push(f);
    }
    Ok(report)
}

/// `‖u_k − u*‖ ≤ q^k ‖u₀ − u*‖` for the linearly convergent case. Entries
/// whose bound falls below `floor` are skipped.
pub fn linear_rate_envelope(
    ctx: &CertificateContext,
    trace: &RunTrace,
    q: f64,
    floor: f64,
) -> Result<CertificateReport> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Config(format!("contraction factor {q} outside [0, 1)")));
    }
    let first = trace.records.first().ok_or_else(|| Error::Config("empty trace".into()))?;
    let d0 = ctx.measured(first, Measure::DualDistance);
    let mut report = ctx.empty_report(trace, ctx.envelope_tolerance);
    report.constants.insert("q".into(), q);
    let mut fam = BoundFamily::new(
        "linear_rate_dual_distance",
        Measure::DualDistance,
        Direction::Upper,
        Provenance::Exact,
    );
    for r in &trace.records {
        let bound = q.powi(r.k as i32) * d0;
        if bound < floor {
            break;
        }
        fam.push(r.k, ctx.measured(r, Measure::DualDistance), bound, 1e-6 * bound);
    }
    report.families.push(fam);
    Ok(report)
}
