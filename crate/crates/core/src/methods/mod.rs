//! Dual iterations on `max_{u∈D} d(u)`: projected gradient, Tseng's 1-memory
//! fast gradient and the FISTA variant for linear constraints.

mod step;
mod trace;

pub use step::{
    strongly_concave_rate_params, surrogate_step_bound, RateParams, StepKind, StepSizeRule,
    DEFAULT_SAFETY,
};
pub use trace::{
    primal_averages, read_trace_csv, CsvRow, MethodKind, RunTrace, RunningAverage, TraceRecord,
    CSV_COLUMNS,
};

use std::time::Instant;

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::oracle::{solve_lagrangian, solve_lagrangian_unrestricted, OracleConfig, OracleResult};
use crate::problem::{DualPoint, ProblemInstance};
use trace::Averager;

#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    /// Iteration budget `K`; the trace holds `u_0..u_K`.
    pub iterations: usize,
    pub oracle: OracleConfig,
    /// Stop once `‖u_{k+1} − u_k‖/α ≤ tol`.
    pub early_stop: Option<f64>,
    /// Fills `dist_u_to_ref` when present.
    pub reference_u: Option<DVector<f64>>,
}

impl MethodConfig {
    pub fn new(iterations: usize) -> Self {
        Self {
            iterations,
            oracle: OracleConfig::default(),
            early_stop: None,
            reference_u: None,
        }
    }

    pub fn with_reference(mut self, u: DVector<f64>) -> Self {
        self.reference_u = Some(u);
        self
    }
}

struct Recorder<'a> {
    inst: &'a ProblemInstance,
    cfg: &'a MethodConfig,
    start: Instant,
    avg: Averager,
    trace: RunTrace,
}

impl<'a> Recorder<'a> {
    fn new(inst: &'a ProblemInstance, cfg: &'a MethodConfig, trace: RunTrace) -> Result<Self> {
        if let Some(r) = &cfg.reference_u {
            check_dim("reference multiplier", inst.dual_dim(), r.len())?;
        }
        Ok(Self {
            inst,
            cfg,
            start: Instant::now(),
            avg: Averager::new(inst.n(), trace.method.has_beta()),
            trace,
        })
    }

    fn push(&mut self, u: &DualPoint, res: OracleResult, beta: Option<f64>) -> Result<()> {
        let k = self.trace.records.len();
        let mut rec = TraceRecord {
            k,
            u: u.clone(),
            d: res.dual_value,
            f_xbar: self.inst.eval_objective(&res.xbar)?,
            delta_xbar: self.inst.infeasibility(&res.xbar)?,
            dual_gradient: res.dual_gradient,
            xbar: res.xbar,
            f_xtilde: f64::NAN,
            delta_xtilde: f64::NAN,
            f_xhat: None,
            delta_xhat: None,
            beta,
            dist_u_to_ref: self.cfg.reference_u.as_ref().map(|r| (u.values() - r).norm()),
            wall_ns: self.start.elapsed().as_nanos() as u64,
            inner_iterations: res.inner_iterations,
            inner_residual: res.inner_residual,
        };
        self.avg.update(self.inst, &mut rec)?;
        self.trace.records.push(rec);
        Ok(())
    }

    fn abort(self, err: Error) -> Error {
        Error::MethodAborted {
            partial: Box::new(self.trace),
            source: Box::new(err),
        }
    }
}

fn check_start(inst: &ProblemInstance, u: &DualPoint, what: &'static str) -> Result<()> {
    check_dim(what, inst.dual_dim(), u.len())?;
    check_dim(what, inst.m(), u.m())
}

fn stop_early(cfg: &MethodConfig, step: f64, u_next: &DualPoint, u: &DualPoint) -> bool {
    cfg.early_stop
        .is_some_and(|tol| (u_next.values() - u.values()).norm() / step <= tol)
}

/// `u_{k+1} = 𝒫_D[u_k + α∇d(u_k)]`.
pub fn projected_dual_gradient(
    inst: &ProblemInstance,
    u0: &DualPoint,
    rule: &StepSizeRule,
    cfg: &MethodConfig,
) -> Result<RunTrace> {
    check_start(inst, u0, "u0")?;
    let alpha = rule.alpha;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Config(format!("step size must be positive, got {alpha}")));
    }
    let mut rec = Recorder::new(inst, cfg, RunTrace::new(MethodKind::ProjectedGradient, alpha))?;
    let m = inst.m();
    let mut u = u0.clone();
    let mut warm: Option<DVector<f64>> = None;
    let mut last = false;
    for k in 0..=cfg.iterations {
        let res = match solve_lagrangian(inst, &u, &cfg.oracle.at_iteration(k), warm.as_ref()) {
            Ok(r) => r,
            Err(e) => return Err(rec.abort(e)),
        };
        let u_next = DualPoint::project(&(u.values() + &res.dual_gradient * alpha), m);
        warm = Some(res.xbar.clone());
        if let Err(e) = rec.push(&u, res, None) {
            return Err(rec.abort(e));
        }
        if last || k == cfg.iterations {
            break;
        }
        last = stop_early(cfg, alpha, &u_next, &u);
        u = u_next;
    }
    Ok(rec.trace)
}

/// Tseng's 1-memory method with `Q(u, v) = ½‖u − v‖²`, `U_k ⊇ D` and
/// `β_k = 2/(k+2)`:
///
/// ```text
/// v_k     = (1 − β_k) u_k + β_k w_k
/// w_{k+1} = 𝒫_D[w_k + ∇d(v_k)/(β_k L̃)]
/// u_{k+1} = 𝒫_D[v_k + ∇d(v_k)/L̃]
/// ```
///
/// `L̃` must be a global Lipschitz constant of `∇d` on `D`; the instance must
/// have affine inequalities or a compact `X`.
pub fn tseng_fast_gradient(
    inst: &ProblemInstance,
    u0: &DualPoint,
    w0: &DualPoint,
    l_tilde: f64,
    cfg: &MethodConfig,
) -> Result<RunTrace> {
    check_start(inst, u0, "u0")?;
    check_start(inst, w0, "w0")?;
    if !(l_tilde > 0.0) || !l_tilde.is_finite() {
        return Err(Error::Config(format!("L̃ must be positive and finite, got {l_tilde}")));
    }
    match inst.spectral_constants().sigma_max_stacked {
        Some(s) => {
            let exact = s * s / inst.theta();
            if l_tilde < exact * (1.0 - 1e-12) {
                return Err(Error::Config(format!(
                    "L̃ = {l_tilde:e} is below the dual Lipschitz constant {exact:e}"
                )));
            }
        }
        None if inst.set().diameter().is_none() => {
            return Err(Error::Unsupported(
                "fast gradient needs affine inequalities or a compact X".into(),
            ));
        }
        None => {}
    }

    let step = 1.0 / l_tilde;
    let mut trace = RunTrace::new(MethodKind::Tseng, step);
    trace.w0 = Some(w0.values().clone());
    let mut rec = Recorder::new(inst, cfg, trace)?;
    let m = inst.m();
    let (mut u, mut w) = (u0.clone(), w0.clone());
    let (mut warm_u, mut warm_v): (Option<DVector<f64>>, Option<DVector<f64>>) = (None, None);
    let mut last = false;
    for k in 0..=cfg.iterations {
        let ocfg = cfg.oracle.at_iteration(k);
        let beta = 2.0 / (k as f64 + 2.0);
        let res = match solve_lagrangian(inst, &u, &ocfg, warm_u.as_ref()) {
            Ok(r) => r,
            Err(e) => return Err(rec.abort(e)),
        };
        warm_u = Some(res.xbar.clone());
        if let Err(e) = rec.push(&u, res, Some(beta)) {
            return Err(rec.abort(e));
        }
        if last || k == cfg.iterations {
            break;
        }
        let v = DualPoint::project(&(u.values() * (1.0 - beta) + w.values() * beta), m);
        let rv = match solve_lagrangian(inst, &v, &ocfg, warm_v.as_ref().or(warm_u.as_ref())) {
            Ok(r) => r,
            Err(e) => return Err(rec.abort(e)),
        };
        w = DualPoint::project(&(w.values() + &rv.dual_gradient * (step / beta)), m);
        let u_next = DualPoint::project(&(v.values() + &rv.dual_gradient * step), m);
        warm_v = Some(rv.xbar);
        last = stop_early(cfg, step, &u_next, &u);
        u = u_next;
    }
    Ok(rec.trace)
}

/// `β_{k+1} = (√(β_k⁴ + 4β_k²) − β_k²)/2`.
pub fn fista_beta_next(beta: f64) -> f64 {
    let b2 = beta * beta;
    ((b2 * b2 + 4.0 * b2).sqrt() - b2) / 2.0
}

/// FISTA on the dual of an all-linear instance:
///
/// ```text
/// v_k     = u_k + β_k(1/β_{k−1} − 1)(u_k − u_{k−1})
/// u_{k+1} = 𝒫_D[v_k + ∇d(v_k) θ/σmax²(Ã)]
/// ```
///
/// with `β_0 = β_{−1} = 1`, `u_{−1} = u_0`.
pub fn fista_dual(inst: &ProblemInstance, u0: &DualPoint, cfg: &MethodConfig) -> Result<RunTrace> {
    check_start(inst, u0, "u0")?;
    let sigma = inst.spectral_constants().sigma_max_stacked.ok_or_else(|| {
        Error::Unsupported("FISTA on the dual needs affine inequality constraints".into())
    })?;
    let step = inst.theta() / (sigma * sigma);
    let mut rec = Recorder::new(inst, cfg, RunTrace::new(MethodKind::Fista, step))?;
    let m = inst.m();
    let (mut u, mut u_prev) = (u0.clone(), u0.clone());
    let (mut beta, mut beta_prev) = (1.0f64, 1.0f64);
    let (mut warm_u, mut warm_v): (Option<DVector<f64>>, Option<DVector<f64>>) = (None, None);
    let mut last = false;
    for k in 0..=cfg.iterations {
        let ocfg = cfg.oracle.at_iteration(k);
        let res = match solve_lagrangian(inst, &u, &ocfg, warm_u.as_ref()) {
            Ok(r) => r,
            Err(e) => return Err(rec.abort(e)),
        };
        warm_u = Some(res.xbar.clone());
        if let Err(e) = rec.push(&u, res, Some(beta)) {
            return Err(rec.abort(e));
        }
        if last || k == cfg.iterations {
            break;
        }
        let v = u.values() + (u.values() - u_prev.values()) * (beta * (1.0 / beta_prev - 1.0));
        let rv = match solve_lagrangian_unrestricted(inst, &v, &ocfg, warm_v.as_ref().or(warm_u.as_ref())) {
            Ok(r) => r,
            Err(e) => return Err(rec.abort(e)),
        };
        let u_next = DualPoint::project(&(v + &rv.dual_gradient * step), m);
        warm_v = Some(rv.xbar);
        last = stop_early(cfg, step, &u_next, &u);
        u_prev = std::mem::replace(&mut u, u_next);
        beta_prev = beta;
        beta = fista_beta_next(beta);
    }
    Ok(rec.trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::builtin;

    fn dp(xs: &[f64], m: usize) -> DualPoint {
        DualPoint::new(DVector::from_column_slice(xs), m).unwrap()
    }

    fn us(t: &RunTrace) -> Vec<f64> {
        t.records.iter().map(|r| r.u.values()[0]).collect()
    }

    #[test]
    fn projected_gradient_scalar_inequality() {
        let inst = builtin::t1();
        let rule = StepSizeRule::explicit(0.5).unwrap();
        let t = projected_dual_gradient(&inst, &dp(&[0.0], 1), &rule, &MethodConfig::new(3)).unwrap();
        assert_eq!(us(&t), vec![0.0, 0.5, 0.75, 0.875]);
    }

    #[test]
    fn projected_gradient_equality_not_clamped() {
        let inst = builtin::equality_t1();
        let rule = StepSizeRule::explicit(0.5).unwrap();
        let t = projected_dual_gradient(&inst, &dp(&[0.0], 0), &rule, &MethodConfig::new(2)).unwrap();
        assert_eq!(us(&t), vec![0.0, -0.5, -0.75]);
    }

    #[test]
    fn fixed_points() {
        let inst = builtin::t1();
        let star = dp(&[1.0], 1);
        let cfg = MethodConfig::new(5);
        let rule = StepSizeRule::explicit(0.5).unwrap();
        for t in [
            projected_dual_gradient(&inst, &star, &rule, &cfg).unwrap(),
            tseng_fast_gradient(&inst, &star, &star, 1.0, &cfg).unwrap(),
            fista_dual(&inst, &star, &cfg).unwrap(),
        ] {
            assert!(us(&t).iter().all(|&u| (u - 1.0).abs() < 1e-15), "{:?}", t.method);
        }
    }

    #[test]
    fn beta_sequences() {
        let b1 = fista_beta_next(1.0);
        assert!((b1 - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        let inst = builtin::t1();
        let t = tseng_fast_gradient(&inst, &dp(&[0.0], 1), &dp(&[0.0], 1), 1.0, &MethodConfig::new(2))
            .unwrap();
        let betas: Vec<f64> = t.records.iter().map(|r| r.beta.unwrap()).collect();
        assert_eq!(betas, vec![1.0, 2.0 / 3.0, 0.5]);
    }

    #[test]
    fn fista_equality_one_step() {
        let inst = builtin::equality_t1();
        let t = fista_dual(&inst, &dp(&[0.0], 0), &MethodConfig::new(3)).unwrap();
        assert_eq!(us(&t)[1], -1.0);
    }

    #[test]
    fn tseng_rejects_small_constant() {
        let inst = builtin::t1();
        let u = dp(&[0.0], 1);
        assert!(matches!(
            tseng_fast_gradient(&inst, &u, &u, 0.5, &MethodConfig::new(1)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn iterates_stay_in_d() {
        let inst = builtin::t1();
        let t = fista_dual(&inst, &dp(&[3.0], 1), &MethodConfig::new(50)).unwrap();
        assert!(t.records.iter().all(|r| r.u.values()[0] >= 0.0));
    }

    #[test]
    fn early_stop() {
        let inst = builtin::t1();
        let cfg = MethodConfig {
            early_stop: Some(1e-6),
            ..MethodConfig::new(1000)
        };
        let rule = StepSizeRule::explicit(0.5).unwrap();
        let t = projected_dual_gradient(&inst, &dp(&[0.0], 1), &rule, &cfg).unwrap();
        assert!(t.records.len() < 40);
        assert!((t.last().unwrap().u.values()[0] - 1.0).abs() < 1e-6);
    }
}
