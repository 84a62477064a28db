//! Lagrangian minimization: `x̄(u) = argmin_{x∈X} 𝓛(x, u)`, the dual value
//! `d(u) = 𝓛(x̄(u), u)` and the dual gradient `∇d(u) = [g(x̄); Ax̄ + b]`.
//!
//! Dispatch by problem structure:
//!
//! * quadratic objective, `X = ℝⁿ`, affine constraints: `x̄ = −H⁻¹(t + Ãᵀu)`
//!   from the Cholesky factor cached in the instance;
//! * diagonal `H`, diagonal `P`: exact per-coordinate minimization;
//! * other quadratic(+ℓ1) problems with affine constraints: an active-set
//!   solve of the piecewise-quadratic KKT system, backed by a primal-dual
//!   splitting loop when the active set cannot be identified;
//! * everything else: accelerated proximal gradient with backtracking.

mod generic;
mod plq;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::problem::{DualPoint, FeasibleSet, ObjectiveKind, ProblemInstance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Inner optimality tolerance on the natural residual.
    pub tolerance: f64,
    pub max_inner_iterations: usize,
    pub warm_start: bool,
    /// When set, the tolerance at outer iteration `k ≥ 1` is
    /// `min(tolerance, decay / k²)`.
    pub decay: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_inner_iterations: 50_000,
            warm_start: true,
            decay: None,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!(
                "oracle tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_inner_iterations == 0 {
            return Err(Error::Config("max_inner_iterations must be positive".into()));
        }
        Ok(())
    }

    pub fn tolerance_at(&self, k: usize) -> f64 {
        match self.decay {
            Some(c) if k > 0 => self.tolerance.min(c / (k as f64).powi(2)),
            _ => self.tolerance,
        }
    }

    pub fn at_iteration(&self, k: usize) -> Self {
        Self {
            tolerance: self.tolerance_at(k),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OraclePath {
    ClosedForm,
    Separable,
    ActiveSet,
    PrimalDual,
    ProximalGradient,
}

impl OraclePath {
    pub fn is_exact(self) -> bool {
        matches!(self, OraclePath::ClosedForm | OraclePath::Separable | OraclePath::ActiveSet)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub xbar: DVector<f64>,
    pub dual_value: f64,
    pub dual_gradient: DVector<f64>,
    pub inner_iterations: usize,
    pub inner_residual: f64,
    pub path: OraclePath,
}

/// Evaluate `x̄(u)`, `d(u)` and `∇d(u)` at a point of `D`.
pub fn solve_lagrangian(
    inst: &ProblemInstance,
    u: &DualPoint,
    cfg: &OracleConfig,
    warm: Option<&DVector<f64>>,
) -> Result<OracleResult> {
    check_dim("dual point", inst.dual_dim(), u.len())?;
    check_dim("dual point split", inst.m(), u.m())?;
    solve_raw(inst, u.values(), cfg, warm)
}

/// Evaluate at `u ∈ D̃ = { u : u_i ≥ ũ_i, i ≤ m }` for a given `ũ` with
/// negative inequality entries; the caller vouches that `𝓛(·, ũ)` is
/// strongly convex over `X`.
pub fn solve_lagrangian_extended(
    inst: &ProblemInstance,
    u: &DVector<f64>,
    u_tilde: &DVector<f64>,
    cfg: &OracleConfig,
    warm: Option<&DVector<f64>>,
) -> Result<OracleResult> {
    check_dim("dual point", inst.dual_dim(), u.len())?;
    check_dim("u_tilde", inst.dual_dim(), u_tilde.len())?;
    for i in 0..inst.m() {
        if !(u_tilde[i] < 0.0) {
            return Err(Error::InvalidInput(format!("u_tilde[{i}] must be negative")));
        }
        if !(u[i] >= u_tilde[i]) {
            return Err(Error::InvalidInput(format!("u[{i}] lies outside the extended set")));
        }
    }
    solve_raw(inst, u, cfg, warm)
}

/// Evaluate at an arbitrary `u ∈ ℝ^{m+p}`. Only all-linear instances qualify:
/// there `𝓛(·, u)` stays strongly convex for every multiplier sign.
pub fn solve_lagrangian_unrestricted(
    inst: &ProblemInstance,
    u: &DVector<f64>,
    cfg: &OracleConfig,
    warm: Option<&DVector<f64>>,
) -> Result<OracleResult> {
    check_dim("dual point", inst.dual_dim(), u.len())?;
    if !inst.is_all_linear() {
        return Err(Error::Unsupported(
            "multipliers outside D need affine inequality constraints".into(),
        ));
    }
    solve_raw(inst, u, cfg, warm)
}

fn solve_raw(
    inst: &ProblemInstance,
    u: &DVector<f64>,
    cfg: &OracleConfig,
    warm: Option<&DVector<f64>>,
) -> Result<OracleResult> {
    cfg.validate()?;
    if let Some(w) = warm {
        check_dim("warm start", inst.n(), w.len())?;
    }
    let warm = if cfg.warm_start { warm } else { None };

    let (xbar, inner_iterations, inner_residual, path) = match minimize_structured(inst, u, cfg, warm)? {
        Some(sol) => sol,
        None => {
            let sol = generic::solve(inst, u, cfg, warm)?;
            (sol.x, sol.iterations, sol.residual, OraclePath::ProximalGradient)
        }
    };
    let dual_gradient = inst.constraint_vector(&xbar);
    let dual_value = inst.objective().value(&xbar) + u.dot(&dual_gradient);
    Ok(OracleResult {
        xbar,
        dual_value,
        dual_gradient,
        inner_iterations,
        inner_residual,
        path,
    })
}

type Solved = (DVector<f64>, usize, f64, OraclePath);

/// Exact and piecewise-quadratic paths; `None` defers to the generic solver.
fn minimize_structured(
    inst: &ProblemInstance,
    u: &DVector<f64>,
    cfg: &OracleConfig,
    warm: Option<&DVector<f64>>,
) -> Result<Option<Solved>> {
    let Some(stack) = inst.linear_stack() else {
        return Ok(None);
    };
    let (quad, l1) = match inst.objective().kind() {
        ObjectiveKind::Quadratic(q) => (q, None),
        ObjectiveKind::QuadraticPlusL1(q, l1) => (q, Some(l1).filter(|l| l.is_active())),
        ObjectiveKind::Custom(_) => return Ok(None),
    };
    let c = &quad.t + stack.a.tr_mul(u);

    if l1.is_none() && matches!(inst.set(), FeasibleSet::WholeSpace) {
        let factor = inst.h_factor().expect("quadratic objectives carry a factor");
        let x = -factor.solve(&c);
        return Ok(Some((x, 0, 0.0, OraclePath::ClosedForm)));
    }

    if linalg::is_diagonal(&quad.h) && l1.is_none_or(plq::is_diagonal_l1) {
        let x = plq::separable_minimizer(&quad.h, &c, l1, inst.set());
        return Ok(Some((x, 0, 0.0, OraclePath::Separable)));
    }

    let sol = plq::solve(
        &quad.h,
        inst.objective().hessian_extremes().map_or(1.0, |e| e.1),
        inst.h_factor().expect("quadratic objectives carry a factor"),
        &c,
        l1,
        inst.set(),
        cfg,
        warm,
    )?;
    Ok(Some(sol))
}

/// `|f(x̄) − d(u) + ∇d(u)ᵀu|`; zero for an exact oracle up to rounding.
pub fn dual_gap_identity_check(res: &OracleResult, inst: &ProblemInstance, u: &DualPoint) -> f64 {
    let f = inst.objective().value(&res.xbar);
    (f - res.dual_value + res.dual_gradient.dot(u.values())).abs()
}

/// Finite-difference approximation of `∇d(u)`: central differences, or a
/// second-order one-sided stencil for inequality multipliers within `h` of
/// the boundary of `D`.
pub fn finite_difference_dual_gradient(
    inst: &ProblemInstance,
    u: &DualPoint,
    h: f64,
    cfg: &OracleConfig,
) -> Result<DVector<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("step must be positive, got {h}")));
    }
    let base = solve_lagrangian(inst, u, cfg, None)?;
    let warm = Some(&base.xbar);
    let d_at = |shift: &DVector<f64>| -> Result<f64> {
        Ok(solve_raw(inst, &(u.values() + shift), cfg, warm)?.dual_value)
    };
    let dim = inst.dual_dim();
    let mut grad = DVector::zeros(dim);
    for i in 0..dim {
        let mut e = DVector::zeros(dim);
        e[i] = h;
        grad[i] = if i < inst.m() && u.values()[i] < h {
            let d1 = d_at(&e)?;
            let d2 = d_at(&(&e * 2.0))?;
            (-3.0 * base.dual_value + 4.0 * d1 - d2) / (2.0 * h)
        } else {
            (d_at(&e)? - d_at(&-&e)?) / (2.0 * h)
        };
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::builtin;
    use nalgebra::DMatrix;

    fn dp(xs: &[f64], m: usize) -> DualPoint {
        DualPoint::new(DVector::from_column_slice(xs), m).unwrap()
    }

    #[test]
    fn scalar_inequality_closed_form() {
        let inst = builtin::t1();
        let r = solve_lagrangian(&inst, &dp(&[0.5], 1), &OracleConfig::default(), None).unwrap();
        assert_eq!(r.path, OraclePath::ClosedForm);
        assert!((r.xbar[0] - 0.5).abs() < 1e-15);
        assert!((r.dual_value - 0.375).abs() < 1e-15);
        assert!((r.dual_gradient[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scalar_equality_at_optimum() {
        let inst = builtin::equality_t1();
        let r = solve_lagrangian(&inst, &dp(&[-1.0], 0), &OracleConfig::default(), None).unwrap();
        assert!((r.xbar[0] - 1.0).abs() < 1e-15);
        assert!((r.dual_value - 0.5).abs() < 1e-15);
        assert!(r.dual_gradient[0].abs() < 1e-15);
    }

    #[test]
    fn unconstrained_minimum_at_zero_multiplier() {
        let inst = builtin::t1();
        let r = solve_lagrangian(&inst, &dp(&[0.0], 1), &OracleConfig::default(), None).unwrap();
        assert_eq!(r.xbar[0], 0.0);
        // only the constant b' u term remains, which is zero at u = 0
        assert_eq!(r.dual_value, 0.0);
        assert_eq!(dual_gap_identity_check(&r, &inst, &dp(&[0.0], 1)), 0.0);
    }

    #[test]
    fn finite_differences_on_scalar_instances() {
        let cfg = OracleConfig::default();
        let g = finite_difference_dual_gradient(&builtin::t1(), &dp(&[0.5], 1), 1e-5, &cfg).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-8);
        let g = finite_difference_dual_gradient(&builtin::equality_t1(), &dp(&[0.0], 0), 1e-5, &cfg)
            .unwrap();
        assert!((g[0] + 1.0).abs() < 1e-8);
        // one-sided stencil at the boundary of D
        let g = finite_difference_dual_gradient(&builtin::t1(), &dp(&[0.0], 1), 1e-5, &cfg).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn tolerance_schedule() {
        let cfg = OracleConfig {
            tolerance: 1e-6,
            decay: Some(1e-4),
            ..OracleConfig::default()
        };
        assert_eq!(cfg.tolerance_at(0), 1e-6);
        assert_eq!(cfg.tolerance_at(5), 1e-6);
        assert!((cfg.tolerance_at(100) - 1e-8).abs() < 1e-22);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = OracleConfig {
            tolerance: 0.0,
            ..OracleConfig::default()
        };
        assert!(matches!(
            solve_lagrangian(&builtin::t1(), &dp(&[0.0], 1), &cfg, None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn extended_domain_accepts_negative_multipliers() {
        let inst = builtin::t1();
        let u = DVector::from_vec(vec![-0.5]);
        let ut = DVector::from_vec(vec![-1.0]);
        let r = solve_lagrangian_extended(&inst, &u, &ut, &OracleConfig::default(), None).unwrap();
        assert!((r.xbar[0] + 0.5).abs() < 1e-15);
        let too_far = DVector::from_vec(vec![-2.0]);
        assert!(solve_lagrangian_extended(&inst, &too_far, &ut, &OracleConfig::default(), None).is_err());
    }

    #[test]
    fn box_quadratic_uses_active_set() {
        use crate::problem::*;
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let f = ObjectiveModel::quadratic(h, DVector::from_vec(vec![-10.0, 2.0])).unwrap();
        let g = vec![InequalityConstraint::affine(DVector::from_vec(vec![1.0, 1.0]), -0.5)];
        let set = FeasibleSet::boxed(DVector::from_vec(vec![-1.0, -1.0]), DVector::from_vec(vec![1.0, 1.0])).unwrap();
        let inst = ProblemInstance::new(f, g, EqualityConstraints::none(2), set, None).unwrap();
        let r = solve_lagrangian(&inst, &dp(&[0.0], 1), &OracleConfig::default(), None).unwrap();
        assert_eq!(r.path, OraclePath::ActiveSet);
        // x1 hits its upper edge; given x1 = 1, x2 = -(1 + 2)/2 clamps to the lower edge
        assert!((r.xbar[0] - 1.0).abs() < 1e-14);
        assert!((r.xbar[1] + 1.0).abs() < 1e-14);
        assert!(r.inner_residual < 1e-12);
    }
}
