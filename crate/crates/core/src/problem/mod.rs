//! The constrained problem
//!
//! ```text
//! minimize    f(x)
//! subject to  g_i(x) <= 0,  i = 1..m
//!             A x + b = 0
//!             x in X
//! ```
//!
//! with `f` strongly convex over `X`, together with its dual feasible set
//! `D = { u in R^{m+p} : u_1..u_m >= 0 }` and the primitive evaluations the
//! rest of the crate needs.

mod constraints;
mod io;
mod objective;
mod set;

pub use constraints::{ConstraintFunction, ConstraintKind, EqualityConstraints, InequalityConstraint};
pub use io::InstanceFile;
pub use objective::{CompositeObjective, L1Term, ObjectiveKind, ObjectiveModel, QuadraticTerm};
pub(crate) use objective::sign0;
pub use set::FeasibleSet;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{check_dim, Error, Result};
use crate::linalg;

/// Residual components at or below this magnitude count as satisfied.
pub const FEASIBILITY_FLOOR: f64 = 1e-12;

/// Spectral quantities cached at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConstants {
    /// `σmax(A)` of the equality block; zero when `p = 0`.
    pub sigma_max_eq: f64,
    /// `σmax(Ã)` of the stacked `[A'; A]`, only when every constraint is affine.
    pub sigma_max_stacked: Option<f64>,
    pub sigma_min_stacked: Option<f64>,
    pub lambda_min_h: Option<f64>,
    pub lambda_max_h: Option<f64>,
}

/// `Ã = [A'; A]`, `b̃ = [b'; b]` for all-linear instances.
#[derive(Debug, Clone)]
pub struct LinearStack {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// A fully validated problem. Immutable after construction.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    objective: ObjectiveModel,
    inequalities: Vec<InequalityConstraint>,
    equalities: EqualityConstraints,
    set: FeasibleSet,
    slater_point: Option<DVector<f64>>,
    constants: SpectralConstants,
    stack: Option<LinearStack>,
    h_factor: Option<Cholesky<f64, Dyn>>,
}

impl ProblemInstance {
    pub fn new(
        objective: ObjectiveModel,
        inequalities: Vec<InequalityConstraint>,
        equalities: EqualityConstraints,
        set: FeasibleSet,
        slater_point: Option<DVector<f64>>,
    ) -> Result<Self> {
        let n = objective.dim();
        for g in &inequalities {
            check_dim("inequality constraint", n, g.dim())?;
        }
        check_dim("equality columns", n, equalities.a().ncols())?;
        set.dim_check(n)?;
        let m = inequalities.len();
        let p = equalities.len();
        if m + p == 0 {
            return Err(Error::InvalidInput(
                "at least one inequality or equality constraint is required".into(),
            ));
        }

        let stack = if inequalities.iter().all(|g| g.linear_form().is_some()) {
            let mut a = DMatrix::zeros(m + p, n);
            let mut b = DVector::zeros(m + p);
            for (i, g) in inequalities.iter().enumerate() {
                let (row, off) = g.linear_form().expect("checked affine");
                a.row_mut(i).copy_from(&row.transpose());
                b[i] = off;
            }
            a.rows_mut(m, p).copy_from(equalities.a());
            b.rows_mut(m, p).copy_from(equalities.b());
            Some(LinearStack { a, b })
        } else {
            None
        };
        if let Some(st) = &stack {
            if st.a.iter().all(|&v| v == 0.0) {
                return Err(Error::InvalidInput("stacked constraint matrix is zero".into()));
            }
        }

        let (lambda_min_h, lambda_max_h) = match objective.hessian_extremes() {
            Some((lo, hi)) => (Some(lo), Some(hi)),
            None => (None, None),
        };
        let constants = SpectralConstants {
            sigma_max_eq: equalities.sigma_max(),
            sigma_max_stacked: stack.as_ref().map(|s| linalg::sigma_max(&s.a)),
            sigma_min_stacked: stack.as_ref().map(|s| linalg::sigma_min(&s.a)),
            lambda_min_h,
            lambda_max_h,
        };
        let h_factor = objective
            .quadratic_term()
            .map(|q| Cholesky::new(q.h.clone()).ok_or_else(|| {
                Error::InvalidInput("H has no Cholesky factorization".into())
            }))
            .transpose()?;

        let inst = Self {
            objective,
            inequalities,
            equalities,
            set,
            slater_point,
            constants,
            stack,
            h_factor,
        };
        if let Some(x) = &inst.slater_point {
            inst.check_slater(x)?;
        }
        Ok(inst)
    }

    fn check_slater(&self, x: &DVector<f64>) -> Result<()> {
        check_dim("slater point", self.n(), x.len())?;
        if !self.set.contains_relint(x) {
            return Err(Error::InvalidInput("slater point is not in relint X".into()));
        }
        if let Some((i, g)) = self
            .inequalities
            .iter()
            .map(|g| g.value(x))
            .enumerate()
            .find(|(_, g)| !(*g < 0.0))
        {
            return Err(Error::InvalidInput(format!(
                "slater point does not strictly satisfy inequality {i} (g = {g:e})"
            )));
        }
        let r = self.equalities.residual(x);
        if r.amax() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "slater point violates equalities by {:e}",
                r.amax()
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.objective.dim()
    }

    pub fn m(&self) -> usize {
        self.inequalities.len()
    }

    pub fn p(&self) -> usize {
        self.equalities.len()
    }

    /// Rows of the ℓ1 term (zero when absent).
    pub fn q(&self) -> usize {
        self.objective.l1_term().map_or(0, |l| l.p.nrows())
    }

    pub fn dual_dim(&self) -> usize {
        self.m() + self.p()
    }

    pub fn objective(&self) -> &ObjectiveModel {
        &self.objective
    }

    pub fn theta(&self) -> f64 {
        self.objective.theta()
    }

    pub fn inequalities(&self) -> &[InequalityConstraint] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &EqualityConstraints {
        &self.equalities
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn slater_point(&self) -> Option<&DVector<f64>> {
        self.slater_point.as_ref()
    }

    /// Present iff every inequality is affine.
    pub fn linear_stack(&self) -> Option<&LinearStack> {
        self.stack.as_ref()
    }

    pub fn is_all_linear(&self) -> bool {
        self.stack.is_some()
    }

    pub fn spectral_constants(&self) -> SpectralConstants {
        self.constants
    }

    pub(crate) fn h_factor(&self) -> Option<&Cholesky<f64, Dyn>> {
        self.h_factor.as_ref()
    }

    /// `Σ L_i²` over the inequality constraints.
    pub fn sum_lipschitz_sq(&self) -> f64 {
        self.inequalities.iter().map(|g| g.lipschitz().powi(2)).sum()
    }

    pub fn eval_objective(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim("x", self.n(), x.len())?;
        Ok(self.objective.value(x))
    }

    pub fn inequality_values(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.inequalities.iter().map(|g| g.value(x)))
    }

    /// `[g(x); Ax + b]`, i.e. the dual gradient at any `u` with `x̄(u) = x`.
    pub fn constraint_vector(&self, x: &DVector<f64>) -> DVector<f64> {
        if let Some(st) = &self.stack {
            return &st.a * x + &st.b;
        }
        let mut out = DVector::zeros(self.dual_dim());
        out.rows_mut(0, self.m()).copy_from(&self.inequality_values(x));
        out.rows_mut(self.m(), self.p())
            .copy_from(&self.equalities.residual(x));
        out
    }

    /// `Δ(x) = (‖Ax+b‖² + Σ max{0, g_i(x)}²)^½`; components within
    /// [`FEASIBILITY_FLOOR`] count as satisfied.
    pub fn infeasibility(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim("x", self.n(), x.len())?;
        let c = self.constraint_vector(x);
        let m = self.m();
        let sq: f64 = c
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let r = if i < m { v.max(0.0) } else { v.abs() };
                if r <= FEASIBILITY_FLOOR {
                    0.0
                } else {
                    r * r
                }
            })
            .sum();
        Ok(sq.sqrt())
    }

    /// `𝓛(x, u) = f(x) + uᵀ[g(x); Ax + b]`.
    pub fn lagrangian(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        self.objective.value(x) + u.dot(&self.constraint_vector(x))
    }
}

/// A multiplier vector in `D`: the first `m` entries are nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint {
    values: DVector<f64>,
    m: usize,
}

impl DualPoint {
    /// Checked construction; rejects negative inequality multipliers.
    pub fn new(values: DVector<f64>, m: usize) -> Result<Self> {
        if m > values.len() {
            return Err(Error::DimensionMismatch {
                what: "dual point",
                expected: m,
                found: values.len(),
            });
        }
        if let Some(i) = (0..m).find(|&i| !(values[i] >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "inequality multiplier {i} is {} (must be >= 0)",
                values[i]
            )));
        }
        Ok(Self { values, m })
    }

    /// `𝒫_D[v]`: clamp the first `m` entries at zero, keep the rest.
    pub fn project(v: &DVector<f64>, m: usize) -> Self {
        let mut values = v.clone();
        for i in 0..m.min(values.len()) {
            if !(values[i] > 0.0) {
                values[i] = 0.0;
            }
        }
        Self { values, m }
    }

    pub fn zeros(inst: &ProblemInstance) -> Self {
        Self {
            values: DVector::zeros(inst.dual_dim()),
            m: inst.m(),
        }
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn into_values(self) -> DVector<f64> {
        self.values
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn quad(n: usize) -> ObjectiveModel {
        ObjectiveModel::quadratic(DMatrix::identity(n, n), DVector::zeros(n)).unwrap()
    }

    #[test]
    fn projection_onto_d() {
        assert_eq!(DualPoint::project(&v(&[-1.0, 2.0, 3.0]), 2).values(), &v(&[0.0, 2.0, 3.0]));
        assert_eq!(DualPoint::project(&v(&[-5.0]), 1).values(), &v(&[0.0]));
        let inside = v(&[1.0, 0.0, -4.0]);
        assert_eq!(DualPoint::project(&inside, 2).values(), &inside);
    }

    #[test]
    fn equality_multipliers_are_free() {
        assert!(DualPoint::new(v(&[0.0, -3.0]), 1).is_ok());
        assert!(DualPoint::new(v(&[-1e-30, 3.0]), 1).is_err());
    }

    #[test]
    fn infeasibility_matches_definition() {
        // two equalities with residual (0.3, -0.4), two inequalities with values (-1, 0.5)
        let ineq = vec![
            InequalityConstraint::affine(v(&[0.0, 0.0]), -1.0),
            InequalityConstraint::affine(v(&[0.0, 0.0]), 0.5),
        ];
        let eq = EqualityConstraints::new(DMatrix::identity(2, 2), v(&[0.3, -0.4])).unwrap();
        let inst =
            ProblemInstance::new(quad(2), ineq, eq, FeasibleSet::WholeSpace, None).unwrap();
        let d = inst.infeasibility(&v(&[0.0, 0.0])).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn infeasibility_equality_only() {
        let eq = EqualityConstraints::new(DMatrix::identity(2, 2), v(&[1.0, 0.0])).unwrap();
        let inst = ProblemInstance::new(quad(2), vec![], eq, FeasibleSet::WholeSpace, None).unwrap();
        assert_eq!(inst.infeasibility(&v(&[0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(inst.infeasibility(&v(&[-1.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn feasible_point_has_zero_infeasibility() {
        let ineq = vec![InequalityConstraint::affine(v(&[1.0]), -1.0)];
        let inst = ProblemInstance::new(
            quad(1),
            ineq,
            EqualityConstraints::none(1),
            FeasibleSet::WholeSpace,
            None,
        )
        .unwrap();
        assert_eq!(inst.infeasibility(&v(&[0.5])).unwrap(), 0.0);
        assert_eq!(inst.infeasibility(&v(&[1.0 + 1e-13])).unwrap(), 0.0);
        assert!(inst.infeasibility(&v(&[1.0 + 1e-9])).unwrap() > 0.0);
    }

    #[test]
    fn needs_a_constraint() {
        let r = ProblemInstance::new(
            quad(1),
            vec![],
            EqualityConstraints::none(1),
            FeasibleSet::WholeSpace,
            None,
        );
        assert!(r.is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ineq = vec![InequalityConstraint::affine(v(&[1.0]), -1.0)];
        let inst = ProblemInstance::new(
            quad(1),
            ineq,
            EqualityConstraints::none(1),
            FeasibleSet::WholeSpace,
            None,
        )
        .unwrap();
        assert!(matches!(
            inst.eval_objective(&v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn spectral_constants_without_equalities() {
        let ineq = vec![InequalityConstraint::affine(v(&[3.0, 4.0]), -1.0)];
        let inst = ProblemInstance::new(
            quad(2),
            ineq,
            EqualityConstraints::none(2),
            FeasibleSet::WholeSpace,
            None,
        )
        .unwrap();
        let c = inst.spectral_constants();
        assert_eq!(c.sigma_max_eq, 0.0);
        assert!((c.sigma_max_stacked.unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(c.lambda_min_h, Some(1.0));
    }

    #[test]
    fn slater_point_checked() {
        let ineq = vec![InequalityConstraint::affine(v(&[-1.0]), 1.0)];
        let bad = ProblemInstance::new(
            quad(1),
            ineq.clone(),
            EqualityConstraints::none(1),
            FeasibleSet::WholeSpace,
            Some(v(&[1.0])),
        );
        assert!(bad.is_err());
        let good = ProblemInstance::new(
            quad(1),
            ineq,
            EqualityConstraints::none(1),
            FeasibleSet::WholeSpace,
            Some(v(&[2.0])),
        );
        assert!(good.is_ok());
    }
}
