use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg;

/// A convex scalar function `g : ℝⁿ → ℝ` with a (sub)gradient oracle.
pub trait ConstraintFunction: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
}

#[derive(Debug, Clone)]
pub enum ConstraintKind {
    /// `g(x) = aᵀx + b`
    Affine { a: DVector<f64>, b: f64 },
    Nonlinear(Arc<dyn ConstraintFunction>),
}

/// One dualized inequality `g(x) ≤ 0`.
#[derive(Debug, Clone)]
pub struct InequalityConstraint {
    kind: ConstraintKind,
    lipschitz: f64,
    gradient_bound: Option<f64>,
}

impl InequalityConstraint {
    pub fn affine(a: DVector<f64>, b: f64) -> Self {
        let lipschitz = a.norm();
        Self {
            kind: ConstraintKind::Affine { a, b },
            lipschitz,
            gradient_bound: Some(lipschitz),
        }
    }

    /// A nonlinear constraint, Lipschitz on `X` with constant `lipschitz`.
    pub fn nonlinear(g: Arc<dyn ConstraintFunction>, lipschitz: f64) -> Result<Self> {
        if !(lipschitz > 0.0) || !lipschitz.is_finite() {
            return Err(Error::InvalidInput(format!(
                "Lipschitz constant must be positive, got {lipschitz}"
            )));
        }
        Ok(Self {
            kind: ConstraintKind::Nonlinear(g),
            lipschitz,
            gradient_bound: None,
        })
    }

    /// Upper bound on `sup_{x∈X} ‖∇g(x)‖`.
    pub fn with_gradient_bound(mut self, bound: f64) -> Self {
        self.gradient_bound = Some(bound);
        self
    }

    pub fn kind(&self) -> &ConstraintKind {
        &self.kind
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// `sup_{x∈X} ‖∇g(x)‖`, falling back to the Lipschitz constant.
    pub fn gradient_bound(&self) -> f64 {
        self.gradient_bound.unwrap_or(self.lipschitz)
    }

    pub fn linear_form(&self) -> Option<(&DVector<f64>, f64)> {
        match &self.kind {
            ConstraintKind::Affine { a, b } => Some((a, *b)),
            ConstraintKind::Nonlinear(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ConstraintKind::Affine { a, .. } => a.len(),
            ConstraintKind::Nonlinear(g) => g.dim(),
        }
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        match &self.kind {
            ConstraintKind::Affine { a, b } => a.dot(x) + b,
            ConstraintKind::Nonlinear(g) => g.value(x),
        }
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            ConstraintKind::Affine { a, .. } => a.clone(),
            ConstraintKind::Nonlinear(g) => g.gradient(x),
        }
    }
}

/// `A x + b = 0` with `A ∈ ℝ^{p×n}`.
#[derive(Debug, Clone)]
pub struct EqualityConstraints {
    a: DMatrix<f64>,
    b: DVector<f64>,
    sigma_max: f64,
}

impl EqualityConstraints {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        check_dim("b (equalities)", a.nrows(), b.len())?;
        if a.nrows() > 0 && a.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidInput("equality matrix A is zero".into()));
        }
        let sigma_max = linalg::sigma_max(&a);
        Ok(Self { a, b, sigma_max })
    }

    pub fn none(n: usize) -> Self {
        Self {
            a: DMatrix::zeros(0, n),
            b: DVector::zeros(0),
            sigma_max: 0.0,
        }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.a.nrows() == 0
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_lipschitz_is_row_norm() {
        let g = InequalityConstraint::affine(DVector::from_vec(vec![3.0, 4.0]), 1.0);
        assert_eq!(g.lipschitz(), 5.0);
        assert_eq!(g.value(&DVector::from_vec(vec![1.0, 1.0])), 8.0);
    }

    #[test]
    fn zero_equality_matrix_rejected() {
        let r = EqualityConstraints::new(DMatrix::zeros(1, 2), DVector::zeros(1));
        assert!(r.is_err());
    }
}
