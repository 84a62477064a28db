use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::FeasibleSet;
use crate::error::{check_dim, Error, Result};
use crate::linalg;

/// `x ↦ ½ xᵀ H x + tᵀ x` with `H` symmetric positive definite.
#[derive(Debug, Clone)]
pub struct QuadraticTerm {
    pub h: DMatrix<f64>,
    pub t: DVector<f64>,
}

/// `x ↦ γ ‖P x − s‖₁`.
#[derive(Debug, Clone)]
pub struct L1Term {
    pub gamma: f64,
    pub p: DMatrix<f64>,
    pub s: DVector<f64>,
}

impl L1Term {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        if self.gamma == 0.0 || self.p.nrows() == 0 {
            return 0.0;
        }
        self.gamma * linalg::norm_1(&(&self.p * x - &self.s))
    }

    /// `γ Pᵀ sign(Px − s)` with `sign(0) = 0`.
    pub fn subgradient(&self, x: &DVector<f64>) -> DVector<f64> {
        if self.p.nrows() == 0 {
            return DVector::zeros(x.len());
        }
        let signs = (&self.p * x - &self.s).map(sign0);
        self.p.tr_mul(&signs) * self.gamma
    }

    pub fn is_active(&self) -> bool {
        self.gamma > 0.0 && self.p.nrows() > 0
    }
}

pub(crate) fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// A strongly convex objective split as smooth part plus a prox-friendly
/// nonsmooth part.
pub trait CompositeObjective: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn smooth_value(&self, x: &DVector<f64>) -> f64;
    fn smooth_gradient(&self, x: &DVector<f64>) -> DVector<f64>;

    fn nonsmooth_value(&self, _x: &DVector<f64>) -> f64 {
        0.0
    }

    /// Proximal map of `step · h + ι_X` at `v`.
    fn prox(&self, v: &DVector<f64>, _step: f64, set: &FeasibleSet) -> DVector<f64> {
        set.project(v)
    }

    fn subgradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.smooth_gradient(x)
    }
}

#[derive(Debug, Clone)]
pub enum ObjectiveKind {
    Quadratic(QuadraticTerm),
    QuadraticPlusL1(QuadraticTerm, L1Term),
    Custom(Arc<dyn CompositeObjective>),
}

#[derive(Debug, Clone)]
pub struct ObjectiveModel {
    kind: ObjectiveKind,
    theta: f64,
    subgradient_lipschitz: Option<f64>,
    hessian_extremes: Option<(f64, f64)>,
}

impl ObjectiveModel {
    pub fn quadratic(h: DMatrix<f64>, t: DVector<f64>) -> Result<Self> {
        let quad = validate_quadratic(h, t)?;
        Self::from_quadratic(ObjectiveKind::Quadratic(quad.0), quad.1)
    }

    pub fn quadratic_plus_l1(
        h: DMatrix<f64>,
        t: DVector<f64>,
        gamma: f64,
        p: DMatrix<f64>,
        s: DVector<f64>,
    ) -> Result<Self> {
        let (quad, ext) = validate_quadratic(h, t)?;
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidInput(format!("l1 weight must be >= 0, got {gamma}")));
        }
        check_dim("P columns", quad.t.len(), p.ncols())?;
        check_dim("s", p.nrows(), s.len())?;
        let l1 = L1Term { gamma, p, s };
        Self::from_quadratic(ObjectiveKind::QuadraticPlusL1(quad, l1), ext)
    }

    /// A user objective with a given strong-convexity modulus.
    pub fn custom(objective: Arc<dyn CompositeObjective>, theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidInput(format!("theta must be positive, got {theta}")));
        }
        Ok(Self {
            kind: ObjectiveKind::Custom(objective),
            theta,
            subgradient_lipschitz: None,
            hessian_extremes: None,
        })
    }

    fn from_quadratic(kind: ObjectiveKind, ext: (f64, f64)) -> Result<Self> {
        Ok(Self {
            kind,
            theta: ext.0,
            subgradient_lipschitz: None,
            hessian_extremes: Some(ext),
        })
    }

    /// Replace the default modulus (λmin(H) for quadratic models) with a
    /// smaller valid one.
    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidInput(format!("theta must be positive, got {theta}")));
        }
        if let Some((lmin, _)) = self.hessian_extremes {
            if theta > lmin * (1.0 + 1e-12) {
                return Err(Error::InvalidInput(format!(
                    "theta {theta} exceeds the smallest eigenvalue {lmin} of H"
                )));
            }
        }
        self.theta = theta;
        Ok(self)
    }

    pub fn with_subgradient_lipschitz(mut self, m: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidInput(format!("M must be positive, got {m}")));
        }
        self.subgradient_lipschitz = Some(m);
        Ok(self)
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn subgradient_lipschitz(&self) -> Option<f64> {
        self.subgradient_lipschitz
    }

    /// `(λmin(H), λmax(H))` for quadratic models.
    pub fn hessian_extremes(&self) -> Option<(f64, f64)> {
        self.hessian_extremes
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ObjectiveKind::Quadratic(q) | ObjectiveKind::QuadraticPlusL1(q, _) => q.t.len(),
            ObjectiveKind::Custom(c) => c.dim(),
        }
    }

    pub fn quadratic_term(&self) -> Option<&QuadraticTerm> {
        match &self.kind {
            ObjectiveKind::Quadratic(q) | ObjectiveKind::QuadraticPlusL1(q, _) => Some(q),
            ObjectiveKind::Custom(_) => None,
        }
    }

    pub fn l1_term(&self) -> Option<&L1Term> {
        match &self.kind {
            ObjectiveKind::QuadraticPlusL1(_, l1) => Some(l1),
            _ => None,
        }
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        match &self.kind {
            ObjectiveKind::Quadratic(q) => quad_value(q, x),
            ObjectiveKind::QuadraticPlusL1(q, l1) => quad_value(q, x) + l1.value(x),
            ObjectiveKind::Custom(c) => c.smooth_value(x) + c.nonsmooth_value(x),
        }
    }

    pub fn subgradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            ObjectiveKind::Quadratic(q) => &q.h * x + &q.t,
            ObjectiveKind::QuadraticPlusL1(q, l1) => &q.h * x + &q.t + l1.subgradient(x),
            ObjectiveKind::Custom(c) => c.subgradient(x),
        }
    }
}

fn quad_value(q: &QuadraticTerm, x: &DVector<f64>) -> f64 {
    0.5 * x.dot(&(&q.h * x)) + q.t.dot(x)
}

fn validate_quadratic(h: DMatrix<f64>, t: DVector<f64>) -> Result<(QuadraticTerm, (f64, f64))> {
    if !h.is_square() {
        return Err(Error::InvalidInput(format!(
            "H must be square, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    check_dim("t", h.nrows(), t.len())?;
    if !linalg::is_symmetric(&h) {
        return Err(Error::InvalidInput("H is not symmetric".into()));
    }
    let ext = linalg::symmetric_extremes(&h);
    if !(ext.0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "H is not positive definite (smallest eigenvalue {})",
            ext.0
        )));
    }
    Ok((QuadraticTerm { h, t }, ext))
}
