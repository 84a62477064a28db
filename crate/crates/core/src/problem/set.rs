use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};

/// The closed convex set `X` kept out of the Lagrangian.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    Box {
        lower: DVector<f64>,
        upper: DVector<f64>,
    },
    WholeSpace,
}

impl FeasibleSet {
    pub fn boxed(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        check_dim("box upper", lower.len(), upper.len())?;
        for (l, u) in lower.iter().zip(upper.iter()) {
            if !(l <= u) || !l.is_finite() || !u.is_finite() {
                return Err(Error::InvalidInput(format!("invalid box edge [{l}, {u}]")));
            }
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// Euclidean projection: per-coordinate clamp for a box, identity otherwise.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            FeasibleSet::WholeSpace => x.clone(),
            FeasibleSet::Box { lower, upper } => {
                DVector::from_fn(x.len(), |i, _| x[i].max(lower[i]).min(upper[i]))
            }
        }
    }

    pub fn diameter(&self) -> Option<f64> {
        match self {
            FeasibleSet::WholeSpace => None,
            FeasibleSet::Box { lower, upper } => Some((upper - lower).norm()),
        }
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        match self {
            FeasibleSet::WholeSpace => true,
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .enumerate()
                .all(|(i, &v)| v >= lower[i] - tol && v <= upper[i] + tol),
        }
    }

    /// Relative-interior membership; degenerate box edges only need equality.
    pub fn contains_relint(&self, x: &DVector<f64>) -> bool {
        match self {
            FeasibleSet::WholeSpace => true,
            FeasibleSet::Box { lower, upper } => x.iter().enumerate().all(|(i, &v)| {
                if lower[i] == upper[i] {
                    v == lower[i]
                } else {
                    v > lower[i] && v < upper[i]
                }
            }),
        }
    }

    pub fn dim_check(&self, n: usize) -> Result<()> {
        match self {
            FeasibleSet::WholeSpace => Ok(()),
            FeasibleSet::Box { lower, .. } => check_dim("box", n, lower.len()),
        }
    }
}
