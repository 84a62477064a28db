//! JSON instance format. Matrices are arrays of rows.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{
    EqualityConstraints, FeasibleSet, InequalityConstraint, ObjectiveKind, ObjectiveModel,
    ProblemInstance,
};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{matrix_from_rows, matrix_to_rows};

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub q: usize,
    pub H: Vec<Vec<f64>>,
    pub t: Vec<f64>,
    pub gamma: f64,
    pub P: Vec<Vec<f64>>,
    pub s: Vec<f64>,
    pub Aineq: Vec<Vec<f64>>,
    pub bineq: Vec<f64>,
    pub Aeq: Vec<Vec<f64>>,
    pub beq: Vec<f64>,
    pub box_lower: Option<Vec<f64>>,
    pub box_upper: Option<Vec<f64>>,
    pub theta: Option<f64>,
    pub slater_point: Option<Vec<f64>>,
}

fn matrix(what: &'static str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    check_dim(what, nrows, rows.len())?;
    matrix_from_rows(rows, ncols)
        .ok_or_else(|| Error::InvalidInput(format!("{what}: every row must have {ncols} entries")))
}

fn vector(what: &'static str, xs: &[f64], len: usize) -> Result<DVector<f64>> {
    check_dim(what, len, xs.len())?;
    Ok(DVector::from_column_slice(xs))
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<ProblemInstance> {
        let n = self.n;
        let h = matrix("H", &self.H, n, n)?;
        let t = vector("t", &self.t, n)?;
        let objective = if self.q > 0 {
            let p = matrix("P", &self.P, self.q, n)?;
            let s = vector("s", &self.s, self.q)?;
            ObjectiveModel::quadratic_plus_l1(h, t, self.gamma, p, s)?
        } else {
            ObjectiveModel::quadratic(h, t)?
        };
        let objective = match self.theta {
            Some(theta) => objective.with_theta(theta)?,
            None => objective,
        };
        let a_ineq = matrix("Aineq", &self.Aineq, self.m, n)?;
        let b_ineq = vector("bineq", &self.bineq, self.m)?;
        let inequalities = (0..self.m)
            .map(|i| InequalityConstraint::affine(a_ineq.row(i).transpose(), b_ineq[i]))
            .collect();
        let equalities = EqualityConstraints::new(
            matrix("Aeq", &self.Aeq, self.p, n)?,
            vector("beq", &self.beq, self.p)?,
        )?;
        let set = match (&self.box_lower, &self.box_upper) {
            (Some(lo), Some(hi)) => {
                FeasibleSet::boxed(vector("box_lower", lo, n)?, vector("box_upper", hi, n)?)?
            }
            (None, None) => FeasibleSet::WholeSpace,
            _ => {
                return Err(Error::InvalidInput(
                    "box_lower and box_upper must both be present or both absent".into(),
                ))
            }
        };
        let slater = self
            .slater_point
            .as_ref()
            .map(|x| vector("slater_point", x, n))
            .transpose()?;
        ProblemInstance::new(objective, inequalities, equalities, set, slater)
    }

    /// Only quadratic(+ℓ1) objectives with affine constraints are representable.
    pub fn from_instance(inst: &ProblemInstance) -> Result<Self> {
        let stack = inst.linear_stack().ok_or_else(|| {
            Error::Unsupported("JSON format holds only affine inequality constraints".into())
        })?;
        let (quad, l1) = match inst.objective().kind() {
            ObjectiveKind::Quadratic(q) => (q, None),
            ObjectiveKind::QuadraticPlusL1(q, l1) => (q, Some(l1)),
            ObjectiveKind::Custom(_) => {
                return Err(Error::Unsupported("custom objectives have no JSON form".into()))
            }
        };
        let (m, p, n) = (inst.m(), inst.p(), inst.n());
        let (box_lower, box_upper) = match inst.set() {
            FeasibleSet::Box { lower, upper } => {
                (Some(lower.as_slice().to_vec()), Some(upper.as_slice().to_vec()))
            }
            FeasibleSet::WholeSpace => (None, None),
        };
        Ok(Self {
            n,
            m,
            p,
            q: l1.map_or(0, |l| l.p.nrows()),
            H: matrix_to_rows(&quad.h),
            t: quad.t.as_slice().to_vec(),
            gamma: l1.map_or(0.0, |l| l.gamma),
            P: l1.map_or_else(Vec::new, |l| matrix_to_rows(&l.p)),
            s: l1.map_or_else(Vec::new, |l| l.s.as_slice().to_vec()),
            Aineq: matrix_to_rows(&stack.a.rows(0, m).into_owned()),
            bineq: stack.b.rows(0, m).iter().cloned().collect(),
            Aeq: matrix_to_rows(inst.equalities().a()),
            beq: inst.equalities().b().as_slice().to_vec(),
            box_lower,
            box_upper,
            theta: Some(inst.theta()),
            slater_point: inst.slater_point().map(|x| x.as_slice().to_vec()),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}
