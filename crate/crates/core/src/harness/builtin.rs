//! Scalar instances with closed-form solutions.

use nalgebra::{DMatrix, DVector};

use crate::problem::{
    EqualityConstraints, FeasibleSet, InequalityConstraint, ObjectiveModel, ProblemInstance,
};

fn half_square() -> ObjectiveModel {
    ObjectiveModel::quadratic(DMatrix::identity(1, 1), DVector::zeros(1)).expect("valid model")
}

/// `min ½x²  s.t.  1 − x ≤ 0`: `x̄(u) = u`, `d(u) = u − u²/2`, `u* = x* = 1`,
/// `f* = d* = ½`.
pub fn t1() -> ProblemInstance {
    let g = InequalityConstraint::affine(DVector::from_vec(vec![-1.0]), 1.0);
    ProblemInstance::new(
        half_square(),
        vec![g],
        EqualityConstraints::none(1),
        FeasibleSet::WholeSpace,
        Some(DVector::from_vec(vec![2.0])),
    )
    .expect("valid instance")
}

/// `min ½x²  s.t.  x − 1 = 0`: `x̄(u) = −u`, `d(u) = −½u² − u`, `u* = −1`,
/// `x* = 1`, `f* = ½`.
pub fn equality_t1() -> ProblemInstance {
    let eq = EqualityConstraints::new(DMatrix::identity(1, 1), DVector::from_vec(vec![-1.0]))
        .expect("nonzero A");
    ProblemInstance::new(
        half_square(),
        Vec::new(),
        eq,
        FeasibleSet::WholeSpace,
        Some(DVector::from_vec(vec![1.0])),
    )
    .expect("valid instance")
}
