//! Dual first-order methods for strongly convex problems with inequality,
//! equality and set constraints, together with a-posteriori certificates on
//! the primal optimality and infeasibility of the Lagrangian minimizers they
//! produce.

// negated float comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod methods;
pub mod oracle;
pub mod problem;

pub use error::{Error, Result};
pub use oracle::{solve_lagrangian, OracleConfig, OracleResult};
pub use problem::{DualPoint, FeasibleSet, ProblemInstance};
