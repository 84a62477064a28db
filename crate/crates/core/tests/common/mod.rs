#![allow(dead_code)]

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dualcert::harness::{generate_instance, GeneratorConfig};
use dualcert::problem::{
    ConstraintFunction, EqualityConstraints, FeasibleSet, InequalityConstraint, ObjectiveModel,
};
use dualcert::{DualPoint, ProblemInstance};

/// Print one line per acceptance criterion straight to stderr so it survives
/// the test harness's output capture.
pub fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {criterion:>2}: {verdict}  {detail}");
}

/// The (n, m, p, q) = (10, 3, 2, 5) random instance.
pub fn paper_dims(seed: u64) -> ProblemInstance {
    generate_instance(&GeneratorConfig {
        seed,
        ..GeneratorConfig::default()
    })
    .unwrap()
}

/// Diagonal `H` and `P = I`: the Lagrangian separates per coordinate.
pub fn separable(seed: u64) -> ProblemInstance {
    generate_instance(&GeneratorConfig {
        seed,
        q: 10,
        diagonal: true,
        ..GeneratorConfig::default()
    })
    .unwrap()
}

/// Pure quadratic, `X = ℝⁿ`, full-row-rank stacked constraints.
pub fn unbounded_quadratic(seed: u64) -> ProblemInstance {
    generate_instance(&GeneratorConfig {
        seed,
        q: 0,
        unbounded: true,
        ..GeneratorConfig::default()
    })
    .unwrap()
}

/// `‖x − c‖² − r² ≤ 0`
#[derive(Debug)]
pub struct Ball {
    pub center: DVector<f64>,
    pub radius: f64,
}

impl ConstraintFunction for Ball {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (x - &self.center).norm_squared() - self.radius * self.radius
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (x - &self.center) * 2.0
    }
}

/// Quadratic objective on a box with one ball constraint, one affine
/// inequality and one equality. Slater point at the origin.
pub fn ball_instance(seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 4;
    let mut g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    g = &g * g.transpose() + DMatrix::identity(n, n);
    let t = DVector::from_fn(n, |_, _| rng.gen_range(-3.0..3.0));
    let f = ObjectiveModel::quadratic(g, t).unwrap();
    let center = DVector::from_fn(n, |_, _| rng.gen_range(-0.2..0.2));
    let ball = Ball { center: center.clone(), radius: 0.8 };
    // |x_i| ≤ 1 keeps ‖x − c‖ ≤ ‖1‖ + ‖c‖
    let grad_bound = 2.0 * ((n as f64).sqrt() + center.norm());
    let nonlinear = InequalityConstraint::nonlinear(Arc::new(ball), 2.0)
        .unwrap()
        .with_gradient_bound(grad_bound);
    let affine = InequalityConstraint::affine(DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)), -0.3);
    let eq = EqualityConstraints::new(
        DMatrix::from_fn(1, n, |_, _| rng.gen_range(-1.0..1.0)),
        DVector::zeros(1),
    )
    .unwrap();
    let set = FeasibleSet::boxed(DVector::from_element(n, -1.0), DVector::from_element(n, 1.0)).unwrap();
    ProblemInstance::new(f, vec![nonlinear, affine], eq, set, Some(DVector::zeros(n))).unwrap()
}

/// Random point of `D`: inequality entries in `[0, scale)`, equality entries
/// in `(−scale, scale)`.
pub fn random_dual(inst: &ProblemInstance, rng: &mut ChaCha8Rng, scale: f64) -> DualPoint {
    let m = inst.m();
    let v = DVector::from_fn(inst.dual_dim(), |i, _| {
        if i < m {
            rng.gen_range(0.0..scale)
        } else {
            rng.gen_range(-scale..scale)
        }
    });
    DualPoint::new(v, m).unwrap()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
