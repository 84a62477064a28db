use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{
    EqualityConstraints, FeasibleSet, InequalityConstraint, ObjectiveModel, ProblemInstance,
};

/// Random instances of
///
/// ```text
/// minimize ½xᵀHx + tᵀx + γ‖Px − s‖₁  s.t.  A₁x + b₁ ≤ 0, A₂x + b₂ = 0, |xᵢ| ≤ rᵢ
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub q: usize,
    pub gamma: f64,
    /// Box radii are drawn uniformly from this range.
    pub radius_range: (f64, f64),
    /// Spectrum of `H`; both endpoints are attained.
    pub eigen_range: (f64, f64),
    pub ensure_slater: bool,
    /// Diagonal `H`, and `P = I` (requires `q = n` or `q = 0`).
    pub diagonal: bool,
    /// `X = ℝⁿ` instead of the box.
    pub unbounded: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n: 10,
            m: 3,
            p: 2,
            q: 5,
            gamma: 1.0,
            radius_range: (1.0, 2.0),
            eigen_range: (1.0, 10.0),
            ensure_slater: true,
            diagonal: false,
            unbounded: false,
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn uniform_in(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

impl GeneratorConfig {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.m + self.p == 0 {
            return bad("at least one constraint (m + p >= 1) is required".into());
        }
        if self.p > self.n {
            return bad(format!("p = {} exceeds n = {}: equalities cannot be full row rank", self.p, self.n));
        }
        let (elo, ehi) = self.eigen_range;
        if !(elo > 0.0 && ehi >= elo && ehi.is_finite()) {
            return bad(format!("invalid eigenvalue range {:?}", self.eigen_range));
        }
        let (rlo, rhi) = self.radius_range;
        if !(rlo > 0.0 && rhi >= rlo && rhi.is_finite()) {
            return bad(format!("invalid radius range {:?}", self.radius_range));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return bad(format!("gamma must be nonnegative, got {}", self.gamma));
        }
        if self.diagonal && self.q != 0 && self.q != self.n {
            return bad("diagonal instances need q = n or q = 0".into());
        }
        Ok(())
    }
}

pub fn generate_instance(cfg: &GeneratorConfig) -> Result<ProblemInstance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n;

    let (elo, ehi) = cfg.eigen_range;
    let spectrum = DVector::from_fn(n, |i, _| match i {
        0 => elo,
        _ if i == n - 1 => ehi,
        _ => uniform_in(&mut rng, (elo, ehi)),
    });
    let h = if cfg.diagonal {
        DMatrix::from_diagonal(&spectrum)
    } else {
        let q = gaussian(&mut rng, n, n).qr().q();
        let h = &q * DMatrix::from_diagonal(&spectrum) * q.transpose();
        (&h + h.transpose()) * 0.5
    };
    let t = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));

    let (p_mat, s) = if cfg.diagonal && cfg.q == n {
        (DMatrix::identity(n, n), DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal)))
    } else {
        (
            gaussian(&mut rng, cfg.q, n),
            DVector::from_fn(cfg.q, |_, _| rng.sample::<f64, _>(StandardNormal)),
        )
    };
    let objective = if cfg.q > 0 {
        ObjectiveModel::quadratic_plus_l1(h, t, cfg.gamma, p_mat, s)?
    } else {
        ObjectiveModel::quadratic(h, t)?
    };

    let radii = DVector::from_fn(n, |_, _| uniform_in(&mut rng, cfg.radius_range));
    // interior point first; the constraint offsets are chosen around it
    let x_int = DVector::from_fn(n, |i, _| 0.5 * radii[i] * rng.gen_range(-1.0..1.0));

    let a1 = gaussian(&mut rng, cfg.m, n);
    let slack = DVector::from_fn(cfg.m, |_, _| rng.gen_range(0.1..1.0));
    let b1 = -(&a1 * &x_int) - slack;
    let inequalities = (0..cfg.m)
        .map(|i| InequalityConstraint::affine(a1.row(i).transpose(), b1[i]))
        .collect();

    let a2 = gaussian(&mut rng, cfg.p, n);
    if cfg.p > 0 {
        let smin = linalg::symmetric_extremes(&(&a2 * a2.transpose())).0;
        if !(smin > 1e-10) {
            return Err(Error::InvalidInput("sampled equality block is rank deficient".into()));
        }
    }
    let b2 = -(&a2 * &x_int);
    let equalities = EqualityConstraints::new(a2, b2)?;

    let set = if cfg.unbounded {
        FeasibleSet::WholeSpace
    } else {
        FeasibleSet::boxed(-radii.clone(), radii)?
    };
    ProblemInstance::new(
        objective,
        inequalities,
        equalities,
        set,
        cfg.ensure_slater.then_some(x_int),
    )
}
