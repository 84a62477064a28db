//! Accelerated proximal gradient on `𝓛(·, u)` for problems outside the
//! piecewise-quadratic class (nonlinear constraints or custom objectives).

use nalgebra::DVector;

use super::OracleConfig;
use crate::error::{Error, Result};
use crate::problem::{FeasibleSet, ObjectiveKind, ProblemInstance};

const RESTART_EVERY: usize = 100;
const RESIDUAL_EVERY: usize = 10;

pub(super) struct Solution {
    pub x: DVector<f64>,
    pub iterations: usize,
    pub residual: f64,
}

struct Lagrangian<'a> {
    inst: &'a ProblemInstance,
    u: &'a DVector<f64>,
}

impl Lagrangian<'_> {
    fn smooth_value(&self, x: &DVector<f64>) -> f64 {
        let f = match self.inst.objective().kind() {
            ObjectiveKind::Quadratic(q) | ObjectiveKind::QuadraticPlusL1(q, _) => {
                0.5 * x.dot(&(&q.h * x)) + q.t.dot(x)
            }
            ObjectiveKind::Custom(c) => c.smooth_value(x),
        };
        f + self.u.dot(&self.inst.constraint_vector(x))
    }

    fn smooth_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = match self.inst.objective().kind() {
            ObjectiveKind::Quadratic(q) | ObjectiveKind::QuadraticPlusL1(q, _) => &q.h * x + &q.t,
            ObjectiveKind::Custom(c) => c.smooth_gradient(x),
        };
        let m = self.inst.m();
        for (i, con) in self.inst.inequalities().iter().enumerate() {
            if self.u[i] != 0.0 {
                g += con.gradient(x) * self.u[i];
            }
        }
        if self.inst.p() > 0 {
            g += self.inst.equalities().a().tr_mul(&self.u.rows(m, self.inst.p()));
        }
        g
    }

    /// Prox of `step · (nonsmooth part) + ι_X`.
    fn prox(&self, v: &DVector<f64>, step: f64) -> DVector<f64> {
        let set = self.inst.set();
        match self.inst.objective().kind() {
            ObjectiveKind::Quadratic(_) => set.project(v),
            ObjectiveKind::QuadraticPlusL1(_, l1) => {
                let w = DVector::from_fn(v.len(), |j, _| {
                    let pj = l1.p[(j, j)];
                    if pj == 0.0 {
                        return v[j];
                    }
                    let kink = l1.s[j] / pj;
                    let thr = step * l1.gamma * pj.abs();
                    let d = v[j] - kink;
                    kink + d.signum() * (d.abs() - thr).max(0.0)
                });
                set.project(&w)
            }
            ObjectiveKind::Custom(c) => c.prox(v, step, set),
        }
    }

    fn residual(&self, x: &DVector<f64>) -> f64 {
        (x - self.prox(&(x - self.smooth_gradient(x)), 1.0)).norm()
    }
}

pub(super) fn solve(
    inst: &ProblemInstance,
    u: &DVector<f64>,
    cfg: &OracleConfig,
    warm: Option<&DVector<f64>>,
) -> Result<Solution> {
    if let Some(l1) = inst.objective().l1_term() {
        if l1.is_active() && !(l1.p.is_square() && crate::linalg::is_diagonal(&l1.p)) {
            return Err(Error::Unsupported(
                "an l1 term with non-diagonal P needs affine constraints".into(),
            ));
        }
    }
    let lag = Lagrangian { inst, u };
    let start = match warm {
        Some(w) => w.clone(),
        None => match inst.set() {
            FeasibleSet::Box { lower, upper } => (lower + upper) * 0.5,
            FeasibleSet::WholeSpace => DVector::zeros(inst.n()),
        },
    };
    let mut x = lag.prox(&start, 1.0);
    let mut lipschitz = inst
        .objective()
        .hessian_extremes()
        .map_or(1.0, |e| e.1)
        .max(1e-12);
    let mut best = (lag.residual(&x), x.clone());
    if best.0 <= cfg.tolerance {
        return Ok(Solution {
            x,
            iterations: 0,
            residual: best.0,
        });
    }

    let mut y = x.clone();
    let mut t = 1.0f64;
    for it in 1..=cfg.max_inner_iterations {
        if it % RESTART_EVERY == 0 {
            y = x.clone();
            t = 1.0;
        }
        let fy = lag.smooth_value(&y);
        let gy = lag.smooth_gradient(&y);
        let x_next = loop {
            let cand = lag.prox(&(&y - &gy / lipschitz), 1.0 / lipschitz);
            let diff = &cand - &y;
            let model = fy + gy.dot(&diff) + 0.5 * lipschitz * diff.norm_squared();
            if lag.smooth_value(&cand) <= model + 1e-14 * (1.0 + fy.abs()) || lipschitz > 1e300 {
                break cand;
            }
            lipschitz *= 2.0;
        };
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &x_next + (&x_next - &x) * ((t - 1.0) / t_next);
        t = t_next;
        x = x_next;

        if it % RESIDUAL_EVERY == 0 {
            let res = lag.residual(&x);
            if res < best.0 {
                best = (res, x.clone());
            }
            if res <= cfg.tolerance {
                return Ok(Solution {
                    x,
                    iterations: it,
                    residual: res,
                });
            }
        }
    }
    Err(Error::OracleFailure {
        iterations: cfg.max_inner_iterations,
        residual: best.0,
        best: best.1,
    })
}
