//! Piecewise-quadratic inner problems
//!
//! ```text
//! minimize  ½ xᵀHx + cᵀx + γ‖Px − s‖₁   over  x ∈ X (box or ℝⁿ)
//! ```
//!
//! solved by a primal-dual active-set iteration on the KKT system. Each
//! round fixes a sign for every row of `Px − s` and a state for every box
//! coordinate, solves the resulting equality-constrained QP, and updates the
//! guess from the multipliers. When that fails to settle, a primal-dual
//! splitting loop (or FISTA when there is no ℓ1 term) runs for a while and
//! the active set is re-identified from its iterate.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{OracleConfig, OraclePath, Solved};
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{FeasibleSet, L1Term};

const MAX_ACTIVE_SET_ROUNDS: usize = 40;
const FIRST_BLOCK: usize = 50;

pub(super) fn is_diagonal_l1(l1: &L1Term) -> bool {
    l1.p.is_square() && linalg::is_diagonal(&l1.p)
}

fn soft_threshold(v: f64, w: f64) -> f64 {
    if v > w {
        v - w
    } else if v < -w {
        v + w
    } else {
        0.0
    }
}

/// Exact minimizer when `H` and `P` are diagonal: each coordinate is a
/// strictly convex scalar problem, so clamping its unconstrained minimizer
/// to the box edges is optimal.
pub(super) fn separable_minimizer(
    h: &DMatrix<f64>,
    c: &DVector<f64>,
    l1: Option<&L1Term>,
    set: &FeasibleSet,
) -> DVector<f64> {
    DVector::from_fn(c.len(), |j, _| {
        let hj = h[(j, j)];
        let mut x = -c[j] / hj;
        if let Some(l) = l1 {
            let pj = l.p[(j, j)];
            if pj != 0.0 {
                let kink = l.s[j] / pj;
                x = kink + soft_threshold(x - kink, l.gamma * pj.abs() / hj);
            }
        }
        match set {
            FeasibleSet::Box { lower, upper } => x.max(lower[j]).min(upper[j]),
            FeasibleSet::WholeSpace => x,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Row {
    Pos,
    Neg,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Coord {
    Free,
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Guess {
    rows: Vec<Row>,
    coords: Vec<Coord>,
}

struct KktPoint {
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
}

struct Problem<'a> {
    h: &'a DMatrix<f64>,
    c: &'a DVector<f64>,
    gamma: f64,
    p: DMatrix<f64>,
    s: DVector<f64>,
    bounds: Option<(&'a DVector<f64>, &'a DVector<f64>)>,
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.c.len()
    }

    fn q(&self) -> usize {
        self.p.nrows()
    }

    fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        match self.bounds {
            Some((lo, hi)) => DVector::from_fn(x.len(), |j, _| x[j].max(lo[j]).min(hi[j])),
            None => x.clone(),
        }
    }

    fn clip(&self, y: &DVector<f64>) -> DVector<f64> {
        y.map(|v| v.max(-self.gamma).min(self.gamma))
    }

    /// Gradient of the smooth part plus `Pᵀy`.
    fn stationarity(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut g = self.h * x + self.c;
        if self.q() > 0 {
            g += self.p.tr_mul(y);
        }
        g
    }

    /// Unit-step natural residual of the saddle-point system in `(x, y)`.
    fn residual(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let rx = x - self.project(&(x - self.stationarity(x, y)));
        let mut sq = rx.norm_squared();
        if self.q() > 0 {
            let ry = y - self.clip(&(y + &self.p * x - &self.s));
            sq += ry.norm_squared();
        }
        sq.sqrt()
    }

    fn scale(&self, x: &DVector<f64>) -> f64 {
        1.0 + x.amax() + self.c.amax()
    }

    fn identify(&self, x: &DVector<f64>, tol: f64) -> Guess {
        let r = &self.p * x - &self.s;
        let rows = r
            .iter()
            .map(|&v| {
                if v.abs() <= tol {
                    Row::Zero
                } else if v > 0.0 {
                    Row::Pos
                } else {
                    Row::Neg
                }
            })
            .collect();
        let coords = (0..self.n())
            .map(|j| match self.bounds {
                Some((lo, _)) if x[j] <= lo[j] + tol => Coord::Lower,
                Some((_, hi)) if x[j] >= hi[j] - tol => Coord::Upper,
                _ => Coord::Free,
            })
            .collect();
        Guess { rows, coords }
    }

    /// Solve the equality-constrained QP defined by a guess.
    fn solve_guess(&self, g: &Guess) -> Option<KktPoint> {
        let n = self.n();
        let free: Vec<usize> = (0..n).filter(|&j| g.coords[j] == Coord::Free).collect();
        let zero: Vec<usize> = (0..self.q()).filter(|&i| g.rows[i] == Row::Zero).collect();
        let (nf, nz) = (free.len(), zero.len());
        if nz > nf {
            return None;
        }

        let mut x = DVector::zeros(n);
        if let Some((lo, hi)) = self.bounds {
            for j in 0..n {
                match g.coords[j] {
                    Coord::Lower => x[j] = lo[j],
                    Coord::Upper => x[j] = hi[j],
                    Coord::Free => {}
                }
            }
        }
        let mut y = DVector::zeros(self.q());
        for (i, row) in g.rows.iter().enumerate() {
            y[i] = match row {
                Row::Pos => self.gamma,
                Row::Neg => -self.gamma,
                Row::Zero => 0.0,
            };
        }
        // linear term with the fixed signs folded in
        let mut lin = self.c.clone();
        if self.q() > 0 {
            lin += self.p.tr_mul(&y);
        }
        let fixed_part = self.h * &x;

        if nf > 0 {
            let dim = nf + nz;
            let mut kkt = DMatrix::zeros(dim, dim);
            let mut rhs = DVector::zeros(dim);
            for (a, &ja) in free.iter().enumerate() {
                for (b, &jb) in free.iter().enumerate() {
                    kkt[(a, b)] = self.h[(ja, jb)];
                }
                rhs[a] = -(lin[ja] + fixed_part[ja]);
            }
            for (r, &i) in zero.iter().enumerate() {
                let mut off = self.s[i];
                for j in 0..n {
                    off -= self.p[(i, j)] * x[j];
                }
                rhs[nf + r] = off;
                for (a, &ja) in free.iter().enumerate() {
                    kkt[(nf + r, a)] = self.p[(i, ja)];
                    kkt[(a, nf + r)] = self.p[(i, ja)];
                }
            }
            let sol = kkt.clone().lu().solve(&rhs)?;
            let check = (&kkt * &sol - &rhs).amax();
            if !sol.iter().all(|v| v.is_finite()) || check > 1e-9 * (1.0 + rhs.amax()) {
                return None;
            }
            for (a, &ja) in free.iter().enumerate() {
                x[ja] = sol[a];
            }
            for (r, &i) in zero.iter().enumerate() {
                y[i] = sol[nf + r];
            }
        } else if nz > 0 {
            return None;
        }

        let mut z = -self.stationarity(&x, &y);
        for &j in &free {
            z[j] = 0.0;
        }
        Some(KktPoint { x, y, z })
    }

    /// One primal-dual active-set update with hysteresis `tol`.
    fn update(&self, g: &Guess, pt: &KktPoint, tol: f64) -> Guess {
        let r = &self.p * &pt.x - &self.s;
        let gamma = self.gamma;
        let classify = |lambda: f64| {
            if lambda > gamma {
                Row::Pos
            } else if lambda < -gamma {
                Row::Neg
            } else {
                Row::Zero
            }
        };
        let rows = g
            .rows
            .iter()
            .enumerate()
            .map(|(i, state)| match state {
                Row::Pos if r[i] >= -tol => Row::Pos,
                Row::Neg if r[i] <= tol => Row::Neg,
                Row::Zero if pt.y[i].abs() <= gamma + tol => Row::Zero,
                _ => classify(pt.y[i] + r[i]),
            })
            .collect();
        let coords = g
            .coords
            .iter()
            .enumerate()
            .map(|(j, state)| {
                let Some((lo, hi)) = self.bounds else {
                    return Coord::Free;
                };
                match state {
                    Coord::Free if pt.x[j] < lo[j] - tol => Coord::Lower,
                    Coord::Free if pt.x[j] > hi[j] + tol => Coord::Upper,
                    Coord::Lower if pt.z[j] > tol => Coord::Free,
                    Coord::Upper if pt.z[j] < -tol => Coord::Free,
                    other => *other,
                }
            })
            .collect();
        Guess { rows, coords }
    }

    /// Active-set rounds from an initial guess; returns a verified point.
    fn active_set(&self, mut guess: Guess, cfg: &OracleConfig) -> Option<(KktPoint, f64)> {
        let mut seen: Vec<Guess> = Vec::new();
        for _ in 0..MAX_ACTIVE_SET_ROUNDS {
            let pt = self.solve_guess(&guess)?;
            let tol = 1e-11 * self.scale(&pt.x);
            let next = self.update(&guess, &pt, tol);
            if next == guess {
                let x = self.project(&pt.x);
                let y = self.clip(&pt.y);
                let res = self.residual(&x, &y);
                return (res <= cfg.tolerance).then_some((KktPoint { x, y, z: pt.z }, res));
            }
            if seen.contains(&next) {
                return None;
            }
            seen.push(std::mem::replace(&mut guess, next));
        }
        None
    }
}

/// Iterative state for the fallback loops.
struct Iterate {
    x: DVector<f64>,
    y: DVector<f64>,
}

#[allow(clippy::too_many_arguments)]
pub(super) fn solve(
    h: &DMatrix<f64>,
    lambda_max: f64,
    factor: &Cholesky<f64, Dyn>,
    c: &DVector<f64>,
    l1: Option<&L1Term>,
    set: &FeasibleSet,
    cfg: &OracleConfig,
    warm: Option<&DVector<f64>>,
) -> Result<Solved> {
    let n = c.len();
    let prob = Problem {
        h,
        c,
        gamma: l1.map_or(0.0, |l| l.gamma),
        p: l1.map_or_else(|| DMatrix::zeros(0, n), |l| l.p.clone()),
        s: l1.map_or_else(|| DVector::zeros(0), |l| l.s.clone()),
        bounds: match set {
            FeasibleSet::Box { lower, upper } => Some((lower, upper)),
            FeasibleSet::WholeSpace => None,
        },
    };

    let x0 = match warm {
        Some(w) => prob.project(w),
        None => prob.project(&-factor.solve(c)),
    };
    let id_tol = 1e-9 * prob.scale(&x0);
    if let Some((pt, res)) = prob.active_set(prob.identify(&x0, id_tol), cfg) {
        return Ok((pt.x, 0, res, OraclePath::ActiveSet));
    }

    let y0 = {
        let r = &prob.p * &x0 - &prob.s;
        r.map(|v| crate::problem::sign0(v) * prob.gamma)
    };
    let mut it = Iterate { x: x0, y: y0 };
    let mut used = 0usize;
    let mut block = FIRST_BLOCK;
    let lipschitz = lambda_max.max(f64::MIN_POSITIVE);
    let p_norm = linalg::sigma_max(&prob.p);
    let mut momentum = FistaState::new(&it.x);
    let mut best = (f64::INFINITY, it.x.clone());
    while used < cfg.max_inner_iterations {
        let steps = block.min(cfg.max_inner_iterations - used);
        for _ in 0..steps {
            if prob.q() > 0 {
                condat_vu_step(&prob, &mut it, lipschitz, p_norm);
            } else {
                momentum.step(&prob, &mut it.x, lipschitz);
            }
        }
        used += steps;
        let res = prob.residual(&it.x, &it.y);
        if res < best.0 {
            best = (res, it.x.clone());
        }
        let id_tol = (10.0 * res).max(1e-9) * prob.scale(&it.x);
        if let Some((pt, res)) = prob.active_set(prob.identify(&it.x, id_tol), cfg) {
            return Ok((pt.x, used, res, OraclePath::ActiveSet));
        }
        if res <= cfg.tolerance {
            return Ok((it.x, used, res, OraclePath::PrimalDual));
        }
        block = (block * 2).min(2_000);
    }
    Err(Error::OracleFailure {
        iterations: used,
        residual: best.0,
        best: best.1,
    })
}

/// One linearized primal-dual (Condat–Vũ) step on
/// `min_{x∈X} ½xᵀHx + cᵀx + γ‖Px − s‖₁`.
fn condat_vu_step(prob: &Problem<'_>, it: &mut Iterate, lipschitz: f64, p_norm: f64) {
    let tau = 0.99 / lipschitz;
    let sigma = lipschitz / (2.0 * p_norm * p_norm).max(f64::MIN_POSITIVE);
    let x_next = prob.project(&(&it.x - prob.stationarity(&it.x, &it.y) * tau));
    let extrap = &x_next * 2.0 - &it.x;
    let y_next = prob.clip(&(&it.y + (&prob.p * extrap - &prob.s) * sigma));
    it.x = x_next;
    it.y = y_next;
}

/// FISTA on `½xᵀHx + cᵀx` over the box, with restart every 100 steps.
struct FistaState {
    y: DVector<f64>,
    t: f64,
    count: usize,
}

impl FistaState {
    fn new(x: &DVector<f64>) -> Self {
        Self {
            y: x.clone(),
            t: 1.0,
            count: 0,
        }
    }

    fn step(&mut self, prob: &Problem<'_>, x: &mut DVector<f64>, lipschitz: f64) {
        if self.count.is_multiple_of(100) {
            self.y = x.clone();
            self.t = 1.0;
        }
        self.count += 1;
        let grad = prob.h * &self.y + prob.c;
        let x_next = prob.project(&(&self.y - grad / lipschitz));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * self.t * self.t).sqrt());
        self.y = &x_next + (&x_next - &*x) * ((self.t - 1.0) / t_next);
        self.t = t_next;
        *x = x_next;
    }
}
