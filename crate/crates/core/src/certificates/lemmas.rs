use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::gamma_at;
use crate::error::{check_dim, Result};
use crate::oracle::{solve_lagrangian, solve_lagrangian_extended, OracleConfig};
use crate::problem::{DualPoint, ProblemInstance};

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaConfig {
    pub oracle: OracleConfig,
    /// Absolute slack added to every comparison.
    pub tolerance: f64,
    /// Inequality entries of `ũ` (all negative). When set, each pair's `v` is
    /// also shifted by `ũ` into the extended set and the Lipschitz-like
    /// gradient inequality between `D` and `D̃` is checked.
    pub u_tilde: Option<DVector<f64>>,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        Self {
            oracle: OracleConfig::default(),
            tolerance: 1e-7,
            u_tilde: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub violations: usize,
    /// Smallest `bound − measured` seen.
    pub worst_margin: Option<f64>,
}

impl CheckSummary {
    fn record(&mut self, margin: f64, tol: f64) {
        if !(margin >= -tol) {
            self.violations += 1;
        }
        self.worst_margin = Some(self.worst_margin.map_or(margin, |w| w.min(margin)));
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub pairs: usize,
    /// `‖x̄(u) − x̄(v)‖ ≤ min{γ(u), γ(v)}‖u − v‖`
    pub primal_contraction: CheckSummary,
    /// `‖∇d(u) − ∇d(v)‖ ≤ min{γ(u), γ(v)}(σmax²(A) + Σ L_i²)^½ ‖u − v‖`
    pub gradient_lipschitz: CheckSummary,
    /// `‖x̄(u) − x̄(v)‖ ≤ σmax(Ã)/θ ‖u − v‖`, all-linear instances.
    pub linear_contraction: Option<CheckSummary>,
    /// `σmax(Ã)/θ ≤ min{γ(u), γ(v)}`, all-linear instances.
    pub linear_tighter: Option<CheckSummary>,
    /// Gradient inequality with `v` moved into `D̃`.
    pub extended_gradient: Option<CheckSummary>,
    /// Largest `‖x̄(u)‖` over all evaluated points.
    pub max_xbar_norm: f64,
}

impl LemmaReport {
    pub fn total_violations(&self) -> usize {
        [
            Some(&self.primal_contraction),
            Some(&self.gradient_lipschitz),
            self.linear_contraction.as_ref(),
            self.linear_tighter.as_ref(),
            self.extended_gradient.as_ref(),
        ]
        .into_iter()
        .flatten()
        .map(|c| c.violations)
        .sum()
    }
}

/// Sampled checks of the contraction of `x̄(·)` and the Lipschitz behaviour
/// of `∇d` on pairs of dual points.
pub fn lemma_checks(
    inst: &ProblemInstance,
    pairs: &[(DualPoint, DualPoint)],
    cfg: &LemmaConfig,
) -> Result<LemmaReport> {
    let consts = inst.spectral_constants();
    let lip_factor = (consts.sigma_max_eq.powi(2) + inst.sum_lipschitz_sq()).sqrt();
    let linear = consts.sigma_max_stacked.map(|s| s / inst.theta());
    if let Some(ut) = &cfg.u_tilde {
        check_dim("u_tilde", inst.m(), ut.len())?;
    }
    let tol = cfg.tolerance;
    let mut rep = LemmaReport {
        linear_contraction: linear.map(|_| CheckSummary::default()),
        linear_tighter: linear.map(|_| CheckSummary::default()),
        extended_gradient: cfg.u_tilde.as_ref().map(|_| CheckSummary::default()),
        ..LemmaReport::default()
    };
    for (u, v) in pairs {
        let ru = solve_lagrangian(inst, u, &cfg.oracle, None)?;
        let rv = solve_lagrangian(inst, v, &cfg.oracle, Some(&ru.xbar))?;
        let slack = tol + ru.inner_residual + rv.inner_residual;
        let duv = (u.values() - v.values()).norm();
        let dx = (&ru.xbar - &rv.xbar).norm();
        let dg = (&ru.dual_gradient - &rv.dual_gradient).norm();
        let (gu, gv) = (gamma_at(inst, &ru.xbar), gamma_at(inst, &rv.xbar));
        let gmin = gu.min(gv);
        rep.primal_contraction.record(gmin * duv - dx, slack);
        rep.gradient_lipschitz.record(gmin * lip_factor * duv - dg, slack);
        if let Some(c) = linear {
            if let Some(s) = rep.linear_contraction.as_mut() {
                s.record(c * duv - dx, slack);
            }
            if let Some(s) = rep.linear_tighter.as_mut() {
                s.record(gmin - c, 1e-12 * (1.0 + c));
            }
        }
        rep.max_xbar_norm = rep.max_xbar_norm.max(ru.xbar.norm()).max(rv.xbar.norm());

        if let (Some(ut), Some(s)) = (&cfg.u_tilde, rep.extended_gradient.as_mut()) {
            let mut full_ut = DVector::zeros(inst.dual_dim());
            full_ut.rows_mut(0, inst.m()).copy_from(ut);
            let mut w = v.values().clone();
            for i in 0..inst.m() {
                w[i] += ut[i];
            }
            // any value below the shifted entries keeps the extended oracle happy
            let floor = full_ut.map(|x| if x < 0.0 { x * 2.0 } else { x });
            let rw = solve_lagrangian_extended(inst, &w, &floor, &cfg.oracle, Some(&rv.xbar))?;
            let grad_max = |x: &DVector<f64>| {
                inst.inequalities()
                    .iter()
                    .map(|c| c.gradient(x).norm())
                    .fold(0.0, f64::max)
            };
            let gamma_uw = ((inst.m() + 1) as f64).sqrt() / inst.theta()
                * consts.sigma_max_eq.max(grad_max(&ru.xbar)).max(grad_max(&rw.xbar));
            let bound = lip_factor * gamma_uw * (u.values() - &w).norm();
            let measured = (&ru.dual_gradient - &rw.dual_gradient).norm();
            s.record(bound - measured, tol + ru.inner_residual + rw.inner_residual);
            rep.max_xbar_norm = rep.max_xbar_norm.max(rw.xbar.norm());
        }
        rep.pairs += 1;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::builtin;

    #[test]
    fn scalar_pairs() {
        let inst = builtin::t1();
        let p = |a: f64| DualPoint::new(DVector::from_vec(vec![a]), 1).unwrap();
        let pairs = vec![(p(0.3), p(0.3)), (p(0.0), p(2.0)), (p(1.5), p(0.25))];
        let rep = lemma_checks(
            &inst,
            &pairs,
            &LemmaConfig {
                u_tilde: Some(DVector::from_vec(vec![-0.5])),
                ..LemmaConfig::default()
            },
        )
        .unwrap();
        assert_eq!(rep.pairs, 3);
        assert_eq!(rep.total_violations(), 0);
        // x̄(u) = u and γ ≡ √2, so only the u = v pair has zero margin
        let worst = rep.primal_contraction.worst_margin.unwrap();
        assert!(worst.abs() < 1e-15);
        assert!((rep.max_xbar_norm - 2.0).abs() < 1e-15);
    }
}
