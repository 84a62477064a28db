use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::problem::{FeasibleSet, ObjectiveKind, ProblemInstance};

pub const DEFAULT_SAFETY: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    ExplicitAlpha,
    LinearCase,
    CompactX,
    LipschitzG,
    StronglyConcaveOptimal,
}

/// Step size for the projected dual gradient method, with the surrogate
/// constants it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSizeRule {
    pub kind: StepKind,
    pub alpha: f64,
    pub eta_hat: Option<f64>,
    pub l_hat: Option<f64>,
    pub gamma_hat: Option<f64>,
    pub safety: f64,
}

/// Strict upper bound on admissible steps given `L̂` and `η̂`.
pub fn surrogate_step_bound(l_hat: f64, eta_hat: f64) -> f64 {
    if l_hat > eta_hat {
        2.0 / l_hat
    } else {
        4.0 * (1.0 / eta_hat - l_hat / (2.0 * eta_hat * eta_hat))
    }
}

/// `√(m+1)/θ · max{σmax(A), c}`.
fn gamma_hat(inst: &ProblemInstance, c: f64) -> f64 {
    let sa = inst.spectral_constants().sigma_max_eq;
    ((inst.m() + 1) as f64).sqrt() / inst.theta() * sa.max(c)
}

/// `γ̂ (σmax²(A) + Σ L_i²)^½`.
fn l_hat(inst: &ProblemInstance, gamma_hat: f64) -> f64 {
    let sa = inst.spectral_constants().sigma_max_eq;
    gamma_hat * (sa * sa + inst.sum_lipschitz_sq()).sqrt()
}

fn eta_hat(inst: &ProblemInstance, u_tilde: &DVector<f64>, radius: f64) -> Result<f64> {
    check_dim("u_tilde", inst.m(), u_tilde.len())?;
    let sa = inst.spectral_constants().sigma_max_eq;
    let mut eta = sa * sa / inst.theta();
    for (i, g) in inst.inequalities().iter().enumerate() {
        if !(u_tilde[i] < 0.0) {
            return Err(Error::Config(format!("u_tilde[{i}] must be negative")));
        }
        eta = eta.max(-g.lipschitz() * radius / u_tilde[i]);
    }
    Ok(eta)
}

impl StepSizeRule {
    pub fn explicit(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Config(format!("step size must be positive, got {alpha}")));
        }
        Ok(Self {
            kind: StepKind::ExplicitAlpha,
            alpha,
            eta_hat: None,
            l_hat: None,
            gamma_hat: None,
            safety: 1.0,
        })
    }

    /// `α = 0.99 · 2θ/σmax²(Ã)` for all-linear instances.
    pub fn linear_case(inst: &ProblemInstance) -> Result<Self> {
        let sigma = inst
            .spectral_constants()
            .sigma_max_stacked
            .ok_or_else(|| Error::Config("linear step rule needs affine constraints".into()))?;
        let l = sigma * sigma / inst.theta();
        let sa = inst.spectral_constants().sigma_max_eq;
        let grad = inst
            .inequalities()
            .iter()
            .map(|g| g.gradient_bound())
            .fold(0.0, f64::max);
        Ok(Self {
            kind: StepKind::LinearCase,
            alpha: DEFAULT_SAFETY * 2.0 / l,
            eta_hat: Some(sa * sa / inst.theta()),
            l_hat: Some(l),
            gamma_hat: Some(gamma_hat(inst, grad)),
            safety: DEFAULT_SAFETY,
        })
    }

    /// Compact `X`. `u_tilde` holds the (negative) inequality entries of a
    /// point for which `𝓛(·, ũ)` is still strongly convex over `X`.
    pub fn compact_x(inst: &ProblemInstance, u_tilde: &DVector<f64>) -> Result<Self> {
        let diam = inst
            .set()
            .diameter()
            .ok_or_else(|| Error::Config("compact-X step rule needs a box X".into()))?;
        let grad = inst
            .inequalities()
            .iter()
            .map(|g| g.gradient_bound())
            .fold(0.0, f64::max);
        let gh = gamma_hat(inst, grad);
        Self::from_surrogates(StepKind::CompactX, inst, gh, eta_hat(inst, u_tilde, diam)?)
    }

    /// Lipschitz-gradient constraints; `dual_diameter` bounds `diam(D₀)`,
    /// e.g. `2‖u₀ − u*‖`.
    pub fn lipschitz_g(
        inst: &ProblemInstance,
        u_tilde: &DVector<f64>,
        dual_diameter: f64,
    ) -> Result<Self> {
        if !(dual_diameter >= 0.0) || !dual_diameter.is_finite() {
            return Err(Error::Config(format!("invalid dual diameter {dual_diameter}")));
        }
        let lmax = inst
            .inequalities()
            .iter()
            .map(|g| g.lipschitz())
            .fold(0.0, f64::max);
        let gh = gamma_hat(inst, lmax);
        let eta = eta_hat(inst, u_tilde, gh * dual_diameter)?;
        Self::from_surrogates(StepKind::LipschitzG, inst, gh, eta)
    }

    fn from_surrogates(kind: StepKind, inst: &ProblemInstance, gh: f64, eta: f64) -> Result<Self> {
        let lh = l_hat(inst, gh);
        let bound = surrogate_step_bound(lh, eta);
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(Error::Config(format!(
                "no admissible step for L̂ = {lh:e}, η̂ = {eta:e}"
            )));
        }
        Ok(Self {
            kind,
            alpha: DEFAULT_SAFETY * bound,
            eta_hat: Some(eta),
            l_hat: Some(lh),
            gamma_hat: Some(gh),
            safety: DEFAULT_SAFETY,
        })
    }

    /// `α_opt` of the linearly convergent case.
    pub fn strongly_concave_optimal(inst: &ProblemInstance) -> Result<Self> {
        let alpha = strongly_concave_rate_params(inst, None)?.alpha_opt;
        let sigma = inst.spectral_constants().sigma_max_stacked.unwrap_or(0.0);
        Ok(Self {
            kind: StepKind::StronglyConcaveOptimal,
            alpha,
            eta_hat: None,
            l_hat: Some(sigma * sigma / inst.theta()),
            gamma_hat: None,
            safety: 1.0,
        })
    }

    /// Rescale a derived step to a different safety factor in `(0, 1)`.
    pub fn with_safety(self, safety: f64) -> Result<Self> {
        if !(safety > 0.0 && safety < 1.0) {
            return Err(Error::Config(format!("safety factor must lie in (0, 1), got {safety}")));
        }
        match self.kind {
            StepKind::ExplicitAlpha | StepKind::StronglyConcaveOptimal => Ok(self),
            _ => Ok(Self {
                alpha: self.alpha / self.safety * safety,
                safety,
                ..self
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub q: f64,
    pub alpha_opt: f64,
}

/// Contraction factor `q(α)` and optimal step for an all-linear instance with
/// full-row-rank `Ã` and `X = ℝⁿ`. `M` is the subgradient Lipschitz constant
/// of `f`, falling back to `λmax(H)` for purely quadratic objectives. With
/// `alpha = None`, `q` is evaluated at `α_opt`.
pub fn strongly_concave_rate_params(inst: &ProblemInstance, alpha: Option<f64>) -> Result<RateParams> {
    let stack = inst
        .linear_stack()
        .ok_or_else(|| Error::Unsupported("linear rate needs affine constraints".into()))?;
    if !matches!(inst.set(), FeasibleSet::WholeSpace) {
        return Err(Error::Unsupported("linear rate needs X = R^n".into()));
    }
    let m_lip = match (inst.objective().subgradient_lipschitz(), inst.objective().kind()) {
        (Some(m), _) => m,
        (None, ObjectiveKind::Quadratic(_)) => inst.spectral_constants().lambda_max_h.unwrap_or(0.0),
        _ => {
            return Err(Error::Config(
                "linear rate needs the subgradient Lipschitz constant M".into(),
            ))
        }
    };
    let consts = inst.spectral_constants();
    let smax = consts.sigma_max_stacked.unwrap_or(0.0);
    let smin = consts.sigma_min_stacked.unwrap_or(0.0);
    let row_min = linalg::symmetric_extremes(&(&stack.a * stack.a.transpose())).0;
    if stack.a.nrows() > stack.a.ncols() || !(row_min > 1e-12 * smax * smax) {
        return Err(Error::Unsupported("stacked constraint matrix is not full row rank".into()));
    }
    let theta = inst.theta();
    let denom = theta * theta * smin * smin + m_lip * m_lip * smax * smax;
    let alpha_opt = 2.0 * m_lip * m_lip * theta / denom;
    let alpha = alpha.unwrap_or(alpha_opt);
    if !(alpha > 0.0) || alpha > alpha_opt * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "step {alpha} outside (0, {alpha_opt}] for the linear rate"
        )));
    }
    let q = (1.0 - 2.0 * alpha * theta * smin * smin * smax * smax / denom).max(0.0).sqrt();
    Ok(RateParams { q, alpha_opt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::*;
    use nalgebra::DMatrix;

    fn identity_instance(m_lip: f64) -> ProblemInstance {
        let f = ObjectiveModel::quadratic(DMatrix::identity(2, 2), DVector::zeros(2))
            .unwrap()
            .with_subgradient_lipschitz(m_lip)
            .unwrap();
        let g = vec![InequalityConstraint::affine(DVector::from_vec(vec![1.0, 0.0]), -1.0)];
        let eq = EqualityConstraints::new(
            DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
            DVector::from_vec(vec![0.5]),
        )
        .unwrap();
        ProblemInstance::new(f, g, eq, FeasibleSet::WholeSpace, None).unwrap()
    }

    #[test]
    fn rate_params_identity() {
        let r = strongly_concave_rate_params(&identity_instance(1.0), None).unwrap();
        assert!((r.alpha_opt - 1.0).abs() < 1e-14);
        assert!(r.q.abs() < 1e-7);
        let r = strongly_concave_rate_params(&identity_instance(2.0), None).unwrap();
        assert!((r.alpha_opt - 1.6).abs() < 1e-14);
        assert!(strongly_concave_rate_params(&identity_instance(1.0), Some(0.0)).is_err());
    }

    #[test]
    fn linear_rule_matches_standard_condition() {
        let inst = identity_instance(1.0);
        let r = StepSizeRule::linear_case(&inst).unwrap();
        assert!((r.alpha - 0.99 * 2.0).abs() < 1e-14);
        assert_eq!(r.kind, StepKind::LinearCase);
    }

    #[test]
    fn surrogate_bound_branches() {
        assert_eq!(surrogate_step_bound(2.0, 1.0), 1.0);
        // L̂ ≤ η̂: 4(1/η̂ − L̂/(2η̂²)) = 4(1/2 − 1/8) = 1.5
        assert!((surrogate_step_bound(1.0, 2.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn compact_rule_is_admissible() {
        let f = ObjectiveModel::quadratic(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        let g = vec![InequalityConstraint::affine(DVector::from_vec(vec![1.0, 1.0]), -1.0)];
        let set = FeasibleSet::boxed(DVector::from_vec(vec![-1.0; 2]), DVector::from_vec(vec![1.0; 2]))
            .unwrap();
        let inst = ProblemInstance::new(f, g, EqualityConstraints::none(2), set, None).unwrap();
        let r = StepSizeRule::compact_x(&inst, &DVector::from_vec(vec![-0.5])).unwrap();
        let bound = surrogate_step_bound(r.l_hat.unwrap(), r.eta_hat.unwrap());
        assert!(r.alpha < bound && r.alpha > 0.0);
        assert!(StepSizeRule::compact_x(&inst, &DVector::from_vec(vec![0.5])).is_err());
        assert!(StepSizeRule::explicit(-1.0).is_err());
    }
}
