mod common;

use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{ball_instance, paper_dims, random_dual, separable, unbounded_quadratic};
use dualcert::certificates::{
    distance_bounds, lemma_checks, pg_rate_envelopes, pointwise_report,
    value_and_infeasibility_bounds, CertificateContext, LemmaConfig,
};
use dualcert::harness::{compute_reference, generate_instance, GeneratorConfig};
use dualcert::methods::{
    fista_dual, projected_dual_gradient, tseng_fast_gradient, MethodConfig, RunTrace,
    StepSizeRule,
};
use dualcert::problem::{InstanceFile, FEASIBILITY_FLOOR};
use dualcert::{solve_lagrangian, DualPoint, OracleConfig, ProblemInstance};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

fn instance_for(kind: u8, seed: u64) -> ProblemInstance {
    match kind % 4 {
        0 => paper_dims(seed),
        1 => separable(seed),
        2 => unbounded_quadratic(seed),
        _ => ball_instance(seed),
    }
}

fn vec_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, len)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn projection_idempotent_and_nonexpansive(
        m in 0usize..4,
        a in vec_strategy(6),
        b in vec_strategy(6),
    ) {
        let (a, b) = (DVector::from_vec(a), DVector::from_vec(b));
        let pa = DualPoint::project(&a, m);
        let pb = DualPoint::project(&b, m);
        prop_assert_eq!(&DualPoint::project(pa.values(), m), &pa);
        prop_assert!((pa.values() - pb.values()).norm() <= (&a - &b).norm() + 1e-15);
        for i in 0..m {
            prop_assert!(pa.values()[i] >= 0.0);
        }
        for i in m..6 {
            prop_assert_eq!(pa.values()[i], a[i]);
        }
    }

    #[test]
    fn infeasibility_zero_iff_residuals_small(seed in 0u64..500, scale in 0.0..3.0f64) {
        let inst = paper_dims(seed % 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = inst.slater_point().unwrap()
            + DVector::from_fn(inst.n(), |_, _| rand::Rng::gen_range(&mut rng, -scale..scale));
        let c = inst.constraint_vector(&x);
        let worst = (0..c.len())
            .map(|i| if i < inst.m() { c[i].max(0.0) } else { c[i].abs() })
            .fold(0.0, f64::max);
        prop_assert_eq!(inst.infeasibility(&x).unwrap() == 0.0, worst <= FEASIBILITY_FLOOR);
        // the Slater point itself is feasible up to the equality rounding
        let s = inst.slater_point().unwrap();
        prop_assert_eq!(inst.infeasibility(s).unwrap(), 0.0);
    }

    #[test]
    fn objective_strong_convexity(seed in 0u64..500, kind in 0u8..2) {
        let inst = instance_for(kind, seed % 16);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pt = || DVector::from_fn(inst.n(), |_, _| rand::Rng::gen_range(&mut rng, -2.0..2.0));
        let (x, y) = (pt(), pt());
        let f = inst.objective();
        let lhs = f.value(&y);
        let rhs = f.value(&x) + f.subgradient(&x).dot(&(&y - &x)) + 0.5 * f.theta() * (&y - &x).norm_squared();
        prop_assert!(lhs >= rhs - 1e-9, "{lhs} < {rhs}");
    }

    #[test]
    fn generator_deterministic_with_slater_point(seed in 0u64..10_000) {
        let cfg = GeneratorConfig { seed, ..GeneratorConfig::default() };
        let a = InstanceFile::from_instance(&generate_instance(&cfg).unwrap()).unwrap().to_json().unwrap();
        let inst = generate_instance(&cfg).unwrap();
        let b = InstanceFile::from_instance(&inst).unwrap().to_json().unwrap();
        prop_assert_eq!(a, b);
        let s = inst.slater_point().unwrap();
        prop_assert!(inst.inequality_values(s).max() < 0.0);
        prop_assert!(inst.set().contains_relint(s));
    }

    #[test]
    fn dual_concave_and_below_feasible_values(seed in 0u64..500, kind in 0u8..4, lambda in 0.0..1.0f64) {
        let inst = instance_for(kind, seed % 16);
        let cfg = OracleConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_dual(&inst, &mut rng, 4.0);
        let v = random_dual(&inst, &mut rng, 4.0);
        let w = DualPoint::new(u.values() * lambda + v.values() * (1.0 - lambda), inst.m()).unwrap();
        let (ru, rv, rw) = (
            solve_lagrangian(&inst, &u, &cfg, None).unwrap(),
            solve_lagrangian(&inst, &v, &cfg, None).unwrap(),
            solve_lagrangian(&inst, &w, &cfg, None).unwrap(),
        );
        let tol = 2.0 * cfg.tolerance + 1e-12 * (1.0 + ru.dual_value.abs() + rv.dual_value.abs());
        prop_assert!(rw.dual_value >= lambda * ru.dual_value + (1.0 - lambda) * rv.dual_value - tol);
        // weak duality against the strictly feasible point
        let x = inst.slater_point().unwrap();
        let fx = inst.eval_objective(x).unwrap();
        for r in [&ru, &rv, &rw] {
            prop_assert!(r.dual_value <= fx + 1e-9 * (1.0 + fx.abs()));
        }
    }

    #[test]
    fn contraction_and_boundedness(seed in 0u64..500, kind in 0u8..4) {
        let inst = instance_for(kind, seed % 16);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs: Vec<_> = (0..5)
            .map(|_| (random_dual(&inst, &mut rng, 3.0), random_dual(&inst, &mut rng, 3.0)))
            .collect();
        let rep = lemma_checks(&inst, &pairs, &LemmaConfig::default()).unwrap();
        prop_assert_eq!(rep.total_violations(), 0);
        prop_assert!(rep.max_xbar_norm.is_finite());
        prop_assert_eq!(rep.linear_contraction.is_some(), inst.is_all_linear());
    }
}

fn compliant_pg(inst: &ProblemInstance, u0: &DualPoint, k: usize, reference_u: &DVector<f64>) -> RunTrace {
    let rule = StepSizeRule::linear_case(inst).unwrap();
    let cfg = MethodConfig::new(k).with_reference(reference_u.clone());
    projected_dual_gradient(inst, u0, &rule, &cfg).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn projected_gradient_monotonicity(seed in 0u64..1000, start in 0.0..3.0f64) {
        let inst = paper_dims(seed % 32);
        let r = compute_reference(&inst, 100_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u0 = random_dual(&inst, &mut rng, start);
        let t = compliant_pg(&inst, &u0, 300, &r.u_star);
        let tol = 2.0 * OracleConfig::default().tolerance;
        for w in t.records.windows(2) {
            prop_assert!(w[1].d >= w[0].d - tol - 1e-14 * w[0].d.abs());
            prop_assert!(w[1].dist_u_to_ref.unwrap() <= w[0].dist_u_to_ref.unwrap() + 1e-9);
        }
    }

    #[test]
    fn iterates_stay_in_d_and_runs_repeat(seed in 0u64..1000) {
        let inst = paper_dims(seed % 32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u0 = random_dual(&inst, &mut rng, 2.0);
        let cfg = MethodConfig::new(50);
        let l = dualcert::certificates::dual_lipschitz(&inst).0;
        let runs = || {
            [
                compliant_pg(&inst, &u0, 50, &DVector::zeros(inst.dual_dim())),
                fista_dual(&inst, &u0, &cfg).unwrap(),
                tseng_fast_gradient(&inst, &u0, &u0, l, &cfg).unwrap(),
            ]
        };
        let (a, b) = (runs(), runs());
        for (ta, tb) in a.iter().zip(&b) {
            for (ra, rb) in ta.records.iter().zip(&tb.records) {
                prop_assert!((0..inst.m()).all(|i| ra.u.values()[i] >= 0.0));
                prop_assert_eq!(&ra.u, &rb.u);
                prop_assert_eq!(ra.d.to_bits(), rb.d.to_bits());
                prop_assert_eq!(&ra.xbar, &rb.xbar);
            }
        }
    }

    #[test]
    fn methods_started_at_optimum_stay_there(seed in 0u64..1000) {
        let inst = paper_dims(seed % 32);
        let r = compute_reference(&inst, 100_000).unwrap();
        let u_star = DualPoint::new(r.u_star.clone(), inst.m()).unwrap();
        let cfg = MethodConfig::new(30);
        let l = dualcert::certificates::dual_lipschitz(&inst).0;
        let traces = [
            compliant_pg(&inst, &u_star, 30, &r.u_star),
            fista_dual(&inst, &u_star, &cfg).unwrap(),
            tseng_fast_gradient(&inst, &u_star, &u_star, l, &cfg).unwrap(),
        ];
        let tol = 1e-8 * (1.0 + r.u_star.norm());
        for t in &traces {
            for rec in &t.records {
                prop_assert!((rec.u.values() - &r.u_star).norm() <= tol, "{} drifted", t.method);
            }
        }
    }

    #[test]
    fn bounds_vanish_at_optimum_and_linear_is_tighter(seed in 0u64..1000) {
        let inst = paper_dims(seed % 32);
        let r = compute_reference(&inst, 100_000).unwrap();
        prop_assert!(r.duality_gap <= 1e-7 * (1.0 + r.f_star.abs()));
        let ctx = CertificateContext::new(&inst, &r).unwrap();
        let u_star = DualPoint::new(r.u_star.clone(), inst.m()).unwrap();
        let d = distance_bounds(&ctx, &u_star, r.d_star).unwrap();
        let v = value_and_infeasibility_bounds(&ctx, &u_star, r.d_star).unwrap();
        let lin = v.linear.unwrap();
        for b in [d.via_dual_distance, d.via_gap, v.lipschitz.upper, v.lipschitz.lower,
                  v.lipschitz.infeasibility, lin.upper, lin.lower, lin.infeasibility] {
            prop_assert_eq!(b.abs(), 0.0);
        }

        let t = compliant_pg(&inst, &DualPoint::zeros(&inst), 200, &r.u_star);
        let mut rep = pointwise_report(&ctx, &t).unwrap();
        let env = pg_rate_envelopes(&ctx, &t).unwrap();
        let generic = env.family("pg_value_upper").unwrap();
        let linear = env.family("pg_value_upper_linear").unwrap();
        for (g, l) in generic.bound.iter().zip(&linear.bound) {
            prop_assert!(l <= g);
        }
        rep.merge(env).unwrap();
        prop_assert_eq!(rep.total_violations(), 0);
    }
}
