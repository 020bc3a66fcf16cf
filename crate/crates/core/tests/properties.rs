//! Randomised invariants of the calibration and geometry layers.

use manifold_dp::calibration::{
    bm_epsilon, bm_time_for_budget, dp_to_rdp, langevin_epsilon, langevin_time_for_budget, rdp_to_dp_budget,
    RdpBudget,
};
use manifold_dp::manifold::{distance, exp_map, log_map, uniform_ball_samples, ManifoldSpec};
use manifold_dp::rng::RngState;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn bm_time_inverts_epsilon(k in -2.0f64..2.0, alpha in 1.01f64..50.0, delta in 1e-3f64..3.0, eps in 1e-3f64..20.0) {
        let b = RdpBudget::new(alpha, eps).unwrap();
        match bm_time_for_budget(k, &b, delta) {
            Ok(t) => {
                prop_assert!(t > 0.0);
                let back = bm_epsilon(k, alpha, delta, t);
                prop_assert!((back - eps).abs() <= 1e-11 * eps, "{back} vs {eps}");
            }
            Err(_) => prop_assert!(k > 0.0 && 2.0 * eps <= k * alpha * delta * delta),
        }
    }

    #[test]
    fn bm_epsilon_decreases_in_time(k in -2.0f64..2.0, t in 1e-3f64..5.0, dt in 1e-3f64..1.0) {
        prop_assert!(bm_epsilon(k, 2.0, 0.5, t + dt) < bm_epsilon(k, 2.0, 0.5, t));
    }

    #[test]
    fn langevin_time_inverts_epsilon(k in -1.0f64..2.0, gap in 1e-3f64..3.0, alpha in 1.01f64..20.0, delta in 1e-3f64..3.0, eps in 1e-3f64..10.0) {
        let b = RdpBudget::new(alpha, eps).unwrap();
        let t = langevin_time_for_budget(k, k + gap, &b, delta).unwrap();
        let back = langevin_epsilon(k, k + gap, alpha, delta, t).unwrap();
        prop_assert!((back - eps).abs() <= 1e-11 * eps);
    }

    #[test]
    fn dp_to_rdp_is_bounded_and_invertible(star in 1e-3f64..30.0, alpha in 1.01f64..100.0) {
        let v = dp_to_rdp(star, alpha);
        prop_assert!(v > 0.0 && v <= star);
        let back = rdp_to_dp_budget(&RdpBudget::new(alpha, v).unwrap());
        prop_assert!((dp_to_rdp(back, alpha) - v).abs() <= 1e-10);
    }

    #[test]
    fn exp_inverts_log_on_balls(seed in any::<u64>(), which in 0usize..3) {
        let (spec, r) = [(ManifoldSpec::sphere(2), 1.4), (ManifoldSpec::hyperboloid(3), 3.0), (ManifoldSpec::euclidean(4), 5.0)][which];
        let mut rng = RngState::new(seed, 0).rng();
        let pts = uniform_ball_samples(&spec.origin(), r, 2, &mut rng).unwrap();
        let v = log_map(&pts[0], &pts[1]).unwrap();
        let back = exp_map(&pts[0], &v).unwrap();
        prop_assert!(distance(&back, &pts[1]).unwrap() < 1e-9);
        prop_assert!((v.norm() - distance(&pts[0], &pts[1]).unwrap()).abs() < 1e-9);
    }
}
