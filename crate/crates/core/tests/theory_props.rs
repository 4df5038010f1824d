//! Fixed-point threshold and subsolution properties.

use std::f64::consts::PI;

use girg_lab::meanfield::{log_grid, phi, symmetric_grid, MeanFieldParams};
use girg_lab::theory::{build_subsolution_on, check_valid, k_min, solve_delta_star, y_coefficient, SubsolutionSpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn delta_star_is_the_smallest_root(y in 1.7725f64..12.0) {
        let d = solve_delta_star(y).unwrap();
        prop_assert!(d > 0.5 && d <= 1.0);
        prop_assert!((phi(y * (d - 0.5)) - d).abs() <= 1e-9);
        // below the root the map lies above the diagonal
        for i in 1..50 {
            let x = 0.5 + (d - 0.5) * i as f64 / 50.0;
            prop_assert!(phi(y * (x - 0.5)) > x - 1e-12);
        }
    }

    #[test]
    fn no_root_at_or_below_root_pi(y in 0.0f64..1.7724) {
        prop_assert!(solve_delta_star(y).is_none());
    }

    #[test]
    fn delta_star_grows_with_y(a in 1.8f64..10.0, b in 1.8f64..10.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-6);
        prop_assert!(solve_delta_star(lo).unwrap() <= solve_delta_star(hi).unwrap() + 1e-12);
    }

    #[test]
    fn y_scales_with_root_k(k in 0.1f64..1e4, tau in 2.1f64..5.0) {
        let ratio = y_coefficient(2, tau, k) / (y_coefficient(2, tau, 1.0) * k.sqrt());
        prop_assert!((ratio - 1.0).abs() < 1e-12);
        prop_assert!((y_coefficient(2, tau, k_min(2, tau)) - PI.sqrt()).abs() < 1e-9);
    }
}

#[test]
fn subsolution_is_valid_on_small_grids() {
    for (tau, scale) in [(3.0, 1.2), (2.6, 1.5), (3.5, 2.0)] {
        let k = scale * k_min(2, tau);
        let expected = SubsolutionSpec::new(2, tau, k).unwrap();
        let reach = (k * 40.0).sqrt();
        let p = MeanFieldParams::new(2, tau, k, 40.0, log_grid(40.0, 8), symmetric_grid(2.0 * reach / 64.0, 64)).unwrap();
        let (built, f) = build_subsolution_on(p).unwrap();
        assert_eq!(built, expected);
        let report = check_valid(&f, true).unwrap();
        assert!(report.pass, "tau={tau} k={k}: {}", report.to_key_value());
    }
}

#[test]
fn below_threshold_there_is_no_subsolution() {
    assert!(SubsolutionSpec::new(2, 3.0, 0.9 * k_min(2, 3.0)).is_err());
}
