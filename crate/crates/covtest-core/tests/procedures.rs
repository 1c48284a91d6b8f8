use covtest_core::models::{build, cholesky, CovarianceModel};
use covtest_core::params::{adaptive_grid, default_c_star, profile, theoretical_thresholds};
use covtest_core::procedures::{adaptive_test, calibrate, delta_test, null_statistic};
use covtest_core::sampler::{sample_gaussian, sample_standard, SeedSpec};
use covtest_core::statistic::standardize;

#[test]
fn calibration_picks_the_upper_order_statistic() {
    let prof = profile(1.0, 1.0, 0.4, 20, true).unwrap();
    let seed = SeedSpec::new(42, 0, 0);
    let cal = calibrate(&prof, 10, 0.05, 1000, &seed).unwrap();
    assert_eq!(cal.trace.len(), 1000);
    assert_eq!(cal.threshold, cal.trace[949]);
    assert!(cal.trace.windows(2).all(|w| w[0] <= w[1]));
    // bit-for-bit reproducible
    let again = calibrate(&prof, 10, 0.05, 1000, &seed).unwrap();
    assert_eq!(cal.threshold, again.threshold);
    assert_eq!(cal.trace, again.trace);
}

#[test]
fn calibrated_threshold_matches_the_normal_quantile() {
    // standardized empirical threshold approaches z_0.95
    let prof = profile(1.0, 1.0, 0.1, 200, true).unwrap();
    let cal = calibrate(&prof, 50, 0.05, 5000, &SeedSpec::new(7, 1, 0)).unwrap();
    let z = standardize(cal.threshold, 50, 200);
    assert!((z - 1.645).abs() < 0.15, "standardized threshold {z}");
}

#[test]
fn near_median_levels_give_near_zero_thresholds() {
    // level -> 1/2 pushes the threshold to the null median, which sits at
    // zero on the standardized scale up to Monte Carlo noise
    let prof = profile(1.0, 1.0, 0.3, 50, true).unwrap();
    let cal = calibrate(&prof, 20, 0.49, 4000, &SeedSpec::new(8, 2, 0)).unwrap();
    let z = standardize(cal.threshold, 20, 50);
    assert!(z.abs() < 0.12, "near-median threshold {z}");
}

#[test]
fn type_one_error_transfers_to_fresh_data() {
    let prof = profile(1.0, 1.0, 0.3, 30, true).unwrap();
    let n = 10;
    let level = 0.1;
    let cal = calibrate(&prof, n, level, 1000, &SeedSpec::new(5, 10, 0)).unwrap();
    // disjoint experiment label guarantees fresh draws
    let fresh = 2000;
    let mut rejections = 0;
    for j in 0..fresh {
        let d = null_statistic(&prof, n, &SeedSpec::new(5, 11, j)).unwrap();
        if d > cal.threshold {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / fresh as f64;
    let slack = 3.0 * (level * (1.0 - level) / fresh as f64).sqrt();
    assert!(
        (rate - level).abs() < slack,
        "fresh type I {rate} vs {level} (slack {slack})"
    );
}

#[test]
fn asymptotic_threshold_hits_the_level() {
    // the closed-form threshold from the limiting law, no calibration
    let prof = profile(1.0, 1.0, 0.1, 200, true).unwrap();
    let n = 50;
    let th = theoretical_thresholds(&prof, n, 0.05).unwrap();
    let reps = 2000;
    let mut rejections = 0;
    for j in 0..reps {
        let s = sample_standard(n, 200, &SeedSpec::new(6, 20, j)).unwrap();
        if delta_test(&s, &prof, th.t_w).unwrap().reject {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / reps as f64;
    assert!((rate - 0.05).abs() < 0.02, "type I at t_w: {rate}");
}

#[test]
fn rejection_is_monotone_in_the_threshold() {
    let prof = profile(1.0, 1.0, 0.25, 40, true).unwrap();
    let s = sample_standard(8, 40, &SeedSpec::new(30, 0, 0)).unwrap();
    let mut last_reject = true;
    for t in [-1.0, -0.01, 0.0, 0.001, 0.1, 2.0] {
        let now = delta_test(&s, &prof, t).unwrap().reject;
        assert!(!(now && !last_reject), "rejection regained at t={t}");
        last_reject = now;
    }
}

#[test]
fn single_point_grid_collapses_to_the_fixed_test() {
    let (n, p) = (4, 16);
    let c_star = default_c_star(1.5, 3.0);
    let grid = adaptive_grid(1.5, 1.5 + 1e-9, 1.0, n, p, c_star).unwrap();
    assert_eq!(grid.points.len(), 3);
    for j in 0..50 {
        let s = sample_standard(n, p, &SeedSpec::new(60, 3, j)).unwrap();
        let ad = adaptive_test(&s, &grid).unwrap();
        let pt = &grid.points[0];
        let fixed = delta_test(&s, &pt.profile, c_star * pt.t).unwrap();
        assert_eq!(ad.reject, fixed.reject, "replicate {j}");
        let scale = fixed.value.abs().max(1e-300);
        assert!((ad.value - fixed.value).abs() < 1e-9 * scale);
    }
}

#[test]
fn adaptive_metadata_points_at_the_margin() {
    let (n, p) = (20, 100);
    let grid = adaptive_grid(1.25, 3.0, 1.0, n, p, default_c_star(1.25, 3.0)).unwrap();
    let s = sample_standard(n, p, &SeedSpec::new(61, 4, 0)).unwrap();
    let out = adaptive_test(&s, &grid).unwrap();
    let idx = out.meta.grid_index.unwrap();
    assert!(idx >= 1 && idx <= grid.points.len());
    let margin = out.meta.margin.unwrap();
    assert_eq!(out.reject, margin > 0.0);
    assert!((out.value - out.threshold - margin).abs() < 1e-15);
}

#[test]
fn adaptivity_price_is_small_at_the_top_of_the_curve() {
    // strongest tridiagonal alternative: both the oracle-calibrated fixed
    // test and the grid test saturate, and the fixed test stays ahead
    let (n, p) = (20, 120);
    let rho = 0.35f64;
    let psi = (((p - 1) as f64 / p as f64).sqrt()) * rho;
    let prof = profile(1.0, 1.0, psi, p, true).unwrap();
    let cal = calibrate(&prof, n, 0.05, 500, &SeedSpec::new(70, 1, 0)).unwrap();
    let grid = adaptive_grid(1.25, 3.0, 1.0, n, p, default_c_star(1.25, 3.0)).unwrap();
    let sigma = build(&CovarianceModel::Tridiagonal { rho }, p).unwrap();
    let chol = cholesky(&sigma).unwrap();
    let reps = 400;
    let mut fixed_hits = 0;
    let mut grid_hits = 0;
    for j in 0..reps {
        let s = sample_gaussian(&chol, n, &SeedSpec::new(70, 2, j)).unwrap();
        if delta_test(&s, &prof, cal.threshold).unwrap().reject {
            fixed_hits += 1;
        }
        if adaptive_test(&s, &grid).unwrap().reject {
            grid_hits += 1;
        }
    }
    let fixed_power = fixed_hits as f64 / reps as f64;
    let grid_power = grid_hits as f64 / reps as f64;
    let hw = 1.96 * (0.25f64 / reps as f64).sqrt();
    assert!(
        grid_power <= fixed_power + 2.0 * hw,
        "grid test {grid_power} above oracle {fixed_power}"
    );
    assert!(
        grid_power >= fixed_power - 0.15,
        "adaptivity price too steep: {grid_power} vs {fixed_power}"
    );
}

#[test]
fn calibration_validation() {
    let prof = profile(1.0, 1.0, 0.4, 20, true).unwrap();
    let seed = SeedSpec::new(1, 0, 0);
    assert!(calibrate(&prof, 10, 0.05, 99, &seed).is_err());
    assert!(calibrate(&prof, 10, 0.5, 1000, &seed).is_err());
    assert!(calibrate(&prof, 10, 0.0, 1000, &seed).is_err());
    assert!(calibrate(&prof, 1, 0.05, 1000, &seed).is_err());
}
