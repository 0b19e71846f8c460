use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use multiverse_core::analysis::{born_convergence, compare_narratives, end_to_end, total_variation};
use multiverse_core::SgParams;

#[test]
fn sampled_right_angle_distribution() {
    let r = born_convergence(FRAC_PI_2, 10, 100_000, 11).unwrap();
    let e = r.empirical.as_ref().unwrap();
    assert_eq!(e.samples, 100_000);
    // P(p = 5) = 252/1024 = 0.2461, 3σ ≈ 0.0041; tested at 4σ
    assert!((r.predicted[5] - 252.0 / 1024.0).abs() < 1e-15);
    assert!((e.distribution[5] - 0.2461).abs() < 4.0 / 3.0 * 0.0041);
    assert!((e.distribution_error[5] - 0.0041).abs() < 1e-4);
    let s: f64 = e.distribution.iter().sum();
    assert!((s - 1.0).abs() < 1e-9);
}

#[test]
fn sampled_single_run_frequency() {
    let r = born_convergence(2.0 * FRAC_PI_3, 1, 100_000, 3).unwrap();
    let e = r.empirical.unwrap();
    assert!((r.q - 0.25).abs() < 1e-12);
    assert!((e.plus_frequency_error - 0.0041).abs() < 1e-4);
    assert!(e.plus_frequency_deviation <= 4.0 * (0.25f64 * 0.75 / 1e5).sqrt());
}

#[test]
fn report_tv_is_bounded() {
    for theta in [0.0, 0.3, FRAC_PI_3, FRAC_PI_2, 2.5, PI] {
        let r = compare_narratives(15, theta).unwrap();
        assert!((0.0..=1.0).contains(&r.tv_naive_weighted));
        assert_eq!(r.tv_naive_weighted, total_variation(&r.predicted, &r.naive));
        assert!((r.peak_weighted as f64 - r.born_peak).abs() <= 1.0);
    }
}

#[test]
fn anti_aligned_spin() {
    let r = compare_narratives(8, PI).unwrap();
    assert!(r.q < 1e-15);
    assert_eq!(r.peak_weighted, 0);
    assert!((r.predicted[0] - 1.0).abs() < 1e-12);
}

#[test]
fn pipeline_right_angle() {
    let sg = SgParams::default();
    let r = end_to_end(FRAC_PI_2, &sg, 10, 0, 0).unwrap();
    assert!((r.q_numeric - 0.5).abs() < 1e-6);
    assert_eq!(r.report.peak_weighted, 5);
    assert!(r.max_distribution_deviation < 1e-6);
    assert!((r.t_reached - sg.t_final).abs() < 1e-12);
    assert!(r.final_diagnostics.spatial_overlap < 1e-6);
}

#[test]
fn pipeline_aligned_is_point_mass() {
    let r = end_to_end(0.0, &SgParams::default(), 6, 500, 1).unwrap();
    assert_eq!(r.q_numeric, 1.0);
    assert_eq!(r.report.predicted[6], 1.0);
    assert_eq!(r.report.empirical.unwrap().plus_frequency, 1.0);
}

#[test]
fn pipeline_two_thirds_pi() {
    let r = end_to_end(2.0 * FRAC_PI_3, &SgParams::default(), 20, 0, 0).unwrap();
    assert!((r.q_numeric - 0.25).abs() < 1e-6);
    assert_eq!(r.report.peak_weighted, 5);
    assert_eq!(r.analytic.peak_weighted, 5);
}

#[test]
fn pipeline_propagates_solver_errors() {
    let sg = SgParams {
        t_final: 50.0,
        ..SgParams::default()
    };
    assert!(end_to_end(1.0, &sg, 5, 0, 0).is_err());
}
