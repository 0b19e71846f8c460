//! Compares the naive and weighted counting rules with the Born rule.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::branching::{closed_form, sample_histories, BranchConfig, BranchError, HistoryTally, Mode};
use crate::combinatorics::CompensatedSum;
use crate::dynamics::{
    diagnostics, evolve, extract_branch_amplitudes, init_packet, DynamicsError, SgParams, SplitDiagnostics,
};
use crate::spin::{clamp_weight, make_skew_state, skew_born_weight, SpinError};

/// Fewest samples accepted by [`born_convergence`].
pub const MIN_SAMPLES: usize = 100;

/// Monte-Carlo error bars are quoted at this many standard errors.
pub const ERROR_BAR_SIGMAS: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error("at least {MIN_SAMPLES} samples are required, got {0}")]
    TooFewSamples(usize),
}

/// Half the L1 distance between two distributions on the same support.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "distributions must share a support");
    0.5 * a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .collect::<CompensatedSum>()
        .value()
}

pub fn total_variation_exact(a: &[BigRational], b: &[BigRational]) -> BigRational {
    assert_eq!(a.len(), b.len(), "distributions must share a support");
    let sum = a
        .iter()
        .zip(b)
        .fold(BigRational::zero(), |acc, (x, y)| acc + (x - y).abs());
    sum / BigRational::from_integer(2.into())
}

/// Exact normalized distribution `counts / total`.
pub fn normalize_exact(tally: &HistoryTally) -> Option<Vec<BigRational>> {
    let counts = tally.exact_counts()?;
    let total = tally.total_exact()?;
    Some(counts.iter().map(|c| c / &total).collect())
}

/// Sampled plus-count statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSummary {
    pub samples: usize,
    pub seed: u64,
    /// Fraction of histories with `p` pluses.
    pub distribution: Vec<f64>,
    /// Fraction of all individual outcomes that were plus.
    pub plus_frequency: f64,
    /// `3·sqrt(q(1−q)/(S·N))`
    pub plus_frequency_error: f64,
    /// `|plus_frequency − q|`
    pub plus_frequency_deviation: f64,
    /// `3·sqrt(P(1−P)/S)` for each predicted `P(p)`.
    pub distribution_error: Vec<f64>,
    /// Largest `|empirical(p) − predicted(p)|`.
    pub max_distribution_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionReport {
    pub theta: f64,
    pub q: f64,
    pub runs: u32,
    /// Weighted-rule distribution `N(p)/2^N`.
    pub predicted: Vec<f64>,
    /// Naive-rule distribution `C(N,p)/2^N`.
    pub naive: Vec<f64>,
    pub tv_naive_weighted: f64,
    pub peak_weighted: usize,
    pub peak_naive: usize,
    /// `N·q`
    pub born_peak: f64,
    pub narratives_disagree: bool,
    pub empirical: Option<EmpiricalSummary>,
}

fn report_for_weight(runs: u32, theta: f64, q: f64) -> Result<DistributionReport, AnalysisError> {
    let weighted = closed_form(&BranchConfig::new(runs, q, Mode::Weighted)?);
    let naive = closed_form(&BranchConfig::naive(runs)?);
    let predicted = weighted.normalized().to_vec();
    let naive_dist = naive.normalized().to_vec();
    let peak_weighted = weighted.peak();
    let peak_naive = naive.peak();
    Ok(DistributionReport {
        theta,
        q,
        runs,
        tv_naive_weighted: total_variation(&predicted, &naive_dist),
        predicted,
        naive: naive_dist,
        peak_weighted,
        peak_naive,
        born_peak: runs as f64 * q,
        narratives_disagree: peak_weighted != peak_naive,
        empirical: None,
    })
}

/// Weighted and naive distributions for a spin at angle `theta`.
pub fn compare_narratives(runs: u32, theta: f64) -> Result<DistributionReport, AnalysisError> {
    report_for_weight(runs, theta, skew_born_weight(theta)?)
}

fn empirical(report: &DistributionReport, samples: usize, seed: u64) -> Result<EmpiricalSummary, AnalysisError> {
    let config = BranchConfig::new(report.runs, report.q, Mode::Weighted)?;
    let histories = sample_histories(&config, samples, seed)?;
    let n = report.runs as usize;
    let mut bins = vec![0usize; n + 1];
    let mut pluses = 0usize;
    for h in &histories {
        bins[h.plus_count()] += 1;
        pluses += h.plus_count();
    }
    let s = samples as f64;
    let distribution: Vec<f64> = bins.iter().map(|&b| b as f64 / s).collect();
    let plus_frequency = pluses as f64 / (s * n as f64);
    let q = report.q;
    let max_distribution_deviation = distribution
        .iter()
        .zip(&report.predicted)
        .map(|(e, p)| (e - p).abs())
        .fold(0.0, f64::max);
    Ok(EmpiricalSummary {
        samples,
        seed,
        plus_frequency,
        plus_frequency_error: ERROR_BAR_SIGMAS * (q * (1.0 - q) / (s * n as f64)).sqrt(),
        plus_frequency_deviation: (plus_frequency - q).abs(),
        distribution_error: report
            .predicted
            .iter()
            .map(|p| ERROR_BAR_SIGMAS * (p * (1.0 - p) / s).sqrt())
            .collect(),
        max_distribution_deviation,
        distribution,
    })
}

/// [`compare_narratives`] plus sampled observer histories.
pub fn born_convergence(theta: f64, runs: u32, samples: usize, seed: u64) -> Result<DistributionReport, AnalysisError> {
    if samples < MIN_SAMPLES {
        return Err(AnalysisError::TooFewSamples(samples));
    }
    let mut report = compare_narratives(runs, theta)?;
    report.empirical = Some(empirical(&report, samples, seed)?);
    Ok(report)
}

/// Result of running the wavepacket simulation and feeding its measured
/// Born weight into the branch counting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndToEndReport {
    /// Report built from the simulated weight.
    pub report: DistributionReport,
    /// Same report built from `cos²(θ/2)`.
    pub analytic: DistributionReport,
    pub q_numeric: f64,
    pub q_analytic: f64,
    pub q_deviation: f64,
    /// Largest entry-wise difference between the two predicted distributions.
    pub max_distribution_deviation: f64,
    pub t_reached: f64,
    pub final_diagnostics: SplitDiagnostics,
}

/// Simulates the spin at angle `theta` through the field, reads the Born
/// weight off the plus population and builds the branch report from it.
/// `samples = 0` skips sampling.
pub fn end_to_end(
    theta: f64,
    sg: &SgParams,
    runs: u32,
    samples: usize,
    seed: u64,
) -> Result<EndToEndReport, AnalysisError> {
    let spin = make_skew_state(theta)?;
    let state = init_packet(&spin, sg.sigma0, sg)?;
    let state = evolve(state, sg, sg.t_final)?;
    let (q_plus, _) = extract_branch_amplitudes(&state);
    let q_numeric = clamp_weight(q_plus)?;
    let q_analytic = skew_born_weight(theta)?;

    let mut report = report_for_weight(runs, theta, q_numeric)?;
    if samples > 0 {
        report.empirical = Some(empirical(&report, samples, seed)?);
    }
    let analytic = report_for_weight(runs, theta, q_analytic)?;
    let max_distribution_deviation = report
        .predicted
        .iter()
        .zip(&analytic.predicted)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    Ok(EndToEndReport {
        q_deviation: (q_numeric - q_analytic).abs(),
        q_numeric,
        q_analytic,
        max_distribution_deviation,
        t_reached: state.time(),
        final_diagnostics: diagnostics(&state),
        report,
        analytic,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    use super::*;

    #[test]
    fn right_angle_agrees_with_naive() {
        for n in [1, 2, 10, 33, 100] {
            let r = compare_narratives(n, FRAC_PI_2).unwrap();
            assert_eq!(r.tv_naive_weighted, 0.0);
            assert_eq!(r.peak_weighted, r.peak_naive);
            assert!(!r.narratives_disagree);
        }
    }

    #[test]
    fn sixty_degrees_disagrees() {
        let r = compare_narratives(20, FRAC_PI_3).unwrap();
        assert_eq!(r.peak_weighted, 15);
        assert_eq!(r.peak_naive, 10);
        assert!(r.narratives_disagree);
        assert!((r.born_peak - 15.0).abs() < 1e-12);
    }

    #[test]
    fn aligned_spin_is_point_mass() {
        let r = compare_narratives(10, 0.0).unwrap();
        assert_eq!(r.q, 1.0);
        assert_eq!(r.predicted[10], 1.0);
        assert!(r.predicted[..10].iter().all(|&p| p == 0.0));
        assert!((r.tv_naive_weighted - 1023.0 / 1024.0).abs() < 1e-15);
    }

    #[test]
    fn distributions_sum_to_one() {
        for theta in [0.0, 0.4, FRAC_PI_3, 2.0, PI] {
            let r = compare_narratives(37, theta).unwrap();
            let s: f64 = r.predicted.iter().sum();
            let t: f64 = r.naive.iter().sum();
            assert!((s - 1.0).abs() < 1e-9 && (t - 1.0).abs() < 1e-9);
            assert!((0.0..=1.0).contains(&r.tv_naive_weighted));
        }
    }

    #[test]
    fn tv_grows_away_from_half() {
        let mut last = -1.0;
        for i in 0..10 {
            let q = 0.5 + 0.05 * i as f64;
            let r = report_for_weight(12, 0.0, q).unwrap();
            assert!(r.tv_naive_weighted >= last, "q = {q}");
            if i > 0 {
                assert!(r.tv_naive_weighted > 0.0);
            }
            last = r.tv_naive_weighted;
        }
    }

    #[test]
    fn exact_tv_vanishes_only_at_half() {
        let naive = normalize_exact(&closed_form(&BranchConfig::naive(9).unwrap())).unwrap();
        for (n, d) in [(0, 1), (1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (1, 1)] {
            let q = BigRational::new(n.into(), d.into());
            let cfg = BranchConfig::with_exact_q(9, q, Mode::Weighted).unwrap();
            let weighted = normalize_exact(&closed_form(&cfg)).unwrap();
            let tv = total_variation_exact(&weighted, &naive);
            assert_eq!(tv.is_zero(), (n, d) == (1, 2));
        }
    }

    #[test]
    fn convergence_needs_samples() {
        assert_eq!(born_convergence(0.3, 5, 99, 1), Err(AnalysisError::TooFewSamples(99)));
    }

    #[test]
    fn aligned_convergence_is_exact() {
        let r = born_convergence(0.0, 10, 1000, 5).unwrap();
        let e = r.empirical.unwrap();
        assert_eq!(e.plus_frequency, 1.0);
        assert_eq!(e.distribution[10], 1.0);
    }
}
