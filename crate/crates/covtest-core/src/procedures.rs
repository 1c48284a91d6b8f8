//! Decision rules: the fixed-threshold test, Monte Carlo calibration of the
//! threshold, and the smoothness-free grid test.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::params::{AdaptiveGrid, WeightProfile};
use crate::sampler::{self, SeedSpec};
use crate::statistic::{self, OutcomeMeta, Sample, TestOutcome};
use crate::{fm, Error, Result};

fn profile_label(profile: &WeightProfile) -> String {
    format!(
        "alpha={} L={} phi={} T={}",
        profile.alpha, profile.ell, profile.phi, profile.band
    )
}

/// Rejects when the statistic strictly exceeds t; a tie accepts.
pub fn delta_test(sample: &Sample, profile: &WeightProfile, t: f64) -> Result<TestOutcome> {
    if !t.is_finite() {
        return Err(Error::Domain(String::from("threshold must be finite")));
    }
    let value = statistic::dstat(sample, profile)?;
    Ok(TestOutcome {
        value,
        standardized: statistic::standardize(value, sample.n(), sample.p()),
        threshold: t,
        reject: value > t,
        meta: OutcomeMeta {
            n: sample.n(),
            p: sample.p(),
            profile: profile_label(profile),
            seed: None,
            grid_index: None,
            margin: None,
        },
    })
}

/// The statistic on one fresh null sample (identity covariance).
pub fn null_statistic(profile: &WeightProfile, n: usize, seed: &SeedSpec) -> Result<f64> {
    let sample = sampler::sample_standard(n, profile.p, seed)?;
    statistic::dstat(&sample, profile)
}

/// An empirically calibrated threshold and the draws behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub level: f64,
    #[serde(rename = "B")]
    pub replicates: usize,
    pub threshold: f64,
    /// The B null statistics, sorted ascending.
    #[serde(skip)]
    pub trace: Vec<f64>,
    pub seed: SeedSpec,
}

/// Upper order statistic of the sorted null draws: entry ceil((1-level) B),
/// one-based. The product is nudged down one part in 10^12 first so exact
/// integers are not pushed up a rank by representation noise.
pub fn calibration_threshold(sorted: &[f64], level: f64) -> f64 {
    let b = sorted.len() as f64;
    let k = fm::ceil((1.0 - level) * b * (1.0 - 1e-12)) as usize;
    sorted[k - 1]
}

/// Simulates B null statistics at the profile's p and picks the
/// order-statistic threshold for the requested level. Replicate j draws
/// from the seed's replicate + j substream, so a disjoint replicate range
/// (or experiment label) guarantees fresh data for evaluation.
pub fn calibrate(
    profile: &WeightProfile,
    n: usize,
    level: f64,
    replicates: usize,
    seed: &SeedSpec,
) -> Result<Calibration> {
    if replicates < 100 {
        return Err(Error::Domain(String::from("calibration needs at least 100 replicates")));
    }
    if !(level > 0.0 && level < 0.5) {
        return Err(Error::Domain(String::from("level must lie in (0, 1/2)")));
    }
    if n < 2 {
        return Err(Error::Domain(String::from("calibration needs n >= 2")));
    }
    let mut draws = Vec::with_capacity(replicates);
    for j in 0..replicates {
        let spec = seed.with_replicate(seed.replicate + j as u64);
        draws.push(null_statistic(profile, n, &spec)?);
    }
    draws.sort_by(f64::total_cmp);
    let threshold = calibration_threshold(&draws, level);
    Ok(Calibration {
        level,
        replicates,
        threshold,
        trace: draws,
        seed: *seed,
    })
}

/// Runs every grid profile on one set of shared cross moments (band = the
/// widest profile) and rejects when any statistic strictly exceeds
/// c_star times its raw threshold. The outcome records the deciding grid
/// point (largest margin, one-based) and that margin.
pub fn adaptive_test(sample: &Sample, grid: &AdaptiveGrid) -> Result<TestOutcome> {
    if grid.p != sample.p() {
        return Err(Error::DimensionMismatch { expected: grid.p, got: sample.p() });
    }
    if grid.n != sample.n() {
        return Err(Error::Domain(String::from("grid was built for a different n")));
    }
    let max_band = grid
        .points
        .iter()
        .map(|pt| pt.profile.band)
        .max()
        .ok_or_else(|| Error::Domain(String::from("grid has no points")))?;
    let cp = statistic::cross_products(sample, max_band);
    let sums = cp.pair_sums();
    let mut best: Option<(usize, f64, f64, f64)> = None;
    for (idx, pt) in grid.points.iter().enumerate() {
        let value = statistic::combine_pair_sums(
            &sums,
            |d| pt.profile.weight(d),
            sample.n(),
            sample.p(),
        );
        let threshold = grid.c_star * pt.t;
        let margin = value - threshold;
        let better = best.map_or(true, |(_, m, _, _)| margin > m);
        if better {
            best = Some((idx, margin, value, threshold));
        }
    }
    let (idx, margin, value, threshold) = best.expect("grid checked nonempty");
    Ok(TestOutcome {
        value,
        standardized: statistic::standardize(value, sample.n(), sample.p()),
        threshold,
        reject: margin > 0.0,
        meta: OutcomeMeta {
            n: sample.n(),
            p: sample.p(),
            profile: format!(
                "adaptive alpha in [{}, {}], {} points",
                grid.alpha_lo, grid.alpha_hi, grid.points.len()
            ),
            seed: None,
            grid_index: Some(idx + 1),
            margin: Some(margin),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params;
    use alloc::vec;

    #[test]
    fn ties_accept() {
        let prof = params::profile(1.0, 1.0, 0.9, 4, true).unwrap();
        // sparse rows make the statistic exactly zero
        let s = Sample::from_rows(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 2.0, 0.0, 0.0]])
            .unwrap();
        let at_zero = delta_test(&s, &prof, 0.0).unwrap();
        assert_eq!(at_zero.value, 0.0);
        assert!(!at_zero.reject);
        let above = delta_test(&s, &prof, -0.25).unwrap();
        assert!(above.reject);
    }

    #[test]
    fn threshold_rank_convention() {
        // 1000 synthetic draws 1..=1000: level 0.05 picks the 950th
        let sorted: Vec<f64> = (1..=1000).map(|v| v as f64).collect();
        assert_eq!(calibration_threshold(&sorted, 0.05), 950.0);
        let small: Vec<f64> = (1..=100).map(|v| v as f64).collect();
        assert_eq!(calibration_threshold(&small, 0.25), 75.0);
    }

    #[test]
    fn rejection_is_monotone_in_threshold() {
        let prof = params::profile(1.0, 1.0, 0.4, 12, true).unwrap();
        let s = sampler::sample_standard(6, 12, &SeedSpec::new(3, 0, 0)).unwrap();
        let value = statistic::dstat(&s, &prof).unwrap();
        let lo = delta_test(&s, &prof, value - 1.0).unwrap();
        let hi = delta_test(&s, &prof, value + 1.0).unwrap();
        assert!(lo.reject);
        assert!(!hi.reject);
    }
}
