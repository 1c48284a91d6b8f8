//! Monte Carlo experiment harness on top of `covtest-core`.
//!
//! The core crate knows how to compute the statistic, build covariance
//! models, and calibrate thresholds; this crate turns those pieces into
//! reproducible studies: power curves over a model grid, paired test
//! comparisons on common random numbers, null-distribution diagnostics,
//! and a CSV/JSON reporting layer shared with the `covtest` binary.

pub mod experiments;
pub mod report;

pub use experiments::{
    calibrate_par, run_adaptive_study, run_comparison, run_null_diagnostics, run_power_curve,
    run_rate_sweep, ExperimentConfig, ExperimentReport, HarnessError, ReportRow, Scenario,
};

/// Binomial half width 1.96 sqrt(p(1-p)/B) used for every rejection-rate row.
pub fn binomial_half_width(rate: f64, b: usize) -> f64 {
    1.96 * (rate * (1.0 - rate) / b as f64).sqrt()
}
