//! Testing whether high-dimensional Gaussian data has identity covariance.
//!
//! The test statistic is a degenerate order-2 pair statistic: it averages
//! weighted products of cross moments over pairs of observations, with
//! weights supported on the first `T` diagonals of the covariance and tuned
//! to a smoothness class of correlation matrices. Everything here is pure
//! computation:
//!
//! - [`params`]: closed-form constants, banded weight profiles, separation
//!   rates, thresholds, and the grid for the smoothness-free test.
//! - [`statistic`]: the fast banded kernel, a brute-force reference
//!   evaluator, and the unweighted full-band baseline.
//! - [`models`]: covariance families, class functionals, Cholesky factors,
//!   and whitening.
//! - [`sampler`]: deterministic seeded Gaussian sampling.
//! - [`procedures`]: fixed-threshold decisions, Monte Carlo calibration,
//!   and the adaptive test.
//!
//! The crate is `no_std`-compatible (alloc required). The `std` feature only
//! routes exactly-rounded operations to hardware; results are bit-identical
//! either way.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod dist;
mod error;
mod fm;
pub mod linalg;
pub mod models;
pub mod params;
pub mod procedures;
pub mod sampler;
pub mod statistic;

pub use error::Error;

/// Crate result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Crate version, echoed into report metadata by downstream tools.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
