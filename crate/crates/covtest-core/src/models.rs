//! Covariance families, class membership functionals, factorization, and
//! whitening.
//!
//! All families are correlation-normalized: unit diagonal, symmetric.
//! Positive definiteness is validated (by [`cholesky`]) and never repaired;
//! a non-PD parameter choice is an error, not something to jitter away.

use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::rand_core::RngCore;
use serde::Serialize;

use crate::linalg::{self, Matrix};
use crate::params;
use crate::sampler::SeedSpec;
use crate::statistic::Sample;
use crate::{fm, Error, Result};

/// Symmetric pattern of signs u_ij in {-1, +1} on the first `band` diagonal
/// offsets, zero on the diagonal. Offsets beyond the stored band read +1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignMatrix {
    p: usize,
    band: usize,
    signs: Vec<Vec<i8>>,
}

impl SignMatrix {
    fn from_fill(p: usize, band: usize, mut fill: impl FnMut() -> i8) -> SignMatrix {
        let band = band.min(p.saturating_sub(1));
        let signs = (1..=band)
            .map(|d| (0..p - d).map(|_| fill()).collect())
            .collect();
        SignMatrix { p, band, signs }
    }

    /// Every in-band sign +1 (the extremal prior's canonical pattern).
    pub fn all_plus(p: usize, band: usize) -> SignMatrix {
        SignMatrix::from_fill(p, band, || 1)
    }

    /// Independent fair signs drawn from the seeded stream, fixed order:
    /// offset 1 first, then offset 2, each left to right.
    pub fn random(p: usize, band: usize, seed: &SeedSpec) -> SignMatrix {
        let mut rng = crate::sampler::rng(seed);
        SignMatrix::from_fill(p, band, || if rng.next_u64() & 1 == 0 { 1 } else { -1 })
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    /// Largest stored offset.
    #[inline]
    pub fn band(&self) -> usize {
        self.band
    }

    /// u_ij: 0 on the diagonal, the stored sign within the band, +1 beyond.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let d = i.abs_diff(j);
        if d <= self.band {
            f64::from(self.signs[d - 1][i.min(j)])
        } else {
            1.0
        }
    }
}

/// The covariance families used as null and alternatives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CovarianceModel {
    Identity,
    /// Off-diagonal |i-j|^(-3/2) (i+j)^(1/100) / M with one-based labels.
    PowerDecay { m: f64 },
    /// rho on the first off-diagonal.
    Tridiagonal { rho: f64 },
    /// The hardest-to-detect correlation at radius phi in the (alpha, L)
    /// class: entries u_ij sqrt(lambda (1 - (|i-j|/T)^(2 alpha))) within the
    /// band, with a free sign pattern (all +1 when absent).
    ExtremalPrior {
        alpha: f64,
        ell: f64,
        phi: f64,
        signs: Option<SignMatrix>,
    },
    Explicit { matrix: Matrix },
}

/// Band and entry magnitudes of the extremal prior: the band is the
/// theoretical T (never clamped to p), so truncating to a small p keeps the
/// surviving entries' values.
struct PriorShape {
    band: usize,
    lambda: f64,
    two_alpha: f64,
}

impl PriorShape {
    fn new(alpha: f64, ell: f64, phi: f64) -> Result<PriorShape> {
        let rc = params::constants(alpha, ell)?;
        if !(phi > 0.0) || !phi.is_finite() {
            return Err(Error::Domain(String::from("phi must be finite and positive")));
        }
        let band = params::raw_band(&rc, phi)?;
        let lambda = rc.c_lambda * fm::powf(phi, (2.0 * alpha + 1.0) / alpha);
        Ok(PriorShape { band, lambda, two_alpha: 2.0 * alpha })
    }

    /// sqrt(lambda (1 - (d/T)^(2 alpha)))_+, zero at and beyond the band.
    fn magnitude(&self, d: usize) -> f64 {
        if d == 0 || d >= self.band {
            return 0.0;
        }
        let frac = 1.0 - fm::powf(d as f64 / self.band as f64, self.two_alpha);
        if frac <= 0.0 {
            0.0
        } else {
            fm::sqrt(self.lambda * frac)
        }
    }
}

fn check_signs(signs: &SignMatrix, p: usize, band: usize) -> Result<()> {
    if signs.p != p {
        return Err(Error::DimensionMismatch { expected: p, got: signs.p });
    }
    // every nonzero offset (d up to band - 1, capped by the matrix) must
    // carry an explicit sign
    let needed = core::cmp::min(band.saturating_sub(1), p - 1);
    if signs.band < needed {
        return Err(Error::Domain(String::from(
            "sign matrix band does not cover the prior's band",
        )));
    }
    Ok(())
}

fn power_decay_entry(i: usize, j: usize, m: f64) -> f64 {
    if i == j {
        return 1.0;
    }
    let d = i.abs_diff(j) as f64;
    // (i + j + 2) is the one-based label sum
    fm::powf(d, -1.5) * fm::powf((i + j + 2) as f64, 0.01) / m
}

/// Materializes a model as a dense p x p matrix.
pub fn build(model: &CovarianceModel, p: usize) -> Result<Matrix> {
    if p < 2 {
        return Err(Error::Domain(String::from("covariance needs p >= 2")));
    }
    match model {
        CovarianceModel::Identity => Ok(Matrix::identity(p)),
        CovarianceModel::PowerDecay { m } => {
            if !(*m > 0.0) || !m.is_finite() {
                return Err(Error::Domain(String::from("M must be finite and positive")));
            }
            Ok(Matrix::from_fn(p, |i, j| power_decay_entry(i, j, *m)))
        }
        CovarianceModel::Tridiagonal { rho } => {
            if !rho.is_finite() {
                return Err(Error::Domain(String::from("rho must be finite")));
            }
            Ok(Matrix::from_fn(p, |i, j| {
                if i == j {
                    1.0
                } else if i.abs_diff(j) == 1 {
                    *rho
                } else {
                    0.0
                }
            }))
        }
        CovarianceModel::ExtremalPrior { alpha, ell, phi, signs } => {
            let shape = PriorShape::new(*alpha, *ell, *phi)?;
            if let Some(s) = signs {
                check_signs(s, p, shape.band)?;
            }
            Ok(Matrix::from_fn(p, |i, j| {
                if i == j {
                    return 1.0;
                }
                let mag = shape.magnitude(i.abs_diff(j));
                if mag == 0.0 {
                    0.0
                } else {
                    signs.as_ref().map_or(1.0, |s| s.get(i, j)) * mag
                }
            }))
        }
        CovarianceModel::Explicit { matrix } => {
            if matrix.p() != p {
                return Err(Error::DimensionMismatch { expected: p, got: matrix.p() });
            }
            if !matrix.is_symmetric(0.0) {
                return Err(Error::Domain(String::from("explicit covariance must be symmetric")));
            }
            for i in 0..p {
                if fm::abs(matrix.get(i, i) - 1.0) > 1e-12 {
                    return Err(Error::Domain(String::from(
                        "explicit covariance must have unit diagonal",
                    )));
                }
            }
            Ok(matrix.clone())
        }
    }
}

/// Where a correlation matrix sits relative to the smoothness class
/// (alpha, L) and the detection radius phi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassReport {
    /// (1/p) sum_{i<j} sigma_ij^2.
    pub energy: f64,
    /// (1/p) sum_{i<j} sigma_ij^2 |i-j|^(2 alpha).
    pub sobolev: f64,
    /// sobolev <= L.
    pub in_f: bool,
    /// in_f and energy >= phi^2.
    pub in_q: bool,
    /// Gershgorin lower bound 1 - max_i sum_{j != i} |sigma_ij| on the
    /// smallest eigenvalue; positive certifies positive definiteness.
    pub min_eig_lb: f64,
}

fn check_class_args(alpha: f64, ell: f64, phi: f64) -> Result<()> {
    params::constants(alpha, ell)?;
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(Error::Domain(String::from("phi must be finite and positive")));
    }
    Ok(())
}

fn finish_report(
    energy_sum: f64,
    sobolev_sum: f64,
    max_row: f64,
    p: usize,
    ell: f64,
    phi: f64,
) -> ClassReport {
    let energy = energy_sum / p as f64;
    let sobolev = sobolev_sum / p as f64;
    let in_f = sobolev <= ell;
    ClassReport {
        energy,
        sobolev,
        in_f,
        in_q: in_f && energy >= phi * phi,
        min_eig_lb: 1.0 - max_row,
    }
}

/// Class functionals of an explicit correlation matrix.
pub fn class_report(sigma: &Matrix, alpha: f64, ell: f64, phi: f64) -> Result<ClassReport> {
    check_class_args(alpha, ell, phi)?;
    let p = sigma.p();
    if p < 2 {
        return Err(Error::Domain(String::from("class functionals need p >= 2")));
    }
    if !sigma.is_symmetric(0.0) {
        return Err(Error::Domain(String::from("sigma must be symmetric")));
    }
    for i in 0..p {
        if fm::abs(sigma.get(i, i) - 1.0) > 1e-12 {
            return Err(Error::NotCorrelation { index: i });
        }
    }
    let dpow: Vec<f64> = (0..p)
        .map(|d| if d == 0 { 0.0 } else { fm::powf(d as f64, 2.0 * alpha) })
        .collect();
    let mut energy = 0.0;
    let mut sobolev = 0.0;
    let mut max_row = 0.0f64;
    for i in 0..p {
        let row = sigma.row(i);
        let mut row_sum = 0.0;
        for (j, &s) in row.iter().enumerate() {
            if j != i {
                row_sum += fm::abs(s);
            }
            if j > i {
                let s2 = s * s;
                energy += s2;
                sobolev += s2 * dpow[j - i];
            }
        }
        max_row = max_row.max(row_sum);
    }
    Ok(finish_report(energy, sobolev, max_row, p, ell, phi))
}

/// Class functionals of a model at dimension p, computed without
/// materializing the matrix (banded families cost O(p T), PowerDecay
/// O(p^2) time but O(p) space).
pub fn model_report(
    model: &CovarianceModel,
    p: usize,
    alpha: f64,
    ell: f64,
    phi: f64,
) -> Result<ClassReport> {
    if p < 2 {
        return Err(Error::Domain(String::from("class functionals need p >= 2")));
    }
    check_class_args(alpha, ell, phi)?;
    match model {
        CovarianceModel::Explicit { matrix } => {
            if matrix.p() != p {
                return Err(Error::DimensionMismatch { expected: p, got: matrix.p() });
            }
            class_report(matrix, alpha, ell, phi)
        }
        CovarianceModel::Identity => {
            Ok(finish_report(0.0, 0.0, 0.0, p, ell, phi))
        }
        CovarianceModel::Tridiagonal { rho } => {
            if !rho.is_finite() {
                return Err(Error::Domain(String::from("rho must be finite")));
            }
            let r2 = rho * rho;
            let energy_sum = (p - 1) as f64 * r2;
            // the single nonzero offset sits at distance 1, so the
            // smoothness weight is 1 for every alpha
            let max_row = if p >= 3 { 2.0 * fm::abs(*rho) } else { fm::abs(*rho) };
            Ok(finish_report(energy_sum, energy_sum, max_row, p, ell, phi))
        }
        CovarianceModel::PowerDecay { m } => {
            if !(*m > 0.0) || !m.is_finite() {
                return Err(Error::Domain(String::from("M must be finite and positive")));
            }
            let dpow: Vec<f64> = (0..p)
                .map(|d| if d == 0 { 0.0 } else { fm::powf(d as f64, 2.0 * alpha) })
                .collect();
            let mut energy = 0.0;
            let mut sobolev = 0.0;
            let mut max_row = 0.0f64;
            for i in 0..p {
                let mut row_sum = 0.0;
                for j in 0..p {
                    if j == i {
                        continue;
                    }
                    let e = power_decay_entry(i, j, 1.0);
                    row_sum += e;
                    if j > i {
                        let s2 = e * e;
                        energy += s2;
                        sobolev += s2 * dpow[j - i];
                    }
                }
                max_row = max_row.max(row_sum);
            }
            Ok(finish_report(energy / (m * m), sobolev / (m * m), max_row / m, p, ell, phi))
        }
        CovarianceModel::ExtremalPrior { alpha: pa, ell: pl, phi: pp, signs } => {
            let shape = PriorShape::new(*pa, *pl, *pp)?;
            if let Some(s) = signs {
                check_signs(s, p, shape.band)?;
            }
            let max_off = core::cmp::min(shape.band.saturating_sub(1), p - 1);
            let mags: Vec<f64> = (1..=max_off).map(|d| shape.magnitude(d)).collect();
            let mut energy = 0.0;
            let mut sobolev = 0.0;
            for (k, a) in mags.iter().enumerate() {
                let d = k + 1;
                let a2 = a * a;
                energy += (p - d) as f64 * a2;
                sobolev += (p - d) as f64 * a2 * fm::powf(d as f64, 2.0 * alpha);
            }
            let mut max_row = 0.0f64;
            for i in 0..p {
                let mut row_sum = 0.0;
                for (k, a) in mags.iter().enumerate() {
                    let d = k + 1;
                    let neighbors = usize::from(i >= d) + usize::from(i + d < p);
                    row_sum += neighbors as f64 * a;
                }
                max_row = max_row.max(row_sum);
            }
            Ok(finish_report(energy, sobolev, max_row, p, ell, phi))
        }
    }
}

/// Root energy of the PowerDecay family at dimension p: the x-axis of
/// power curves. Scales exactly as 1/M.
pub fn power_decay_psi(p: usize, m: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::Domain(String::from("psi needs p >= 2")));
    }
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Domain(String::from("M must be finite and positive")));
    }
    let mut unit = 0.0;
    for i in 0..p {
        for j in (i + 1)..p {
            let e = power_decay_entry(i, j, 1.0);
            unit += e * e;
        }
    }
    Ok(fm::sqrt(unit / p as f64) / m)
}

/// Lower Cholesky factor; fails with the pivot index on a non-PD matrix.
pub fn cholesky(sigma: &Matrix) -> Result<Matrix> {
    if !sigma.is_symmetric(0.0) {
        return Err(Error::Domain(String::from("sigma must be symmetric")));
    }
    linalg::cholesky_lower(sigma)
}

/// Rescales each observation by the inverse Cholesky factor of sigma0:
/// rows z solve L z = x. If the data has covariance sigma0, the result has
/// identity covariance. sigma0 = I returns the sample unchanged bit for bit.
pub fn whiten(sample: &Sample, sigma0: &Matrix) -> Result<Sample> {
    if sigma0.p() != sample.p() {
        return Err(Error::DimensionMismatch { expected: sample.p(), got: sigma0.p() });
    }
    let l = cholesky(sigma0)?;
    let mut data = Vec::with_capacity(sample.n() * sample.p());
    for k in 0..sample.n() {
        let mut x = sample.row(k).to_vec();
        linalg::forward_solve_in_place(&l, &mut x);
        data.extend_from_slice(&x);
    }
    Ok(Sample::from_raw(sample.n(), sample.p(), data))
}

/// Radius at which the direct test decides the inverse-covariance problem:
/// phi = lambda_min * psi, for a known smallest eigenvalue in (0, 1].
pub fn inverse_test_radius(psi: f64, lambda_min: f64) -> Result<f64> {
    if !(psi > 0.0) || !psi.is_finite() {
        return Err(Error::Domain(String::from("psi must be finite and positive")));
    }
    if !(lambda_min > 0.0 && lambda_min <= 1.0) {
        return Err(Error::Domain(String::from("lambda_min must lie in (0, 1]")));
    }
    Ok(lambda_min * psi)
}
