//! The banded pair statistic.
//!
//! For a sample X of n rows in R^p and weights w_d on diagonal offsets d,
//! the statistic is
//!
//! ```text
//! D = 1/(n (n-1) p) * sum_d w_d * sum_i sum_{k != l} X_{k,i} X_{k,i+d} X_{l,i} X_{l,i+d}
//! ```
//!
//! The inner pair sum collapses through sum_{k != l} a_k a_l = (sum a)^2 -
//! sum a^2, so one pass over the data gives every diagonal's contribution in
//! O(n p T) time. [`dstat_naive`] keeps the literal quadruple loop as a
//! reference evaluator.

use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::linalg::Matrix;
use crate::params::WeightProfile;
use crate::{fm, Error, Result};

/// An n x p data matrix with finite entries, rows are observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl Sample {
    /// Wraps a row-major buffer of n rows by p columns.
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Result<Sample> {
        if n == 0 || p < 2 {
            return Err(Error::Domain(String::from("sample needs n >= 1 and p >= 2")));
        }
        if data.len() != n * p {
            return Err(Error::DimensionMismatch { expected: n * p, got: data.len() });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(String::from("sample entries must be finite")));
        }
        Ok(Sample { n, p, data })
    }

    /// Builds a sample from equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Sample> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Domain(String::from("sample needs at least one row")));
        }
        let p = rows[0].len();
        let mut data = Vec::with_capacity(n * p);
        for row in rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch { expected: p, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Sample::new(n, p, data)
    }

    /// Trusted constructor for internally generated (finite) data.
    pub(crate) fn from_raw(n: usize, p: usize, data: Vec<f64>) -> Sample {
        debug_assert_eq!(data.len(), n * p);
        Sample { n, p, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    /// Observation k as a slice of length p.
    #[inline]
    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.p..(k + 1) * self.p]
    }

    /// Gram entry over observations: sum_k X_{k,i} X_{k,j}. Allows i = j.
    pub fn cross_product(&self, i: usize, j: usize) -> f64 {
        (0..self.n).map(|k| self.row(k)[i] * self.row(k)[j]).sum()
    }

    /// Rows reordered by `perm` (a permutation of 0..n).
    pub fn permuted_rows(&self, perm: &[usize]) -> Result<Sample> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: perm.len() });
        }
        let mut data = Vec::with_capacity(self.n * self.p);
        for &k in perm {
            if k >= self.n {
                return Err(Error::Domain(String::from("permutation index out of range")));
            }
            data.extend_from_slice(self.row(k));
        }
        Ok(Sample { n: self.n, p: self.p, data })
    }
}

/// Neumaier compensated accumulator: tracks the rounding error of every add
/// so structural cancellation (large positive terms against large negative
/// ones) does not erode the total.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if fm::abs(self.sum) >= fm::abs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Per-pair cross moments W_{i,i+d} = sum_k X_{k,i} X_{k,i+d} and
/// Q_{i,i+d} = sum_k (X_{k,i} X_{k,i+d})^2, for offsets 1..band (exclusive),
/// computed in one pass over the data.
#[derive(Debug, Clone)]
pub struct BandedCrossProducts {
    n: usize,
    p: usize,
    w_sums: Vec<Vec<f64>>,
    q_sums: Vec<Vec<f64>>,
}

/// Accumulates W and Q for every diagonal offset below `band` (and below p).
pub fn cross_products(sample: &Sample, band: usize) -> BandedCrossProducts {
    let p = sample.p;
    let max_off = core::cmp::min(band.saturating_sub(1), p - 1);
    let mut w_sums: Vec<Vec<f64>> =
        (1..=max_off).map(|d| alloc::vec![0.0; p - d]).collect();
    let mut q_sums = w_sums.clone();
    for d in 1..=max_off {
        let ws = &mut w_sums[d - 1];
        let qs = &mut q_sums[d - 1];
        for k in 0..sample.n {
            let row = sample.row(k);
            for i in 0..p - d {
                let prod = row[i] * row[i + d];
                ws[i] += prod;
                qs[i] += prod * prod;
            }
        }
    }
    BandedCrossProducts { n: sample.n, p, w_sums, q_sums }
}

impl BandedCrossProducts {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    /// Largest offset with stored moments.
    #[inline]
    pub fn max_offset(&self) -> usize {
        self.w_sums.len()
    }

    /// W_{i,i+d} for 1 <= d <= max_offset.
    #[inline]
    pub fn w_entry(&self, i: usize, d: usize) -> f64 {
        self.w_sums[d - 1][i]
    }

    /// sum_i (W_{i,i+d}^2 - Q_{i,i+d}) per offset d, compensated. Entry
    /// d - 1 holds offset d; each is the pair sum over k != l for that
    /// diagonal.
    pub fn pair_sums(&self) -> Vec<f64> {
        self.w_sums
            .iter()
            .zip(&self.q_sums)
            .map(|(ws, qs)| {
                let mut acc = CompensatedSum::default();
                for (w, q) in ws.iter().zip(qs) {
                    acc.add(w * w - q);
                }
                acc.value()
            })
            .collect()
    }
}

/// Weighted combination of per-offset pair sums:
/// 1/(n (n-1) p) * sum_d weight_at(d) * sums[d - 1]. Offsets with weight
/// exactly zero contribute nothing, bit for bit.
pub fn combine_pair_sums<F>(sums: &[f64], weight_at: F, n: usize, p: usize) -> f64
where
    F: Fn(usize) -> f64,
{
    let mut acc = CompensatedSum::default();
    for (k, s) in sums.iter().enumerate() {
        let w = weight_at(k + 1);
        if w == 0.0 {
            continue;
        }
        acc.add(w * s);
    }
    acc.value() / ((n * (n - 1)) as f64 * p as f64)
}

fn check_pair_inputs(sample: &Sample, profile_p: usize) -> Result<()> {
    if profile_p != sample.p {
        return Err(Error::DimensionMismatch { expected: profile_p, got: sample.p });
    }
    if sample.n < 2 {
        return Err(Error::Domain(String::from("the pair statistic needs n >= 2")));
    }
    Ok(())
}

/// The banded weighted pair statistic, O(n p T).
pub fn dstat(sample: &Sample, profile: &WeightProfile) -> Result<f64> {
    check_pair_inputs(sample, profile.p)?;
    let cp = cross_products(sample, profile.band);
    let sums = cp.pair_sums();
    Ok(combine_pair_sums(&sums, |d| profile.weight(d), sample.n, sample.p))
}

/// Reference evaluator: the literal quadruple loop over k != l and i < j.
///
/// Exists only to cross-check [`dstat`]; guarded because it costs
/// O(n^2 p T).
pub fn dstat_naive(sample: &Sample, profile: &WeightProfile) -> Result<f64> {
    check_pair_inputs(sample, profile.p)?;
    if sample.n > 50 || sample.p > 100 {
        return Err(Error::SizeGuard { n: sample.n, p: sample.p });
    }
    let (n, p) = (sample.n, sample.p);
    let mut total = CompensatedSum::default();
    for i in 0..p {
        for j in (i + 1)..p {
            let w = profile.weight(j - i);
            if w == 0.0 {
                continue;
            }
            let mut pair = 0.0;
            for k in 0..n {
                let rk = sample.row(k);
                for l in 0..n {
                    if l == k {
                        continue;
                    }
                    let rl = sample.row(l);
                    pair += rk[i] * rk[j] * rl[i] * rl[j];
                }
            }
            total.add(w * pair);
        }
    }
    Ok(total.value() / ((n * (n - 1)) as f64 * p as f64))
}

/// The same statistic with one constant weight on every off-diagonal,
/// renormalized so (1/p) sum_{i<j} w^2 = 1/2, i.e. w = 1/sqrt(p - 1).
/// This is the full-band baseline the weighted test is compared against.
pub fn dstat_unweighted(sample: &Sample) -> Result<f64> {
    if sample.n < 2 {
        return Err(Error::Domain(String::from("the pair statistic needs n >= 2")));
    }
    let w = 1.0 / fm::sqrt((sample.p - 1) as f64);
    let cp = cross_products(sample, sample.p);
    let sums = cp.pair_sums();
    Ok(combine_pair_sums(&sums, |_| w, sample.n, sample.p))
}

/// Maps the statistic to its limiting N(0, 1) scale: n sqrt(p) * value.
pub fn standardize(value: f64, n: usize, p: usize) -> f64 {
    n as f64 * fm::sqrt(p as f64) * value
}

/// Mean of the statistic under covariance sigma:
/// (1/p) sum_{i<j} w_{|i-j|} sigma_ij^2. Only banded offsets contribute.
pub fn expected_mean(profile: &WeightProfile, sigma: &Matrix) -> Result<f64> {
    if sigma.p() != profile.p {
        return Err(Error::DimensionMismatch { expected: profile.p, got: sigma.p() });
    }
    let p = profile.p;
    let mut acc = CompensatedSum::default();
    for d in 1..profile.band {
        let w = profile.weight(d);
        if w == 0.0 {
            continue;
        }
        for i in 0..p - d {
            let s = sigma.get(i, i + d);
            acc.add(w * s * s);
        }
    }
    Ok(acc.value() / p as f64)
}

/// Context attached to a test decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeMeta {
    pub n: usize,
    pub p: usize,
    /// Short human-readable description of the weights in force.
    pub profile: String,
    pub seed: Option<String>,
    /// For grid tests: the 1-based index of the deciding grid point.
    pub grid_index: Option<usize>,
    /// For grid tests: largest value of statistic minus threshold.
    pub margin: Option<f64>,
}

/// Decision of a single test: the statistic, its standardized form, the
/// threshold in force, and whether it was exceeded (strictly).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome {
    pub value: f64,
    pub standardized: f64,
    pub threshold: f64,
    pub reject: bool,
    pub meta: OutcomeMeta,
}
