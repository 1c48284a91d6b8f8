//! Dense square matrices and the small amount of linear algebra the crate
//! needs: Cholesky factorization with pivot reporting, triangular solves,
//! and banded lower-triangular products.

use alloc::vec;
use alloc::vec::Vec;

use crate::{fm, Error, Result};

/// Dense square matrix, row major.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Matrix {
    p: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Zero matrix of size p x p.
    pub fn zeros(p: usize) -> Self {
        Matrix { p, data: vec![0.0; p * p] }
    }

    /// Identity matrix of size p x p.
    pub fn identity(p: usize) -> Self {
        let mut m = Matrix::zeros(p);
        for i in 0..p {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds entry (i, j) from a function of the 0-based indices.
    pub fn from_fn(p: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(p * p);
        for i in 0..p {
            for j in 0..p {
                data.push(entry(i, j));
            }
        }
        Matrix { p, data }
    }

    /// Wraps a row-major buffer of length p*p.
    pub fn from_row_major(p: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != p * p {
            return Err(Error::Domain(alloc::format!(
                "matrix buffer holds {} entries, expected {}",
                data.len(),
                p * p
            )));
        }
        Ok(Matrix { p, data })
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.p + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest |a_ij - b_ij|.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.p, other.p);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| fm::abs(a - b))
            .fold(0.0, f64::max)
    }

    /// True when every entry equals its transpose partner to within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.p {
            for j in i + 1..self.p {
                if fm::abs(self.get(i, j) - self.get(j, i)) > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Lower Cholesky factor L with L L^T = a.
///
/// Fails with the 0-based column index of the first nonpositive pivot; the
/// input is never repaired or jittered.
pub fn cholesky_lower(a: &Matrix) -> Result<Matrix> {
    let p = a.p();
    let mut l = Matrix::zeros(p);
    for j in 0..p {
        let mut s = a.get(j, j);
        for k in 0..j {
            let v = l.get(j, k);
            s -= v * v;
        }
        // catches NaN as well
        if !(s > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let d = fm::sqrt(s);
        l.set(j, j, d);
        for i in j + 1..p {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / d);
        }
    }
    Ok(l)
}

/// Solves L y = x in place for lower-triangular L.
pub fn forward_solve_in_place(l: &Matrix, x: &mut [f64]) {
    let p = l.p();
    debug_assert_eq!(x.len(), p);
    for i in 0..p {
        let mut s = x[i];
        let row = l.row(i);
        for (k, xk) in x[..i].iter().enumerate() {
            s -= row[k] * xk;
        }
        x[i] = s / row[i];
    }
}

/// Number of subdiagonals of a lower-triangular matrix that carry a nonzero.
pub fn lower_bandwidth(l: &Matrix) -> usize {
    let p = l.p();
    let mut bw = 0;
    for i in 0..p {
        let row = l.row(i);
        for (j, &v) in row[..i].iter().enumerate() {
            if v != 0.0 {
                bw = bw.max(i - j);
                break;
            }
        }
    }
    bw
}

/// out = L x, touching only entries within the lower bandwidth `bw`.
///
/// Skipped entries are exact zeros, so the result is bit-identical to the
/// full product.
pub fn lower_banded_matvec(l: &Matrix, bw: usize, x: &[f64], out: &mut [f64]) {
    let p = l.p();
    debug_assert_eq!(x.len(), p);
    debug_assert_eq!(out.len(), p);
    for i in 0..p {
        let lo = i.saturating_sub(bw);
        let row = l.row(i);
        let mut s = 0.0;
        for k in lo..=i {
            s += row[k] * x[k];
        }
        out[i] = s;
    }
}
