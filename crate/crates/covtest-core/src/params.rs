//! Closed-form parameter layer: rate constants, banded weight profiles,
//! separation rates, theoretical thresholds, and the grid used by the
//! smoothness-free test.

use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::{dist, fm, Error, Result};

/// Relative nudge applied before flooring the band, so products that are
/// within machine noise of an integer land on it.
const BAND_NUDGE: f64 = 1e-12;

/// The three constants attached to a smoothness class (alpha, L).
///
/// They satisfy c_lambda * c_t = (2 alpha + 1) / (2 alpha) exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateConstants {
    pub alpha: f64,
    pub ell: f64,
    /// Band scale: T = floor(c_t * phi^(-1/alpha)).
    pub c_t: f64,
    /// Weight scale: lambda = c_lambda * phi^((2 alpha + 1) / alpha).
    pub c_lambda: f64,
    /// Signal scale: b(phi) = sqrt(c_rate) * phi^(2 + 1/(2 alpha)).
    pub c_rate: f64,
}

fn check_class(alpha: f64, ell: f64) -> Result<()> {
    if !(alpha > 0.5) || !alpha.is_finite() {
        return Err(Error::Domain(String::from("alpha must be finite and exceed 1/2")));
    }
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(Error::Domain(String::from("L must be finite and positive")));
    }
    Ok(())
}

/// Rate constants for the class (alpha, L).
pub fn constants(alpha: f64, ell: f64) -> Result<RateConstants> {
    check_class(alpha, ell)?;
    let base = (4.0 * alpha + 1.0) * ell;
    let inv2a = 1.0 / (2.0 * alpha);
    Ok(RateConstants {
        alpha,
        ell,
        c_t: fm::powf(base, inv2a),
        c_lambda: (2.0 * alpha + 1.0) / (2.0 * alpha) * fm::powf(base, -inv2a),
        c_rate: (2.0 * alpha + 1.0)
            * fm::powf(4.0 * alpha + 1.0, -1.0 - inv2a)
            * fm::powf(ell, -inv2a),
    })
}

/// Banded weight sequence for one (alpha, L, phi) at dimension p.
///
/// `w_diag[k]` is the weight on diagonal offset k + 1; offsets at and beyond
/// `band` carry weight zero. The weights are strictly decreasing in the
/// offset. When `renormalized` is set, a single common factor makes
/// (1/p) sum over i < j of w_ij^2 equal 1/2 exactly at this p, so the null
/// variance of the statistic is 1/(n (n-1) p).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightProfile {
    pub alpha: f64,
    pub ell: f64,
    pub phi: f64,
    pub p: usize,
    #[serde(rename = "T")]
    pub band: usize,
    pub lambda: f64,
    #[serde(rename = "b")]
    pub b_phi: f64,
    pub w_diag: Vec<f64>,
    pub renormalized: bool,
    /// Set when the requested band reached p and was clamped to p - 1.
    #[serde(skip)]
    pub clamped: bool,
}

impl WeightProfile {
    /// Weight on diagonal offset d; zero on the diagonal and beyond the band.
    #[inline]
    pub fn weight(&self, d: usize) -> f64 {
        if d >= 1 && d < self.band {
            self.w_diag[d - 1]
        } else {
            0.0
        }
    }

    /// (1/p) sum over i < j of w_ij^2. Equals 1/2 when renormalized.
    pub fn normalization_sum(&self) -> f64 {
        let p = self.p as f64;
        let mut s = 0.0;
        for (k, w) in self.w_diag.iter().enumerate() {
            s += (p - (k as f64 + 1.0)) * w * w;
        }
        s / p
    }

    /// Null variance of the statistic at sample size n:
    /// 2/(n (n-1) p^2) * sum over i < j of w_ij^2.
    pub fn null_variance(&self, n: usize) -> f64 {
        2.0 * self.normalization_sum() / ((n * (n - 1)) as f64 * self.p as f64)
    }

    /// Copy with every weight multiplied by a common factor.
    pub fn scaled(&self, c: f64) -> WeightProfile {
        let mut out = self.clone();
        for w in &mut out.w_diag {
            *w *= c;
        }
        out.renormalized = false;
        out
    }
}

/// Unclamped band T = floor(c_t * phi^(-1/alpha)), nudged so values within
/// machine noise of an integer land on it. A band below 2 carries no
/// off-diagonal weights and is rejected.
pub(crate) fn raw_band(rc: &RateConstants, phi: f64) -> Result<usize> {
    let raw = rc.c_t * fm::powf(phi, -1.0 / rc.alpha);
    // saturating cast keeps enormous bands finite before any later clamp
    let band = fm::floor(raw * (1.0 + BAND_NUDGE)) as usize;
    if band < 2 {
        return Err(Error::DegenerateBand { band });
    }
    Ok(band)
}

/// Optimal banded weight profile for (alpha, L, phi) at dimension p.
///
/// The band is T = floor(c_t * phi^(-1/alpha)); raw weights on offset d are
/// (lambda / (2 b)) * (1 - (d/T)^(2 alpha)) for d < T. A band below 2 is an
/// error; a band at or beyond p is clamped to p - 1 and flagged (`clamped`).
pub fn profile(
    alpha: f64,
    ell: f64,
    phi: f64,
    p: usize,
    renormalize: bool,
) -> Result<WeightProfile> {
    let rc = constants(alpha, ell)?;
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(Error::Domain(String::from("phi must be finite and positive")));
    }
    if p < 3 {
        return Err(Error::Domain(String::from("p must be at least 3")));
    }
    let band_raw = raw_band(&rc, phi)?;
    let clamped = band_raw >= p;
    let band = if clamped { p - 1 } else { band_raw };

    let lambda = rc.c_lambda * fm::powf(phi, (2.0 * alpha + 1.0) / alpha);
    let b_phi = fm::sqrt(rc.c_rate) * fm::powf(phi, 2.0 + 1.0 / (2.0 * alpha));
    let scale = lambda / (2.0 * b_phi);
    let t = band as f64;
    let mut w_diag: Vec<f64> = (1..band)
        .map(|d| scale * (1.0 - fm::powf(d as f64 / t, 2.0 * alpha)))
        .collect();
    if renormalize {
        let mut s = 0.0;
        for (k, w) in w_diag.iter().enumerate() {
            s += (p - (k + 1)) as f64 * w * w;
        }
        let c = fm::sqrt(p as f64 / (2.0 * s));
        for w in &mut w_diag {
            *w *= c;
        }
    }
    Ok(WeightProfile {
        alpha,
        ell,
        phi,
        p,
        band,
        lambda,
        b_phi,
        w_diag,
        renormalized: renormalize,
        clamped,
    })
}

/// Smallest detectable separation radius for the class (alpha, L) at sample
/// size n and dimension p: (c_rate * n^2 p)^(-alpha / (4 alpha + 1)).
pub fn separation_rate(alpha: f64, ell: f64, n: usize, p: usize) -> Result<f64> {
    let rc = constants(alpha, ell)?;
    if n < 2 || p < 2 {
        return Err(Error::Domain(String::from("separation rate needs n >= 2 and p >= 2")));
    }
    let nn = n as f64;
    Ok(fm::powf(rc.c_rate * nn * nn * p as f64, -alpha / (4.0 * alpha + 1.0)))
}

/// Closed-form thresholds for a profile at sample size n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    /// Level-w threshold z_{1-w} / (n sqrt p) from the limiting normal law.
    pub t_w: f64,
    /// Midpoint threshold b(phi) / 2 controlling the total error.
    pub t_star: f64,
}

/// t_w = z_{1-level} / (n sqrt p) and t_star = b(phi) / 2.
pub fn theoretical_thresholds(
    profile: &WeightProfile,
    n: usize,
    level: f64,
) -> Result<Thresholds> {
    if n < 2 {
        return Err(Error::Domain(String::from("thresholds need n >= 2")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(String::from("level must lie strictly inside (0, 1)")));
    }
    let t_w = dist::normal_quantile(1.0 - level) / (n as f64 * fm::sqrt(profile.p as f64));
    Ok(Thresholds { t_w, t_star: profile.b_phi / 2.0 })
}

/// One point of the adaptive grid: a smoothness value, its radius, its
/// profile, and its raw threshold t = c_lambda(alpha_r) * rho / (n sqrt p).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub psi: f64,
    pub t: f64,
    pub profile: WeightProfile,
}

/// Regular grid over a smoothness interval, used by the adaptive test.
///
/// The grid has N = ceil(ln(n sqrt p)) points alpha_r = alpha_lo +
/// (alpha_hi - alpha_lo) r / N, each carrying the radius
/// psi_r = (rho / (n sqrt p))^(2 alpha_r / (4 alpha_r + 1)) with
/// rho = sqrt(ln ln (n sqrt p)), a renormalized profile at (alpha_r, L,
/// psi_r), and the threshold t_r. Rejection happens when any grid statistic
/// exceeds c_star * t_r.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptiveGrid {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub ell: f64,
    pub n: usize,
    pub p: usize,
    pub grid_size: usize,
    pub rho: f64,
    pub c_star: f64,
    pub points: Vec<GridPoint>,
}

/// Default threshold multiplier 2/c with
/// c = (2 alpha_lo + 1) / (2 alpha_hi (4 alpha_hi + 1)^(1/(2 alpha_lo))).
pub fn default_c_star(alpha_lo: f64, alpha_hi: f64) -> f64 {
    let c = (2.0 * alpha_lo + 1.0)
        / (2.0 * alpha_hi * fm::powf(4.0 * alpha_hi + 1.0, 1.0 / (2.0 * alpha_lo)));
    2.0 / c
}

/// Builds the adaptive grid for the interval [alpha_lo, alpha_hi].
pub fn adaptive_grid(
    alpha_lo: f64,
    alpha_hi: f64,
    ell: f64,
    n: usize,
    p: usize,
    c_star: f64,
) -> Result<AdaptiveGrid> {
    if !(alpha_lo > 1.0 && alpha_hi > alpha_lo) {
        return Err(Error::Domain(String::from(
            "adaptive grid needs 1 < alpha_lo < alpha_hi",
        )));
    }
    if !(c_star > 0.0) || !c_star.is_finite() {
        return Err(Error::Domain(String::from("c_star must be finite and positive")));
    }
    if n < 2 || p < 2 {
        return Err(Error::Domain(String::from("adaptive grid needs n >= 2 and p >= 2")));
    }
    let nsp = n as f64 * fm::sqrt(p as f64);
    let loglog = fm::ln(fm::ln(nsp));
    if !(loglog > 0.0) {
        return Err(Error::Domain(String::from(
            "adaptive grid needs ln ln (n sqrt p) > 0",
        )));
    }
    let grid_size = fm::ceil(fm::ln(nsp)) as usize;
    let rho = fm::sqrt(loglog);
    let mut points = Vec::with_capacity(grid_size);
    for r in 1..=grid_size {
        let alpha_r = alpha_lo + (alpha_hi - alpha_lo) * r as f64 / grid_size as f64;
        let psi_r = fm::powf(rho / nsp, 2.0 * alpha_r / (4.0 * alpha_r + 1.0));
        let prof = profile(alpha_r, ell, psi_r, p, true)?;
        let t_r = constants(alpha_r, ell)?.c_lambda * rho / nsp;
        points.push(GridPoint { alpha: alpha_r, psi: psi_r, t: t_r, profile: prof });
    }
    Ok(AdaptiveGrid {
        alpha_lo,
        alpha_hi,
        ell,
        n,
        p,
        grid_size,
        rho,
        c_star,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_nudge_lands_on_integers() {
        // c_t(alpha = 1, L = 5^3 / 4) = (5 * 125/4)^(1/2) = 12.5 exactly,
        // so phi = 1/2 puts c_t * phi^(-1) right on 25
        let rc = constants(1.0, 31.25).unwrap();
        assert!((rc.c_t - 12.5).abs() < 1e-12);
        let prof = profile(1.0, 31.25, 0.5, 100, true).unwrap();
        assert_eq!(prof.band, 25);
    }

    #[test]
    fn renormalization_is_exact_at_clamped_band() {
        let prof = profile(1.0, 1.0, 0.05, 10, true).unwrap();
        assert!(prof.clamped);
        assert_eq!(prof.band, 9);
        assert!((prof.normalization_sum() - 0.5).abs() < 1e-12);
    }
}
