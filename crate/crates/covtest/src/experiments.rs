//! Reproducible Monte Carlo studies: power curves, paired comparisons,
//! null diagnostics, adaptive-test evaluation, and a separation-rate sweep.
//!
//! Every study draws replicate j from the seed stream
//! (master, experiment label, j), so results are independent of thread
//! count and identical configs give identical reports byte for byte.
//! Experiment labels are assigned per grid point: calibration draws use
//! label 2k and evaluation draws label 2k+1, which keeps the two phases on
//! disjoint streams.

use std::fmt;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use covtest_core::linalg::Matrix;
use covtest_core::models::{build, cholesky, power_decay_psi, CovarianceModel};
use covtest_core::params::{adaptive_grid, default_c_star, profile, separation_rate, WeightProfile};
use covtest_core::procedures::{
    adaptive_test, calibration_threshold, null_statistic, Calibration,
};
use covtest_core::sampler::{sample_gaussian, sample_standard, SeedSpec};
use covtest_core::statistic::{dstat, dstat_unweighted, standardize};
use covtest_core::{dist, Error as CoreError};

use crate::binomial_half_width;

/// Anything that can stop a study: a bad description, a grid value whose
/// model is not a covariance, a core computation error, or file IO.
#[derive(Debug)]
pub enum HarnessError {
    /// The experiment description itself is unusable.
    Config(String),
    /// A model on the parameter grid failed to build or factor. Carries the
    /// offending grid value so the caller can report which point died.
    Model { param: f64, p: usize, source: CoreError },
    /// An error from the core crate during simulation.
    Core(CoreError),
    /// Reading or writing report files failed.
    Io(std::io::Error),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            HarnessError::Model { param, p, source } => {
                write!(f, "model at parameter {param} (p = {p}): {source}")
            }
            HarnessError::Core(e) => write!(f, "{e}"),
            HarnessError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<CoreError> for HarnessError {
    fn from(e: CoreError) -> HarnessError {
        HarnessError::Core(e)
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> HarnessError {
        HarnessError::Io(e)
    }
}

type Result<T> = std::result::Result<T, HarnessError>;

/// Named study layouts. `Fig1` is the power-decay power curve, `Fig2` the
/// tridiagonal banded-versus-unweighted comparison, the two null scenarios
/// pin the moment and normality diagnostics, and `Custom` starts from
/// neutral defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Fig1,
    Fig2,
    NullMoments,
    Normality,
    Custom,
}

impl Scenario {
    /// Tag used in CSV rows and on the command line.
    pub fn label(self) -> &'static str {
        match self {
            Scenario::Fig1 => "fig1",
            Scenario::Fig2 => "fig2",
            Scenario::NullMoments => "null-moments",
            Scenario::Normality => "normality",
            Scenario::Custom => "custom",
        }
    }

    /// Inverse of [`Scenario::label`].
    pub fn parse(s: &str) -> Option<Scenario> {
        match s {
            "fig1" => Some(Scenario::Fig1),
            "fig2" => Some(Scenario::Fig2),
            "null-moments" => Some(Scenario::NullMoments),
            "normality" => Some(Scenario::Normality),
            "custom" => Some(Scenario::Custom),
            _ => None,
        }
    }
}

/// Full description of one study run. Serialized verbatim into the report
/// sidecar, so a report is reproducible from its metadata alone.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Sample size per replicate.
    pub n: usize,
    /// Dimension grid.
    pub p_list: Vec<usize>,
    /// Smoothness of the weight profile.
    pub alpha: f64,
    /// Radius of the smoothness class.
    pub ell: f64,
    /// Fixed profile radius. `None` selects oracle mode: the profile tracks
    /// each alternative's own energy radius psi.
    pub phi: Option<f64>,
    /// Power-decay strength grid (doubles as the multiplier grid for the
    /// rate sweep). Empty means scenario defaults.
    pub m_list: Vec<f64>,
    /// Tridiagonal correlation grid. Empty means scenario defaults.
    pub rho_list: Vec<f64>,
    /// Monte Carlo replicates for threshold calibration.
    pub b_calibration: usize,
    /// Monte Carlo replicates for rate estimation.
    pub b_power: usize,
    /// Nominal type I error of calibrated tests.
    pub level: f64,
    /// Master seed; every replicate stream derives from it.
    pub seed: u64,
    /// Lower end of the adaptive smoothness interval.
    pub alpha_lo: Option<f64>,
    /// Upper end of the adaptive smoothness interval.
    pub alpha_hi: Option<f64>,
    /// Adaptive threshold multiplier; `None` selects the default for the
    /// interval.
    pub c_star: Option<f64>,
    /// Whether weight profiles are renormalized to the exact null variance.
    pub renormalize: bool,
    /// Where the CSV report goes; `None` means standard output.
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    fn base(scenario: Scenario, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            scenario,
            n: 20,
            p_list: vec![100],
            alpha: 1.0,
            ell: 1.0,
            phi: None,
            m_list: Vec::new(),
            rho_list: Vec::new(),
            b_calibration: 1000,
            b_power: 1000,
            level: 0.05,
            seed,
            alpha_lo: None,
            alpha_hi: None,
            c_star: None,
            renormalize: true,
            out: None,
        }
    }

    /// Power-decay power curves: n = 20, p in {20, 80, 120}, twelve grid
    /// strengths per dimension spanning psi in [0.05, 0.6], B = 1000 at
    /// level 0.05, oracle radius.
    pub fn fig1(seed: u64) -> ExperimentConfig {
        let mut config = ExperimentConfig::base(Scenario::Fig1, seed);
        config.p_list = vec![20, 80, 120];
        config
    }

    /// Tridiagonal comparison: n = 20, p = 120, correlations 0.05 to 0.35
    /// in steps of 0.05, B = 1000 at level 0.05.
    pub fn fig2(seed: u64) -> ExperimentConfig {
        let mut config = ExperimentConfig::base(Scenario::Fig2, seed);
        config.p_list = vec![120];
        config.rho_list = vec![0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35];
        config
    }

    /// Null moment diagnostics: n = 20, p = 100, radius 0.1, ten thousand
    /// replicates.
    pub fn null_moments(seed: u64) -> ExperimentConfig {
        let mut config = ExperimentConfig::base(Scenario::NullMoments, seed);
        config.phi = Some(0.1);
        config.b_power = 10_000;
        config
    }

    /// Null normality diagnostics: n = 50, p = 200, radius 0.1, two
    /// thousand replicates.
    pub fn normality(seed: u64) -> ExperimentConfig {
        let mut config = ExperimentConfig::base(Scenario::Normality, seed);
        config.n = 50;
        config.p_list = vec![200];
        config.phi = Some(0.1);
        config.b_power = 2000;
        config
    }

    /// Neutral starting point for hand-built studies.
    pub fn custom(seed: u64) -> ExperimentConfig {
        ExperimentConfig::base(Scenario::Custom, seed)
    }

    fn check_level(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 0.5) || !self.level.is_finite() {
            return Err(HarnessError::Config(format!(
                "level must lie in (0, 1/2), got {}",
                self.level
            )));
        }
        Ok(())
    }

    fn check_replicates(&self) -> Result<()> {
        if self.b_calibration < 100 {
            return Err(HarnessError::Config(format!(
                "calibration needs at least 100 replicates, got {}",
                self.b_calibration
            )));
        }
        if self.b_power == 0 {
            return Err(HarnessError::Config(String::from(
                "estimation needs at least one replicate",
            )));
        }
        if self.n < 2 {
            return Err(HarnessError::Config(format!("need n >= 2, got {}", self.n)));
        }
        Ok(())
    }

    fn sorted_p(&self) -> Result<Vec<usize>> {
        if self.p_list.is_empty() {
            return Err(HarnessError::Config(String::from("dimension grid is empty")));
        }
        let mut ps = self.p_list.clone();
        ps.sort_unstable();
        Ok(ps)
    }
}

/// One CSV row. `param` is the model parameter the row varies over (grid
/// strength, correlation, multiplier, or a diagnostic target), `psi` its
/// energy radius, `power` the estimated rate or observed value, and
/// `threshold` the decision threshold in force.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub scenario: String,
    pub n: usize,
    pub p: usize,
    pub param: f64,
    pub psi: f64,
    pub power: f64,
    pub half_width: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    pub threshold: f64,
}

/// A finished study: the config that produced it plus its rows, sorted by
/// (p, param, scenario).
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
}

fn sort_rows(rows: &mut [ReportRow]) {
    rows.sort_by(|a, b| {
        a.p.cmp(&b.p)
            .then(a.param.total_cmp(&b.param))
            .then_with(|| a.scenario.cmp(&b.scenario))
    });
}

/// Calibration with parallel replicate draws. Replicate j draws from the
/// seed's replicate + j substream exactly as the serial version does, and
/// the sorted trace makes the threshold independent of evaluation order,
/// so the result is bit-identical to serial calibration.
pub fn calibrate_par(
    profile: &WeightProfile,
    n: usize,
    level: f64,
    replicates: usize,
    seed: &SeedSpec,
) -> Result<Calibration> {
    if replicates < 100 {
        return Err(HarnessError::Config(String::from(
            "calibration needs at least 100 replicates",
        )));
    }
    if !(level > 0.0 && level < 0.5) {
        return Err(HarnessError::Config(String::from("level must lie in (0, 1/2)")));
    }
    if n < 2 {
        return Err(HarnessError::Config(String::from("calibration needs n >= 2")));
    }
    let mut draws = (0..replicates)
        .into_par_iter()
        .map(|j| null_statistic(profile, n, &seed.with_replicate(seed.replicate + j as u64)))
        .collect::<core::result::Result<Vec<f64>, CoreError>>()?;
    draws.sort_by(f64::total_cmp);
    let threshold = calibration_threshold(&draws, level);
    Ok(Calibration { level, replicates, threshold, trace: draws, seed: *seed })
}

/// Rejection rate of the fixed-threshold test over `b` replicates drawn
/// from the alternative with the given Cholesky factor.
fn rejection_rate(
    chol: &Matrix,
    prof: &WeightProfile,
    threshold: f64,
    n: usize,
    b: usize,
    seed: &SeedSpec,
) -> Result<f64> {
    let hits = (0..b)
        .into_par_iter()
        .map(|j| {
            let sample = sample_gaussian(chol, n, &seed.with_replicate(j as u64))?;
            Ok(dstat(&sample, prof)? > threshold)
        })
        .collect::<core::result::Result<Vec<bool>, CoreError>>()?;
    Ok(hits.iter().filter(|hit| **hit).count() as f64 / b as f64)
}

fn power_row(
    config: &ExperimentConfig,
    scenario: String,
    p: usize,
    param: f64,
    psi: f64,
    power: f64,
    threshold: f64,
) -> ReportRow {
    ReportRow {
        scenario,
        n: config.n,
        p,
        param,
        psi,
        power,
        half_width: binomial_half_width(power, config.b_power),
        b: config.b_power,
        seed: config.seed,
        threshold,
    }
}

/// Twelve grid strengths per dimension, chosen so the energy radius psi
/// runs over [0.05, 0.6] on a log scale. An explicit `m_list` overrides.
fn resolve_m_grid(config: &ExperimentConfig, p: usize) -> Result<Vec<f64>> {
    if !config.m_list.is_empty() {
        let mut ms = config.m_list.clone();
        ms.sort_by(f64::total_cmp);
        return Ok(ms);
    }
    let psi_unit = power_decay_psi(p, 1.0)?;
    let (lo, hi, count) = (0.05f64, 0.6f64, 12usize);
    let mut ms: Vec<f64> = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            let psi = lo * (hi / lo).powf(t);
            psi_unit / psi
        })
        .collect();
    ms.sort_by(f64::total_cmp);
    Ok(ms)
}

/// Calibrated power of the banded test along a power-decay strength grid,
/// one curve per dimension. In oracle mode the profile radius equals each
/// alternative's psi; a fixed `phi` freezes the profile across the grid.
pub fn run_power_curve(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.check_level()?;
    config.check_replicates()?;
    let ps = config.sorted_p()?;
    let mut rows = Vec::new();
    let mut grid_index = 0u64;
    for &p in &ps {
        let ms = resolve_m_grid(config, p)?;
        if ms.is_empty() {
            return Err(HarnessError::Config(String::from("strength grid is empty")));
        }
        for &m in &ms {
            let model = CovarianceModel::PowerDecay { m };
            let sigma = build(&model, p)
                .map_err(|e| HarnessError::Model { param: m, p, source: e })?;
            let chol = cholesky(&sigma)
                .map_err(|e| HarnessError::Model { param: m, p, source: e })?;
            let psi = power_decay_psi(p, m)?;
            let phi = config.phi.unwrap_or(psi);
            let prof = profile(config.alpha, config.ell, phi, p, config.renormalize)?;
            let cal_seed = SeedSpec::new(config.seed, 2 * grid_index, 0);
            let cal =
                calibrate_par(&prof, config.n, config.level, config.b_calibration, &cal_seed)?;
            let pow_seed = SeedSpec::new(config.seed, 2 * grid_index + 1, 0);
            let power = rejection_rate(
                &chol,
                &prof,
                cal.threshold,
                config.n,
                config.b_power,
                &pow_seed,
            )?;
            rows.push(power_row(
                config,
                config.scenario.label().to_string(),
                p,
                m,
                psi,
                power,
                cal.threshold,
            ));
            grid_index += 1;
        }
    }
    sort_rows(&mut rows);
    Ok(ExperimentReport { config: config.clone(), rows })
}

/// Energy radius of the tridiagonal model: psi^2 = (p-1) rho^2 / p.
fn tridiagonal_psi(rho: f64, p: usize) -> f64 {
    rho * ((p - 1) as f64 / p as f64).sqrt()
}

/// Banded test versus the unweighted full-band baseline on tridiagonal
/// alternatives, with common random numbers: per grid point both tests are
/// calibrated on one shared set of null draws and evaluated on one shared
/// set of alternative draws, so power differences are paired. Emits two
/// rows per grid point, tagged `<scenario>-delta` and `<scenario>-cm`.
pub fn run_comparison(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.check_level()?;
    config.check_replicates()?;
    let ps = config.sorted_p()?;
    if config.rho_list.is_empty() {
        return Err(HarnessError::Config(String::from("correlation grid is empty")));
    }
    let mut rhos = config.rho_list.clone();
    rhos.sort_by(f64::total_cmp);
    if rhos.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(HarnessError::Config(String::from(
            "correlations must be positive and finite",
        )));
    }
    let mut rows = Vec::new();
    let mut grid_index = 0u64;
    for &p in &ps {
        for &rho in &rhos {
            let model = CovarianceModel::Tridiagonal { rho };
            let sigma = build(&model, p)
                .map_err(|e| HarnessError::Model { param: rho, p, source: e })?;
            let chol = cholesky(&sigma)
                .map_err(|e| HarnessError::Model { param: rho, p, source: e })?;
            let psi = tridiagonal_psi(rho, p);
            let phi = config.phi.unwrap_or(psi);
            let prof = profile(config.alpha, config.ell, phi, p, config.renormalize)?;

            // shared null draws, one statistic pair per replicate
            let cal_seed = SeedSpec::new(config.seed, 2 * grid_index, 0);
            let null_pairs = (0..config.b_calibration)
                .into_par_iter()
                .map(|j| {
                    let s = sample_standard(config.n, p, &cal_seed.with_replicate(j as u64))?;
                    Ok((dstat(&s, &prof)?, dstat_unweighted(&s)?))
                })
                .collect::<core::result::Result<Vec<(f64, f64)>, CoreError>>()?;
            let mut delta_draws: Vec<f64> = null_pairs.iter().map(|pair| pair.0).collect();
            let mut cm_draws: Vec<f64> = null_pairs.iter().map(|pair| pair.1).collect();
            delta_draws.sort_by(f64::total_cmp);
            cm_draws.sort_by(f64::total_cmp);
            let t_delta = calibration_threshold(&delta_draws, config.level);
            let t_cm = calibration_threshold(&cm_draws, config.level);

            // shared alternative draws, one decision pair per replicate
            let pow_seed = SeedSpec::new(config.seed, 2 * grid_index + 1, 0);
            let alt_pairs = (0..config.b_power)
                .into_par_iter()
                .map(|j| {
                    let s = sample_gaussian(&chol, config.n, &pow_seed.with_replicate(j as u64))?;
                    Ok((dstat(&s, &prof)? > t_delta, dstat_unweighted(&s)? > t_cm))
                })
                .collect::<core::result::Result<Vec<(bool, bool)>, CoreError>>()?;
            let b = config.b_power as f64;
            let power_delta = alt_pairs.iter().filter(|pair| pair.0).count() as f64 / b;
            let power_cm = alt_pairs.iter().filter(|pair| pair.1).count() as f64 / b;

            let tag = config.scenario.label();
            rows.push(power_row(
                config,
                format!("{tag}-delta"),
                p,
                rho,
                psi,
                power_delta,
                t_delta,
            ));
            rows.push(power_row(config, format!("{tag}-cm"), p, rho, psi, power_cm, t_cm));
            grid_index += 1;
        }
    }
    sort_rows(&mut rows);
    Ok(ExperimentReport { config: config.clone(), rows })
}

/// Sequential mean; replicate values are collected in index order first,
/// so the sum does not depend on thread count.
fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn diag_row(
    config: &ExperimentConfig,
    name: &str,
    p: usize,
    target: f64,
    observed: f64,
    half_width: f64,
) -> ReportRow {
    ReportRow {
        scenario: name.to_string(),
        n: config.n,
        p,
        param: target,
        psi: 0.0,
        power: observed,
        half_width,
        b: config.b_power,
        seed: config.seed,
        threshold: target,
    }
}

/// Null-distribution diagnostics. Rows report observed value against its
/// target: statistic mean (target 0) and variance ratio (target 1), the
/// Kolmogorov-Smirnov distance of the standardized statistic from standard
/// normal (bound 0.05), and cross-moment checks of the pair sums
/// W_ij = sum_k X_ki X_kj at p = 3: E(W^2) = n, E(W^4) = 3n^2 + 6n,
/// E(W_12^2 W_13^2) = n^2 + 2n, E(W_ii) = n, E(W_ii^2) = n^2 + 2n.
/// Moment rows carry half_width = 4 standard errors; the KS row carries
/// the 95% band 1.36 / sqrt(B).
pub fn run_null_diagnostics(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.check_replicates()?;
    let ps = config.sorted_p()?;
    let p = ps[0];
    let b = config.b_power;
    if b < 2 {
        return Err(HarnessError::Config(String::from("diagnostics need at least 2 replicates")));
    }
    let n = config.n;
    let phi = config.phi.unwrap_or(0.1);
    let prof = profile(config.alpha, config.ell, phi, p, config.renormalize)?;

    // statistic replicates, experiment label 0
    let values = (0..b)
        .into_par_iter()
        .map(|j| null_statistic(&prof, n, &SeedSpec::new(config.seed, 0, j as u64)))
        .collect::<core::result::Result<Vec<f64>, CoreError>>()?;
    let bf = b as f64;
    let value_mean = mean(&values);
    let var = values.iter().map(|v| (v - value_mean).powi(2)).sum::<f64>() / (bf - 1.0);
    let m4 = values.iter().map(|v| (v - value_mean).powi(4)).sum::<f64>() / bf;
    let sd = var.sqrt();
    let target_var = prof.null_variance(n);
    let se_var = ((m4 - var * var).max(0.0) / bf).sqrt();

    // one-sample KS distance of the standardized statistic
    let mut z: Vec<f64> = values.iter().map(|v| standardize(*v, n, p)).collect();
    z.sort_by(f64::total_cmp);
    let mut ks = 0.0f64;
    for (i, zi) in z.iter().enumerate() {
        let cdf = dist::normal_cdf(*zi);
        ks = ks.max(cdf - i as f64 / bf).max((i + 1) as f64 / bf - cdf);
    }

    // pair-sum moments at p = 3, experiment label 1
    let nf = n as f64;
    let w_samples = (0..b)
        .into_par_iter()
        .map(|j| {
            let s = sample_standard(n, 3, &SeedSpec::new(config.seed, 1, j as u64))?;
            let w12 = s.cross_product(0, 1);
            let w13 = s.cross_product(0, 2);
            let w11 = s.cross_product(0, 0);
            Ok([w12 * w12, w12.powi(4), w12 * w12 * w13 * w13, w11, w11 * w11])
        })
        .collect::<core::result::Result<Vec<[f64; 5]>, CoreError>>()?;
    let w_targets = [nf, 3.0 * nf * nf + 6.0 * nf, nf * nf + 2.0 * nf, nf, nf * nf + 2.0 * nf];
    let w_names = ["diag-w2", "diag-w4", "diag-w22", "diag-wii-mean", "diag-wii-sq"];
    let mut rows = Vec::new();
    for (slot, (name, target)) in w_names.iter().zip(w_targets).enumerate() {
        let series: Vec<f64> = w_samples.iter().map(|row| row[slot]).collect();
        let m = mean(&series);
        let se = (series.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (bf * (bf - 1.0))).sqrt();
        rows.push(diag_row(config, name, 3, target, m, 4.0 * se));
    }

    rows.push(diag_row(config, "diag-mean", p, 0.0, value_mean, 4.0 * sd / bf.sqrt()));
    rows.push(diag_row(
        config,
        "diag-var-ratio",
        p,
        1.0,
        var / target_var,
        4.0 * se_var / target_var,
    ));
    rows.push(diag_row(config, "diag-ks", p, 0.05, ks, 1.36 / bf.sqrt()));
    sort_rows(&mut rows);
    Ok(ExperimentReport { config: config.clone(), rows })
}

/// Smoothness-free test evaluation on the interval [alpha_lo, alpha_hi]:
/// one row for the null rejection rate and one for the power against the
/// extremal alternative at smoothness `config.alpha`, whose radius is
/// `config.phi` or, by default, four times the adaptive rate at that
/// smoothness. Both rows carry the threshold multiplier in `threshold`.
pub fn run_adaptive_study(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.check_replicates()?;
    let ps = config.sorted_p()?;
    let p = ps[0];
    let n = config.n;
    let b = config.b_power;
    let lo = config.alpha_lo.unwrap_or(1.25);
    let hi = config.alpha_hi.unwrap_or(3.0);
    let c_star = config.c_star.unwrap_or_else(|| default_c_star(lo, hi));
    let grid = adaptive_grid(lo, hi, config.ell, n, p, c_star)?;

    // null rejection rate, experiment label 0
    let null_hits = (0..b)
        .into_par_iter()
        .map(|j| {
            let s = sample_standard(n, p, &SeedSpec::new(config.seed, 0, j as u64))?;
            Ok(adaptive_test(&s, &grid)?.reject)
        })
        .collect::<core::result::Result<Vec<bool>, CoreError>>()?;
    let type_one = null_hits.iter().filter(|hit| **hit).count() as f64 / b as f64;

    // power against the extremal prior, experiment label 1
    let scale = grid.rho / (n as f64 * (p as f64).sqrt());
    let exponent = 2.0 * config.alpha / (4.0 * config.alpha + 1.0);
    let radius = config.phi.unwrap_or(4.0 * scale.powf(exponent));
    let model = CovarianceModel::ExtremalPrior {
        alpha: config.alpha,
        ell: config.ell,
        phi: radius,
        signs: None,
    };
    let sigma =
        build(&model, p).map_err(|e| HarnessError::Model { param: config.alpha, p, source: e })?;
    let chol = cholesky(&sigma)
        .map_err(|e| HarnessError::Model { param: config.alpha, p, source: e })?;
    let alt_hits = (0..b)
        .into_par_iter()
        .map(|j| {
            let s = sample_gaussian(&chol, n, &SeedSpec::new(config.seed, 1, j as u64))?;
            Ok(adaptive_test(&s, &grid)?.reject)
        })
        .collect::<core::result::Result<Vec<bool>, CoreError>>()?;
    let power = alt_hits.iter().filter(|hit| **hit).count() as f64 / b as f64;

    let mut rows = vec![
        ReportRow {
            scenario: String::from("adaptive-null"),
            n,
            p,
            param: 0.0,
            psi: 0.0,
            power: type_one,
            half_width: binomial_half_width(type_one, b),
            b,
            seed: config.seed,
            threshold: c_star,
        },
        ReportRow {
            scenario: String::from("adaptive-power"),
            n,
            p,
            param: config.alpha,
            psi: radius,
            power,
            half_width: binomial_half_width(power, b),
            b,
            seed: config.seed,
            threshold: c_star,
        },
    ];
    sort_rows(&mut rows);
    Ok(ExperimentReport { config: config.clone(), rows })
}

/// Calibrated power along multiples of the separation rate: for each
/// multiplier c in `m_list` (default 1, 2, 4, 8) the alternative is the
/// extremal prior at radius c times the rate, so `psi / param` recovers
/// the rate from any row. Power should be near the level at c = 1 and
/// near one at c = 8.
pub fn run_rate_sweep(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.check_level()?;
    config.check_replicates()?;
    let ps = config.sorted_p()?;
    let p = ps[0];
    let rate = separation_rate(config.alpha, config.ell, config.n, p)?;
    let mut multipliers =
        if config.m_list.is_empty() { vec![1.0, 2.0, 4.0, 8.0] } else { config.m_list.clone() };
    multipliers.sort_by(f64::total_cmp);
    if multipliers.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
        return Err(HarnessError::Config(String::from(
            "rate multipliers must be positive and finite",
        )));
    }
    let mut rows = Vec::new();
    for (k, &c) in multipliers.iter().enumerate() {
        let phi_alt = c * rate;
        let model = CovarianceModel::ExtremalPrior {
            alpha: config.alpha,
            ell: config.ell,
            phi: phi_alt,
            signs: None,
        };
        let sigma =
            build(&model, p).map_err(|e| HarnessError::Model { param: c, p, source: e })?;
        let chol =
            cholesky(&sigma).map_err(|e| HarnessError::Model { param: c, p, source: e })?;
        let phi = config.phi.unwrap_or(phi_alt);
        let prof = profile(config.alpha, config.ell, phi, p, config.renormalize)?;
        let cal_seed = SeedSpec::new(config.seed, 2 * k as u64, 0);
        let cal = calibrate_par(&prof, config.n, config.level, config.b_calibration, &cal_seed)?;
        let pow_seed = SeedSpec::new(config.seed, 2 * k as u64 + 1, 0);
        let power =
            rejection_rate(&chol, &prof, cal.threshold, config.n, config.b_power, &pow_seed)?;
        rows.push(power_row(
            config,
            String::from("rate"),
            p,
            c,
            phi_alt,
            power,
            cal.threshold,
        ));
    }
    sort_rows(&mut rows);
    Ok(ExperimentReport { config: config.clone(), rows })
}
