//! Command line front end for the experiment harness.
//!
//! Subcommands: `power` (curves over a model grid), `compare` (paired
//! banded-versus-unweighted study), `calibrate` (one empirical threshold,
//! as JSON), `diagnose` (null-distribution checks), `adaptive`
//! (smoothness-free test evaluation), `rate` (power along multiples of
//! the separation rate). Exit codes: 0 success, 1 IO failure, 2 bad
//! configuration or usage, 3 model not positive definite.
//! `COVTEST_THREADS` caps the worker pool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use covtest::report::emit;
use covtest::{
    calibrate_par, run_adaptive_study, run_comparison, run_null_diagnostics, run_power_curve,
    run_rate_sweep, ExperimentConfig, ExperimentReport, HarnessError, Scenario,
};
use covtest_core::params::profile;
use covtest_core::sampler::SeedSpec;
use covtest_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "covtest", version, about = "Monte Carlo studies of a banded covariance test")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Power curves over a model grid; fig2 runs the paired comparison.
    Power(RunArgs),
    /// Paired banded-versus-unweighted comparison on common random numbers.
    Compare(RunArgs),
    /// Empirical null threshold for one weight profile, printed as JSON.
    Calibrate(RunArgs),
    /// Null diagnostics: statistic moments, normality, pair-sum moments.
    Diagnose(RunArgs),
    /// Smoothness-free test: null level and power against an extremal prior.
    Adaptive(RunArgs),
    /// Calibrated power along multiples of the separation rate.
    Rate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario: fig1, fig2, null-moments, normality, custom
    #[arg(long)]
    scenario: Option<String>,

    /// Sample size per replicate
    #[arg(long)]
    n: Option<usize>,

    /// Dimension grid, comma separated
    #[arg(long, value_delimiter = ',')]
    p: Vec<usize>,

    /// Profile smoothness (adaptive: smoothness of the alternative)
    #[arg(long)]
    alpha: Option<f64>,

    /// Smoothness class radius
    #[arg(long = "L")]
    ell: Option<f64>,

    /// Fixed profile radius; omit for oracle mode (adaptive: alternative radius)
    #[arg(long)]
    phi: Option<f64>,

    /// Monte Carlo replicates for calibration and estimation
    #[arg(long = "B")]
    b: Option<usize>,

    /// Nominal type I error of calibrated tests
    #[arg(long)]
    level: Option<f64>,

    /// Master seed
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Output CSV path (sidecar JSON goes next to it); omit for stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Power-decay strength grid, or rate-sweep multipliers, comma separated
    #[arg(long = "M", value_delimiter = ',')]
    m: Vec<f64>,

    /// Tridiagonal correlation grid, comma separated
    #[arg(long, value_delimiter = ',')]
    rho: Vec<f64>,

    /// Lower end of the adaptive smoothness interval
    #[arg(long = "alpha-lo")]
    alpha_lo: Option<f64>,

    /// Upper end of the adaptive smoothness interval
    #[arg(long = "alpha-hi")]
    alpha_hi: Option<f64>,

    /// Adaptive threshold multiplier; omit for the interval's default
    #[arg(long)]
    cstar: Option<f64>,

    /// Renormalize profile weights to the exact null variance
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    renormalize: bool,
}

impl RunArgs {
    fn into_config(self, fallback: Scenario) -> Result<ExperimentConfig, HarnessError> {
        let scenario = match &self.scenario {
            Some(s) => Scenario::parse(s).ok_or_else(|| {
                HarnessError::Config(format!(
                    "unknown scenario {s:?} (expected fig1, fig2, null-moments, normality, custom)"
                ))
            })?,
            None => fallback,
        };
        let mut config = match scenario {
            Scenario::Fig1 => ExperimentConfig::fig1(self.seed),
            Scenario::Fig2 => ExperimentConfig::fig2(self.seed),
            Scenario::NullMoments => ExperimentConfig::null_moments(self.seed),
            Scenario::Normality => ExperimentConfig::normality(self.seed),
            Scenario::Custom => ExperimentConfig::custom(self.seed),
        };
        if let Some(n) = self.n {
            config.n = n;
        }
        if !self.p.is_empty() {
            config.p_list = self.p;
        }
        if let Some(alpha) = self.alpha {
            config.alpha = alpha;
        }
        if let Some(ell) = self.ell {
            config.ell = ell;
        }
        config.phi = self.phi.or(config.phi);
        if !self.m.is_empty() {
            config.m_list = self.m;
        }
        if !self.rho.is_empty() {
            config.rho_list = self.rho;
        }
        if let Some(b) = self.b {
            config.b_calibration = b;
            config.b_power = b;
        }
        if let Some(level) = self.level {
            config.level = level;
        }
        config.alpha_lo = self.alpha_lo;
        config.alpha_hi = self.alpha_hi;
        config.c_star = self.cstar;
        config.renormalize = self.renormalize;
        config.out = self.out;
        Ok(config)
    }
}

fn configure_threads() -> Result<(), HarnessError> {
    let Ok(raw) = std::env::var("COVTEST_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        HarnessError::Config(format!("COVTEST_THREADS must be a positive integer, got {raw:?}"))
    })?;
    if threads == 0 {
        return Err(HarnessError::Config(String::from("COVTEST_THREADS must be at least 1")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| HarnessError::Config(e.to_string()))
}

/// A calibrated threshold as stable JSON, to stdout or the requested file.
fn run_calibrate(config: &ExperimentConfig) -> Result<(), HarnessError> {
    let p = *config.p_list.first().ok_or_else(|| {
        HarnessError::Config(String::from("calibration needs a dimension"))
    })?;
    let phi = config.phi.ok_or_else(|| {
        HarnessError::Config(String::from("calibration needs an explicit --phi"))
    })?;
    let prof = profile(config.alpha, config.ell, phi, p, config.renormalize)?;
    let cal = calibrate_par(
        &prof,
        config.n,
        config.level,
        config.b_calibration,
        &SeedSpec::new(config.seed, 0, 0),
    )?;
    let mut json = serde_json::to_string_pretty(&cal)
        .map_err(|e| HarnessError::Io(std::io::Error::other(e)))?;
    json.push('\n');
    match &config.out {
        Some(path) => std::fs::write(path, json)?,
        None => print!("{json}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    configure_threads()?;
    match cli.command {
        Command::Power(args) => {
            let config = args.into_config(Scenario::Fig1)?;
            let report: ExperimentReport = match config.scenario {
                Scenario::Fig2 => run_comparison(&config)?,
                _ => run_power_curve(&config)?,
            };
            emit(&report)
        }
        Command::Compare(args) => {
            let config = args.into_config(Scenario::Fig2)?;
            emit(&run_comparison(&config)?)
        }
        Command::Calibrate(args) => {
            let config = args.into_config(Scenario::Custom)?;
            run_calibrate(&config)
        }
        Command::Diagnose(args) => {
            let config = args.into_config(Scenario::NullMoments)?;
            emit(&run_null_diagnostics(&config)?)
        }
        Command::Adaptive(args) => {
            let config = args.into_config(Scenario::Custom)?;
            emit(&run_adaptive_study(&config)?)
        }
        Command::Rate(args) => {
            let config = args.into_config(Scenario::Custom)?;
            emit(&run_rate_sweep(&config)?)
        }
    }
}

fn exit_for(error: &HarnessError) -> u8 {
    match error {
        HarnessError::Config(_) => 2,
        HarnessError::Model { source: CoreError::NotPositiveDefinite { .. }, .. } => 3,
        HarnessError::Core(CoreError::NotPositiveDefinite { .. }) => 3,
        HarnessError::Model { .. } | HarnessError::Core(_) => 2,
        HarnessError::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_for(&error))
        }
    }
}
