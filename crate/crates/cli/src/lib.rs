//! Command-line front end: every command writes CSV tables, optional JSON
//! summaries and a `manifest.json` with digests of everything it wrote.

// `!(a < b)` comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod output;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ffpe_core::observables::Builtin;
use serde::Serialize;

/// Uniform points written `lo:hi:n`, or an explicit comma-separated list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Points(pub Vec<f64>);

impl FromStr for Points {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = |what: &str| format!("invalid point specification '{s}': {what}");
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [lo, hi, n] => {
                let lo: f64 = lo.trim().parse().map_err(|_| bad("lower bound"))?;
                let hi: f64 = hi.trim().parse().map_err(|_| bad("upper bound"))?;
                let n: usize = n.trim().parse().map_err(|_| bad("point count"))?;
                if !(lo.is_finite() && hi.is_finite()) || n == 0 || (n > 1 && !(lo < hi)) {
                    return Err(bad("need lo < hi and n >= 1"));
                }
                if n == 1 {
                    return Ok(Points(vec![lo]));
                }
                let h = (hi - lo) / (n - 1) as f64;
                Ok(Points((0..n).map(|i| if i == n - 1 { hi } else { lo + h * i as f64 }).collect()))
            }
            [single] => single
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad("list entry")))
                .collect::<Result<Vec<_>, _>>()
                .map(Points),
            _ => Err(bad("expected lo:hi:n or a comma-separated list")),
        }
    }
}

/// A closed interval written `lo:hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window(pub f64, pub f64);

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s.split_once(':').ok_or_else(|| format!("invalid window '{s}': expected lo:hi"))?;
        let lo: f64 = lo.trim().parse().map_err(|_| format!("invalid window lower bound in '{s}'"))?;
        let hi: f64 = hi.trim().parse().map_err(|_| format!("invalid window upper bound in '{s}'"))?;
        if !(lo < hi) {
            return Err(format!("invalid window '{s}': need lo < hi"));
        }
        Ok(Window(lo, hi))
    }
}

fn parse_builtin(s: &str) -> Result<Builtin, String> {
    s.parse().map_err(|e: ffpe_core::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityArg {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Fourier,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelWhat {
    Zg,
    T1half,
    T22,
    Apply,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ApplyFrom {
    /// Cauchy density through T^1_{1/2}; the result is the standard normal.
    Cauchy,
    /// Standard normal density through T^2_2; the result is the Cauchy density.
    Gauss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Quadrature,
    Mc,
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "ffpe", version, about = "Spectral data for the Levy-Ornstein-Uhlenbeck process", allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Eigenfunction samples in Fourier or real space.
    Eigen(EigenArgs),
    /// Fresnel scaling function, real-space kernels and kernel application.
    Kernel(KernelArgs),
    /// Distance of observables from equilibrium after a relaxation.
    Relax(RelaxArgs),
    /// Stationary autocorrelation of observables.
    Corr(CorrArgs),
    /// Ensemble positions after a simulated relaxation.
    Simulate(SimulateArgs),
    /// Re-run the command recorded in a manifest and compare output digests.
    Rerun(RerunArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct EigenArgs {
    #[arg(long)]
    pub mu: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value = "even")]
    pub parity: ParityArg,
    #[arg(long, value_enum, default_value = "real")]
    pub space: Space,
    /// Coordinate points, `lo:hi:n` or a comma-separated list.
    #[arg(long, default_value = "-10:10:401", allow_hyphen_values = true)]
    pub grid: Points,
    #[arg(long, default_value = "ffpe-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long, value_enum)]
    pub what: KernelWhat,
    /// Lower end of the swept coordinate (z, chi or output x).
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub zmin: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub zmax: f64,
    #[arg(long, default_value_t = 401)]
    pub n: usize,
    /// Fixed x for the t1half and t22 tables.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, value_enum, default_value = "cauchy")]
    pub from: ApplyFrom,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value = "ffpe-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RelaxArgs {
    #[arg(long)]
    pub mu: f64,
    /// Stability index of a stable initial law; omit for a point mass.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Location of the initial law.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, value_delimiter = ',', value_parser = parse_builtin, default_value = "cos_half,sin_half,sign,box2")]
    #[serde(serialize_with = "ser_builtins")]
    pub observables: Vec<Builtin>,
    #[arg(long, default_value = "0.5:3:26")]
    pub taus: Points,
    #[arg(long, value_enum, default_value = "quadrature")]
    pub method: Method,
    /// Ensemble size for the Monte-Carlo method.
    #[arg(long = "N", default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Rate-fit window `lo:hi`; defaults to the full tau range.
    #[arg(long)]
    pub fit_window: Option<Window>,
    #[arg(long, default_value = "ffpe-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CorrArgs {
    #[arg(long)]
    pub mu: f64,
    #[arg(long, value_delimiter = ',', value_parser = parse_builtin, default_value = "cos_half,sin_half,sign,box2")]
    #[serde(serialize_with = "ser_builtins")]
    pub observables: Vec<Builtin>,
    /// Lags; the Monte-Carlo method uses the largest lag and the first spacing.
    #[arg(long, default_value = "0:8:33")]
    pub taus: Points,
    #[arg(long, value_enum, default_value = "quadrature")]
    pub method: Method,
    /// Trajectory length for the Monte-Carlo method.
    #[arg(long = "T", default_value_t = 10_000.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Rate-fit window; early lags carry sizeable faster-mode admixtures.
    #[arg(long, default_value = "3:8")]
    pub fit_window: Window,
    #[arg(long, default_value = "ffpe-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long = "N", default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "ffpe-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    /// Output directory for the re-run; defaults to the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn ser_builtins<S: serde::Serializer>(v: &[Builtin], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|b| b.name()))
}

impl Command {
    pub fn out_mut(&mut self) -> Option<&mut PathBuf> {
        match self {
            Command::Eigen(a) => Some(&mut a.out),
            Command::Kernel(a) => Some(&mut a.out),
            Command::Relax(a) => Some(&mut a.out),
            Command::Corr(a) => Some(&mut a.out),
            Command::Simulate(a) => Some(&mut a.out),
            Command::Rerun(_) => None,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Relax(a) if a.method == Method::Mc => Some(a.seed),
            Command::Corr(a) if a.method == Method::Mc => Some(a.seed),
            Command::Simulate(a) => Some(a.seed),
            _ => None,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Core(ffpe_core::Error),
    Usage(String),
    Io(std::io::Error),
    Json(serde_json::Error),
    /// A re-run produced different bytes than the manifest records.
    Mismatch(String),
}

impl CliError {
    /// 2 for invalid input, 3 for numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_domain() => 2,
            CliError::Usage(_) => 2,
            CliError::Core(_) | CliError::Mismatch(_) => 3,
            CliError::Io(_) | CliError::Json(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Json(e) => write!(f, "json error: {e}"),
            CliError::Mismatch(m) => write!(f, "re-run differs from manifest: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ffpe_core::Error> for CliError {
    fn from(e: ffpe_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

/// Runs a parsed command line; `argv` is recorded in the manifest.
pub fn run(cli: Cli, argv: Vec<String>) -> Result<(), CliError> {
    commands::dispatch(cli.command, argv)
}
