//! Simulation of the Levy-Ornstein-Uhlenbeck process `dx = -x dt + dL_mu`,
//! where `L_mu` is the symmetric stable process with increments of
//! characteristic function `exp(-dt |k|^mu)`.
//!
//! Every trajectory draws from its own ChaCha8 stream keyed by
//! `(seed, trajectory index)`, and ensemble sums are reduced over fixed chunks
//! in index order, so results do not depend on the number of worker threads.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::eigen::check_mu;
use crate::error::{Error, Result};
use crate::evolve::{CharFn, StablePDFParams};
use crate::observables::{check_taus, stationary_average, ObservableSpectrum, RelaxationSeries, SeriesMeta};

/// Identifies an independent random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Symmetric stable variates with characteristic function `exp(-|k|^alpha)`
/// by the Chambers-Mallows-Stuck transformation.
#[derive(Debug, Clone, Copy)]
pub struct StableSampler {
    alpha: f64,
    inv_alpha: f64,
    tail_power: f64,
}

impl StableSampler {
    pub fn new(alpha: f64) -> Result<Self> {
        check_mu(alpha)?;
        Ok(StableSampler { alpha, inv_alpha: 1.0 / alpha, tail_power: (1.0 - alpha) / alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.alpha == 2.0 {
            let z: f64 = StandardNormal.sample(rng);
            return std::f64::consts::SQRT_2 * z;
        }
        let v = PI * (rng.random::<f64>() - 0.5);
        if self.alpha == 1.0 {
            return v.tan();
        }
        let w: f64 = Exp1.sample(rng);
        let a = self.alpha;
        (a * v).sin() / v.cos().powf(self.inv_alpha) * (((1.0 - a) * v).cos() / w).powf(self.tail_power)
    }
}

/// One draw from the standard symmetric stable law of index `alpha`.
pub fn sample_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    Ok(StableSampler::new(alpha)?.sample(rng))
}

/// Initial distribution of the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    PointMass(f64),
    Stable(StablePDFParams),
    /// The stationary law of the simulated order.
    Stationary,
}

impl Initial {
    pub fn sample<R: Rng + ?Sized>(&self, mu: f64, rng: &mut R) -> Result<f64> {
        Ok(match self {
            Initial::PointMass(x0) => *x0,
            Initial::Stable(p) => p.shift + p.scale * sample_stable(p.alpha, rng)?,
            Initial::Stationary => mu.powf(-1.0 / mu) * sample_stable(mu, rng)?,
        })
    }

    pub fn char_fn(&self, mu: f64) -> CharFn {
        match self {
            Initial::PointMass(x0) => CharFn::point_mass(*x0, mu),
            Initial::Stable(p) => CharFn::stable(*p, mu),
            Initial::Stationary => CharFn::stationary(mu),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Initial::PointMass(x0) => format!("point({x0})"),
            Initial::Stable(p) => format!("stable(alpha={}, shift={}, scale={})", p.alpha, p.shift, p.scale),
            Initial::Stationary => "stationary".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mu: f64,
    pub dt: f64,
    pub steps: usize,
    pub ensemble_size: usize,
    pub seed: u64,
    pub initial: Initial,
}

/// Largest admissible time step.
pub const MAX_DT: f64 = 0.1;

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        check_mu(self.mu)?;
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(Error::domain(format!("time step {} outside (0, {MAX_DT}]", self.dt)));
        }
        if self.steps == 0 {
            return Err(Error::domain("step count must be positive"));
        }
        if let Initial::Stable(p) = self.initial {
            StablePDFParams::new(p.alpha, p.shift, p.scale)?;
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.steps as f64
    }
}

/// Euler-Maruyama update `x' = x - x dt + dt^{1/mu} xi`.
#[derive(Debug, Clone, Copy)]
pub struct Stepper {
    sampler: StableSampler,
    dt: f64,
    noise_scale: f64,
}

impl Stepper {
    pub fn new(mu: f64, dt: f64) -> Result<Self> {
        Ok(Stepper { sampler: StableSampler::new(mu)?, dt, noise_scale: dt.powf(1.0 / mu) })
    }

    /// Update with a given standard stable variate `xi`.
    pub fn advance(&self, x: f64, xi: f64) -> f64 {
        x - x * self.dt + self.noise_scale * xi
    }

    pub fn step<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        self.advance(x, self.sampler.sample(rng))
    }
}

pub fn step_oup<R: Rng + ?Sized>(x: f64, cfg: &SimConfig, rng: &mut R) -> Result<f64> {
    Ok(Stepper::new(cfg.mu, cfg.dt)?.step(x, rng))
}

/// Trajectories per work unit; fixed so the reduction order never changes.
const CHUNK: usize = 2048;

/// Minimum ensemble size for relaxation estimates.
pub const MIN_ENSEMBLE: usize = 10_000;

/// Maps output times onto step indices; each must be a multiple of `dt`.
fn step_indices(taus: &[f64], dt: f64) -> Result<Vec<usize>> {
    check_taus(taus)?;
    taus.iter()
        .map(|&t| {
            let n = (t / dt).round();
            if (n * dt - t).abs() > 1e-9 * t.max(1.0) {
                Err(Error::domain(format!("output time {t} is not a multiple of dt = {dt}")))
            } else {
                Ok(n as usize)
            }
        })
        .collect()
}

fn real_forms(observables: &[ObservableSpectrum]) -> Result<Vec<&(dyn Fn(f64) -> f64 + Send + Sync)>> {
    observables
        .iter()
        .map(|u| {
            u.real
                .as_deref()
                .ok_or_else(|| Error::domain(format!("observable '{}' has no real-space form", u.name)))
        })
        .collect()
}

/// Runs the ensemble and calls `record(slot, x)` at every requested step
/// index; returns per-chunk accumulators folded in index order.
fn run_ensemble<A, F>(cfg: &SimConfig, record_at: &[usize], init: impl Fn() -> A + Sync, record: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(&mut A, usize, f64) + Sync,
{
    cfg.validate()?;
    let stepper = Stepper::new(cfg.mu, cfg.dt)?;
    let last = record_at.iter().copied().max().unwrap_or(0);
    if last > cfg.steps {
        return Err(Error::domain(format!(
            "output time {} exceeds the simulated time {}",
            last as f64 * cfg.dt,
            cfg.total_time()
        )));
    }
    let chunks = cfg.ensemble_size.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            for i in c * CHUNK..((c + 1) * CHUNK).min(cfg.ensemble_size) {
                let mut rng = RngStream::new(cfg.seed, i as u64).rng();
                let mut x = cfg.initial.sample(cfg.mu, &mut rng)?;
                let mut next = 0;
                for step in 0..=last {
                    if step > 0 {
                        x = stepper.step(x, &mut rng);
                    }
                    while next < record_at.len() && record_at[next] == step {
                        record(&mut acc, next, x);
                        next += 1;
                    }
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Positions of all ensemble members after `cfg.steps` steps.
pub fn simulate_ensemble(cfg: &SimConfig) -> Result<Vec<f64>> {
    let parts = run_ensemble(cfg, &[cfg.steps], Vec::new, |v: &mut Vec<f64>, _, x| v.push(x))?;
    Ok(parts.concat())
}

/// Empirical characteristic function of the ensemble at wave numbers `ks`,
/// recorded at every step index in `record_at`; `[time][k]`.
pub fn ensemble_cf(cfg: &SimConfig, record_at: &[usize], ks: &[f64]) -> Result<Vec<Vec<rustfft::num_complex::Complex64>>> {
    let zero = vec![vec![Complex::new(0.0, 0.0); ks.len()]; record_at.len()];
    let parts = run_ensemble(
        cfg,
        record_at,
        || zero.clone(),
        |acc, slot, x| {
            for (a, &k) in acc[slot].iter_mut().zip(ks) {
                *a += Complex::from_polar(1.0, k * x);
            }
        },
    )?;
    let n = cfg.ensemble_size as f64;
    let mut total = zero.clone();
    for part in parts {
        for (t, p) in total.iter_mut().zip(part) {
            for (a, b) in t.iter_mut().zip(p) {
                *a += b;
            }
        }
    }
    Ok(total.into_iter().map(|row| row.into_iter().map(|v| v / n).collect()).collect())
}

/// `|<u(x(tau))> - <u>_st|` with ensemble standard errors, one series per
/// observable. The equilibrium reference is the stationary average computed
/// from the stationary characteristic function.
pub fn ensemble_delta(cfg: &SimConfig, observables: &[ObservableSpectrum], taus: &[f64]) -> Result<Vec<RelaxationSeries>> {
    if cfg.ensemble_size < MIN_ENSEMBLE {
        return Err(Error::domain(format!("ensemble size {} below the minimum {MIN_ENSEMBLE}", cfg.ensemble_size)));
    }
    let idx = step_indices(taus, cfg.dt)?;
    let forms = real_forms(observables)?;
    let refs: Vec<f64> = observables.iter().map(|u| stationary_average(u, cfg.mu).map(|e| e.value)).collect::<Result<_>>()?;
    let (no, nt) = (observables.len(), taus.len());
    // sums and sums of squares, [observable][time]
    let zero = vec![[0.0f64; 2]; no * nt];
    let parts = run_ensemble(
        cfg,
        &idx,
        || zero.clone(),
        |acc, slot, x| {
            for (o, f) in forms.iter().enumerate() {
                let v = f(x);
                let a = &mut acc[o * nt + slot];
                a[0] += v;
                a[1] += v * v;
            }
        },
    )?;
    let mut total = zero;
    for part in parts {
        for (a, b) in total.iter_mut().zip(part) {
            a[0] += b[0];
            a[1] += b[1];
        }
    }
    let n = cfg.ensemble_size as f64;
    observables
        .iter()
        .enumerate()
        .map(|(o, u)| {
            let mut values = Vec::with_capacity(nt);
            let mut errors = Vec::with_capacity(nt);
            for j in 0..nt {
                let [s, s2] = total[o * nt + j];
                let mean = s / n;
                let var = ((s2 - s * mean) / (n - 1.0)).max(0.0);
                values.push((mean - refs[o]).abs());
                errors.push((var / n).sqrt());
            }
            RelaxationSeries::new(
                taus.to_vec(),
                values,
                errors,
                SeriesMeta { observable: u.name.clone(), mu: cfg.mu, initial: cfg.initial.label() },
            )
        })
        .collect()
}

/// `c(l) = (1/(n-l)) sum_t (u_t - mean)(u_{t+l} - mean)` for `l <= max_lag`,
/// through a zero-padded FFT.
pub fn autocovariance(u: &[f64], max_lag: usize) -> Vec<f64> {
    let n = u.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = u.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut buf: Vec<Complex<f64>> = u.iter().map(|v| Complex::new(v - mean, 0.0)).collect();
    buf.resize(size, Complex::new(0.0, 0.0));
    fwd.process(&mut buf);
    buf.iter_mut().for_each(|z| *z = Complex::new(z.norm_sqr(), 0.0));
    inv.process(&mut buf);
    (0..=max_lag.min(n - 1)).map(|l| buf[l].re / size as f64 / (n - l) as f64).collect()
}

/// Batch-count bounds for autocorrelation standard errors. Each batch spans
/// at least `BATCH_LAGS` maximum lags; with fewer than ten batches the error
/// estimate itself scatters too much to be useful.
pub const MIN_AUTOCORR_BATCHES: usize = 10;
pub const MAX_AUTOCORR_BATCHES: usize = 50;
const BATCH_LAGS: f64 = 10.0;

/// Required ratio of simulated time to the largest lag.
pub const MIN_TIME_PER_LAG: f64 = 100.0;

/// Autocorrelation of each observable along one long trajectory, at lags
/// `0, lag_step, 2 lag_step, ... <= max_lag`.
///
/// Standard errors come from the spread of the same estimator over
/// consecutive batches, divided by the square root of the batch count. Batch estimates are correlated at their boundaries and each
/// subtracts its own mean, so these errors are conservative.
pub fn trajectory_autocorr(
    cfg: &SimConfig,
    observables: &[ObservableSpectrum],
    max_lag: f64,
    lag_step: f64,
) -> Result<Vec<RelaxationSeries>> {
    cfg.validate()?;
    if !(max_lag > 0.0) {
        return Err(Error::domain("maximum lag must be positive"));
    }
    let required = MIN_TIME_PER_LAG * max_lag;
    if cfg.total_time() < required {
        return Err(Error::Insufficient(format!(
            "trajectory of length {} is too short for lags up to {max_lag}; need at least {required}",
            cfg.total_time()
        )));
    }
    let stride = step_indices(&[lag_step], cfg.dt)?[0].max(1);
    let max_steps = step_indices(&[(max_lag / (stride as f64 * cfg.dt)).floor() * stride as f64 * cfg.dt], cfg.dt)?[0];
    let forms = real_forms(observables)?;

    let stepper = Stepper::new(cfg.mu, cfg.dt)?;
    let mut rng = RngStream::new(cfg.seed, 0).rng();
    let mut x = cfg.initial.sample(cfg.mu, &mut rng)?;
    let n = cfg.steps + 1;
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(n); observables.len()];
    for step in 0..n {
        if step > 0 {
            x = stepper.step(x, &mut rng);
        }
        for (s, f) in series.iter_mut().zip(&forms) {
            s.push(f(x));
        }
    }

    let lags: Vec<usize> = (0..=max_steps).step_by(stride).collect();
    let batches = ((cfg.total_time() / (BATCH_LAGS * max_lag)) as usize).clamp(MIN_AUTOCORR_BATCHES, MAX_AUTOCORR_BATCHES);
    let batch_len = n / batches;
    observables
        .iter()
        .zip(&series)
        .map(|(u, s)| {
            let full = autocovariance(s, max_steps);
            let per_batch: Vec<Vec<f64>> = (0..batches)
                .into_par_iter()
                .map(|b| autocovariance(&s[b * batch_len..(b + 1) * batch_len], max_steps))
                .collect();
            let nb = batches as f64;
            let errors = lags
                .iter()
                .map(|&l| {
                    let m = per_batch.iter().map(|c| c[l]).sum::<f64>() / nb;
                    let var = per_batch.iter().map(|c| (c[l] - m).powi(2)).sum::<f64>() / (nb - 1.0);
                    (var / nb).sqrt()
                })
                .collect();
            RelaxationSeries::new(
                lags.iter().map(|&l| l as f64 * cfg.dt).collect(),
                lags.iter().map(|&l| full[l]).collect(),
                errors,
                SeriesMeta { observable: u.name.clone(), mu: cfg.mu, initial: format!("trajectory from {}", cfg.initial.label()) },
            )
        })
        .collect()
}

/// Sample median and interquartile range.
pub fn quartiles(values: &mut [f64]) -> (f64, f64, f64) {
    values.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (values.len() - 1) as f64;
        let (i, frac) = (pos.floor() as usize, pos.fract());
        if i + 1 < values.len() {
            values[i] * (1.0 - frac) + values[i + 1] * frac
        } else {
            values[i]
        }
    };
    (q(0.25), q(0.5), q(0.75))
}
