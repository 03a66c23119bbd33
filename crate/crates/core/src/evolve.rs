//! Exact time evolution of characteristic functions and inversion to
//! real-space densities.
//!
//! `p(k, tau) = p(k e^{-tau}) exp(-|k|^mu (1 - e^{-mu tau}) / mu)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::check_mu;
use crate::error::{Error, Result};
use crate::numerics::{integrate_with, ComplexSpline, Domain, Grid, QuadConfig};

/// `exp(-|k|^mu / mu)`.
pub fn stationary_cf(mu: f64, k: f64) -> f64 {
    (-k.abs().powf(mu) / mu).exp()
}

/// Symmetric stable law with characteristic function
/// `exp(i k shift - |scale k|^alpha)`. For `alpha <= 1` the shift is a
/// location (symmetry centre), not a mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StablePDFParams {
    pub alpha: f64,
    pub shift: f64,
    pub scale: f64,
}

impl StablePDFParams {
    pub fn new(alpha: f64, shift: f64, scale: f64) -> Result<Self> {
        check_mu(alpha)?;
        if !(scale > 0.0) {
            return Err(Error::domain(format!("stable scale must be positive, got {scale}")));
        }
        Ok(StablePDFParams { alpha, shift, scale })
    }

    pub fn cf(&self, k: f64) -> Complex64 {
        Complex64::from_polar((-(self.scale * k).abs().powf(self.alpha)).exp(), k * self.shift)
    }
}

type CfFn = dyn Fn(f64) -> Complex64 + Send + Sync;

#[allow(clippy::large_enum_variant)]
#[derive(Clone)]
enum Repr {
    Closed(Arc<CfFn>),
    Sampled(ComplexSpline),
}

/// A characteristic function, either as a closed-form evaluator or as samples
/// on a wave-number grid. `mu` is the order of the dynamics it evolves under.
#[derive(Clone)]
pub struct CharFn {
    repr: Repr,
    pub mu: f64,
    pub label: String,
}

impl fmt::Debug for CharFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Closed(_) => "closed".to_string(),
            Repr::Sampled(s) => format!("grid[{}]", s.grid().len()),
        };
        f.debug_struct("CharFn").field("label", &self.label).field("mu", &self.mu).field("repr", &kind).finish()
    }
}

impl CharFn {
    pub fn closed<F>(mu: f64, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        CharFn { repr: Repr::Closed(Arc::new(f)), mu, label: label.into() }
    }

    pub fn sampled(mu: f64, label: impl Into<String>, grid: &Grid, values: &[Complex64]) -> Result<Self> {
        Ok(CharFn { repr: Repr::Sampled(ComplexSpline::new(grid, values)?), mu, label: label.into() })
    }

    pub fn stationary(mu: f64) -> Self {
        CharFn::closed(mu, format!("stationary(mu={mu})"), move |k| Complex64::new(stationary_cf(mu, k), 0.0))
    }

    /// Point mass at `x0`: `e^{i k x0}`.
    pub fn point_mass(x0: f64, mu: f64) -> Self {
        CharFn::closed(mu, format!("point({x0})"), move |k| Complex64::from_polar(1.0, k * x0))
    }

    pub fn stable(params: StablePDFParams, mu: f64) -> Self {
        let label = format!("stable(alpha={}, shift={}, scale={})", params.alpha, params.shift, params.scale);
        CharFn::closed(mu, label, move |k| params.cf(k))
    }

    pub fn eval(&self, k: f64) -> Result<Complex64> {
        match &self.repr {
            Repr::Closed(f) => Ok(f(k)),
            Repr::Sampled(s) => s.eval(k),
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.repr, Repr::Closed(_))
    }

    pub fn grid(&self) -> Option<&Grid> {
        match &self.repr {
            Repr::Closed(_) => None,
            Repr::Sampled(s) => Some(s.grid()),
        }
    }

    /// Samples this function on `grid`.
    pub fn sample(&self, grid: &Grid) -> Result<CharFn> {
        let values = grid.points().iter().map(|&k| self.eval(k)).collect::<Result<Vec<_>>>()?;
        CharFn::sampled(self.mu, self.label.clone(), grid, &values)
    }

    /// Same function, tagged with a different dynamical order.
    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    /// Closed-form composition `k -> g(k, self(h(k)))` used by transforms;
    /// sampled inputs are resampled on their own grid.
    pub(crate) fn map<H, G>(&self, mu: f64, label: String, h: H, g: G) -> Result<CharFn>
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, Complex64) -> Complex64 + Send + Sync + 'static,
    {
        match &self.repr {
            Repr::Closed(f) => {
                let f = Arc::clone(f);
                Ok(CharFn::closed(mu, label, move |k| g(k, f(h(k)))))
            }
            Repr::Sampled(s) => {
                let grid = s.grid().clone();
                let values = grid
                    .points()
                    .iter()
                    .map(|&k| Ok(g(k, s.eval(h(k))?)))
                    .collect::<Result<Vec<_>>>()?;
                CharFn::sampled(mu, label, &grid, &values)
            }
        }
    }
}

/// Evolves `p` for a time `tau >= 0` under its own order `p.mu`.
pub fn propagate(p: &CharFn, tau: f64) -> Result<CharFn> {
    if !(tau >= 0.0) {
        return Err(Error::domain(format!("propagation time must be nonnegative, got {tau}")));
    }
    check_mu(p.mu)?;
    let mu = p.mu;
    let shrink = (-tau).exp();
    let damping = -(-mu * tau).exp_m1() / mu;
    let label = format!("{} @ tau={tau}", p.label);
    p.map(mu, label, move |k| k * shrink, move |k, v| v * (-k.abs().powf(mu) * damping).exp())
}

/// Characteristic function of the transition density from `x0` after `tau > 0`.
pub fn green_cf(x0: f64, tau: f64, mu: f64, k: f64) -> Result<Complex64> {
    if !(tau > 0.0) {
        return Err(Error::domain(format!("transition density needs tau > 0, got {tau}")));
    }
    check_mu(mu)?;
    let shrink = (-tau).exp();
    let damping = -(-mu * tau).exp_m1() / mu;
    Ok(Complex64::from_polar((-k.abs().powf(mu) * damping).exp(), k * shrink * x0))
}

/// Real-space density `(1/2pi) int p(k) e^{-ikx} dk` at each grid point,
/// computed as `(1/pi) int_0^inf Re[p(k) e^{-ikx}] dk`.
pub fn invert_to_density(p: &CharFn, xs: &Grid) -> Result<Vec<f64>> {
    invert_points(p, xs.points(), 1e-10)
}

pub fn invert_points(p: &CharFn, xs: &[f64], tol: f64) -> Result<Vec<f64>> {
    let upper = match p.grid() {
        Some(g) => Some(g.hi()),
        None => {
            // a point mass (tau = 0) has |p(k)| = 1 forever
            let far = p.eval(1.0e3)?.norm().max(p.eval(1.0e4)?.norm());
            if far > 1e-3 {
                return Err(Error::domain(format!(
                    "{}: characteristic function does not decay (|p(k)| = {far:.3} at large k); propagate to tau > 0 first",
                    p.label
                )));
            }
            None
        }
    };
    let cfg = QuadConfig::with_tol(tol);
    xs.par_iter()
        .map(|&x| {
            let f = |k: f64| match p.eval(k) {
                Ok(v) => Complex64::new((v * Complex64::from_polar(1.0, -k * x)).re, 0.0),
                Err(_) => Complex64::new(f64::NAN, 0.0),
            };
            let domain = match upper {
                Some(hi) => Domain::Finite(0.0, hi),
                None => Domain::SemiInfinite(0.0),
            };
            let r = integrate_with(&f, domain, &cfg)?;
            if !r.value.re.is_finite() {
                return Err(Error::domain("characteristic function could not be evaluated on (0, inf)"));
            }
            Ok(r.re() / PI)
        })
        .collect()
}

/// Sorted distinct relaxation rates `m + mu n` (and `l + mu m + alpha n` when
/// `alpha` is given) not exceeding `cutoff`.
pub fn relaxation_rate_ladder(mu: f64, alpha: Option<f64>, cutoff: f64) -> Result<Vec<f64>> {
    check_mu(mu)?;
    if let Some(a) = alpha {
        check_mu(a)?;
    }
    let mut rates = Vec::new();
    let nmax = |step: f64| (cutoff / step).floor() as u32;
    for l in 0..=nmax(1.0) {
        for m in 0..=nmax(mu) {
            let base = l as f64 + mu * m as f64;
            match alpha {
                None => rates.push(base),
                Some(a) => {
                    for n in 0..=nmax(a) {
                        rates.push(base + a * n as f64);
                    }
                }
            }
        }
    }
    rates.retain(|r| *r <= cutoff + 1e-12);
    rates.sort_by(f64::total_cmp);
    rates.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    Ok(rates)
}

/// The ladder rate closest to `rate`.
pub fn nearest_rate(ladder: &[f64], rate: f64) -> Option<f64> {
    ladder.iter().copied().min_by(|a, b| (a - rate).abs().total_cmp(&(b - rate).abs()))
}

/// `d/dt p + k d/dk p + |k|^mu p` for the propagated `p0`, by central
/// differences in `t` and `k`. Zero for exact solutions.
pub fn ffpe_residual(p0: &CharFn, t: f64, k: f64) -> Result<Complex64> {
    let mu = p0.mu;
    let at = |t: f64, k: f64| propagate(p0, t)?.eval(k);
    let ht = 1e-4 * t.max(1e-2);
    let hk = 1e-4 * k.abs().max(1e-2);
    let d = |f: &dyn Fn(f64) -> Result<Complex64>, x: f64, h: f64| -> Result<Complex64> {
        Ok((f(x + h)? * 8.0 - f(x - h)? * 8.0 - f(x + 2.0 * h)? + f(x - 2.0 * h)?) / (12.0 * h))
    };
    let dt = d(&|s| at(s, k), t, ht)?;
    let dk = d(&|q| at(t, q), k, hk)?;
    Ok(dt + dk * k + at(t, k)? * k.abs().powf(mu))
}
