//! Nonlinear wave-number rescaling `[T p](kappa) = p(alpha^{1/mu} sign(kappa) |kappa|^{1/alpha})`
//! and its real-space kernels for the Cauchy/Gaussian pair.
//!
//! `T^1_{1/2}` maps the Cauchy process onto the Gaussian one, `T^2_2` is its
//! inverse. Both kernels are built from the Fresnel scaling function
//! `g(z) = cos(pi z^2/2) (1/2 - C(z)) + sin(pi z^2/2) (1/2 - S(z))`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{check_mu, Sampled};
use crate::error::{Error, Result};
use crate::evolve::{propagate, CharFn};
use crate::numerics::{integrate_finite, integrate_with, CubicSpline, Domain, Grid, QuadConfig, QuadResult};
use crate::specfun::{fresnel, fresnel_aux};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformSpec {
    pub mu: f64,
    pub alpha: f64,
}

impl TransformSpec {
    pub fn new(mu: f64, alpha: f64) -> Result<Self> {
        check_mu(mu)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(format!("transform exponent alpha must be positive, got {alpha}")));
        }
        Ok(TransformSpec { mu, alpha })
    }

    /// Order of the transformed process, `mu / alpha`.
    pub fn target_mu(&self) -> f64 {
        self.mu / self.alpha
    }

    /// Factor multiplying time in the transformed equation.
    pub fn time_factor(&self) -> f64 {
        self.alpha
    }

    pub fn inverse(&self) -> TransformSpec {
        TransformSpec { mu: self.mu / self.alpha, alpha: 1.0 / self.alpha }
    }

    /// Wave number `alpha^{1/mu} sign(kappa) |kappa|^{1/alpha}` at which the
    /// input is read.
    pub fn source_k(&self, kappa: f64) -> f64 {
        self.alpha.powf(1.0 / self.mu) * kappa.signum() * kappa.abs().powf(1.0 / self.alpha)
    }
}

/// `[T p](kappa)`. The result evolves under order `mu / alpha`.
pub fn transform_cf(spec: &TransformSpec, p: &CharFn) -> Result<CharFn> {
    let s = *spec;
    let label = format!("T[mu={}, alpha={}]({})", s.mu, s.alpha, p.label);
    p.map(s.target_mu(), label, move |k| s.source_k(k), |_, v| v)
}

/// Fresnel scaling function `g(z)`.
///
/// For `z >= 0` it is the real part of the cancellation-free auxiliary
/// function; for `z < 0`, `g(z) = cos + sin - g(|z|)` at phase `pi z^2/2`.
pub fn g_fresnel(z: f64) -> f64 {
    let gz = fresnel_aux(z.abs()).re;
    if z >= 0.0 {
        gz
    } else {
        let q = 0.25 * z * z;
        let theta = 2.0 * PI * (q - q.floor());
        theta.cos() + theta.sin() - gz
    }
}

/// `z g(z)`.
pub fn zg(z: f64) -> f64 {
    z * g_fresnel(z)
}

/// `g(z)` directly from the Fresnel integrals, without the auxiliary function.
/// Loses accuracy for large `|z|`; used as a cross-check.
pub fn g_from_fresnel_integrals(z: f64) -> f64 {
    let (c, s) = fresnel(z);
    let theta = 0.5 * PI * z * z;
    theta.cos() * (0.5 - c) + theta.sin() * (0.5 - s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelId {
    /// `T^1_{1/2}(chi, x)`: Cauchy (`x`) to Gaussian (`chi`).
    T1Half,
    /// `T^2_2(x, chi)`: Gaussian (`chi`) to Cauchy (`x`).
    T22,
}

impl std::str::FromStr for KernelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t1half" | "T1_half" => Ok(KernelId::T1Half),
            "t22" | "T2_2" => Ok(KernelId::T22),
            other => Err(Error::domain(format!("unknown kernel '{other}' (expected t1half or t22)"))),
        }
    }
}

/// `z = -sign(x) chi / sqrt(pi |x|)`.
fn kernel_z(chi: f64, x: f64) -> f64 {
    -x.signum() * chi / (PI * x.abs()).sqrt()
}

/// Real-space kernel value. Arguments are `(chi, x)` for `T1Half` and
/// `(x, chi)` for `T22`; `x = 0` is the singular line.
///
/// `T^1_{1/2}(chi, x) = -sign(x) zg(z) / chi = g(z) / sqrt(pi |x|)`, which
/// is finite at `chi = 0`; `T^2_2(x, chi) = -zg(z) / |x| = (chi / x) T^1_{1/2}(chi, x)`.
pub fn kernel_real(id: KernelId, first: f64, second: f64) -> Result<f64> {
    let (chi, x) = match id {
        KernelId::T1Half => (first, second),
        KernelId::T22 => (second, first),
    };
    if x == 0.0 {
        return Err(Error::domain("kernel is singular at x = 0"));
    }
    let z = kernel_z(chi, x);
    Ok(match id {
        KernelId::T1Half => g_fresnel(z) / (PI * x.abs()).sqrt(),
        KernelId::T22 => -zg(z) / x.abs(),
    })
}

/// Kernel by direct quadrature of its Fourier representation
/// `(1/pi) Re int_0^inf kappa^n e^{i(kappa chi - kappa^2 x/2)} dkappa`, with
/// `n = 0` for `T1` and `n = 1` for `T2`. The contour runs along the real
/// axis to the stationary point `chi/x` (when positive) and leaves it along
/// the steepest-descent ray, where the integrand is a Gaussian of unit height.
pub fn kernel_by_quadrature(id: KernelId, first: f64, second: f64, tol: f64) -> Result<f64> {
    let (chi, x) = match id {
        KernelId::T1Half => (first, second),
        KernelId::T22 => (second, first),
    };
    if x == 0.0 {
        return Err(Error::domain("kernel is singular at x = 0"));
    }
    let n = if id == KernelId::T22 { 1 } else { 0 };
    let g = move |k: Complex64| k.powi(n) * (Complex64::i() * (k * chi - 0.5 * x * k * k)).exp();
    let dir = Complex64::from_polar(1.0, -FRAC_PI_4 * x.signum());
    let cfg = QuadConfig::with_tol(tol);
    let kstar = (chi / x).max(0.0);
    let mut total = integrate_finite(&|k: f64| g(Complex64::new(k, 0.0)), 0.0, kstar, &cfg)?.value;
    let ray = |s: f64| dir * g(kstar + dir * s);
    total += integrate_with(&ray, Domain::SemiInfinite(0.0), &cfg)?.value;
    Ok(total.re / PI)
}

/// Largest `s = |z|` integrated explicitly on the oscillatory side; beyond it
/// the remainder is `O(s^{-3})` relative to the density scale.
const OSC_S_MAX: f64 = 60.0;

/// Output of a kernel application with per-point quadrature error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelOutput {
    pub samples: Sampled,
    pub errors: Vec<f64>,
}

/// Applies a real-space kernel to a density given as a closure, at every
/// point of `out`. Points are independent and evaluated in parallel.
pub fn apply_kernel_density<F>(id: KernelId, f: F, out: &Grid, tol: f64) -> Result<KernelOutput>
where
    F: Fn(f64) -> f64 + Sync,
{
    let res: Vec<QuadResult> = out
        .points()
        .par_iter()
        .map(|&y| match id {
            KernelId::T1Half => apply_t1_at(&f, y, tol),
            KernelId::T22 => apply_t22_at(&f, y, tol),
        })
        .collect::<Result<_>>()?;
    Ok(KernelOutput {
        samples: Sampled { grid: out.clone(), values: res.iter().map(|r| r.re()).collect() },
        errors: res.iter().map(|r| r.abs_error_estimate).collect(),
    })
}

/// Kernel application to sampled data: natural cubic interpolation inside the
/// sample hull, zero outside.
pub fn apply_kernel_sampled(id: KernelId, f: &Sampled, out: &Grid, tol: f64) -> Result<KernelOutput> {
    let spline = CubicSpline::new(f.xs(), &f.values)?;
    let (lo, hi) = (f.grid.lo(), f.grid.hi());
    apply_kernel_density(id, move |x| if x < lo || x > hi { 0.0 } else { spline.eval(x).unwrap_or(0.0) }, out, tol)
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Integrates `h(s)` over `(0, s_max)` on panels `[sqrt(2j), sqrt(2j+2)]`,
/// which each hold one period of `cos(pi s^2 / 2)`.
fn oscillatory_panels<H: Fn(f64) -> Complex64>(h: &H, s_max: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    let mut total = QuadResult { value: real(0.0), abs_error_estimate: 0.0, evaluations: 0 };
    let mut a = 0.0;
    let mut j: f64 = 1.0;
    while a < s_max {
        let b = (2.0 * j).sqrt().min(s_max);
        let r = integrate_finite(h, a, b, cfg)?;
        total.value += r.value;
        total.abs_error_estimate += r.abs_error_estimate;
        total.evaluations += r.evaluations;
        a = b;
        j += 1.0;
    }
    Ok(total)
}

/// `int T1(chi, x) f(x) dx`. Each half-line is handled separately: where
/// `z > 0` (no oscillation) with `x = +-t^2`; where `z < 0` with `s = |z|`.
fn apply_t1_at<F: Fn(f64) -> f64>(f: &F, chi: f64, tol: f64) -> Result<QuadResult> {
    let cfg = QuadConfig::with_tol(tol);
    let panel_cfg = QuadConfig::with_tol(0.01 * tol);
    let mut total = QuadResult { value: real(0.0), abs_error_estimate: 0.0, evaluations: 0 };
    for side in [1.0f64, -1.0] {
        // sign of z on this side is -side * sign(chi)
        let oscillatory = chi != 0.0 && -side * chi.signum() < 0.0;
        let r = if !oscillatory {
            // x = side t^2, dx = 2t dt, T1 = g(z) / (sqrt(pi) t)
            let h = move |t: f64| {
                if t == 0.0 {
                    return real(0.0);
                }
                let z = kernel_z(chi, side * t * t);
                real(2.0 * g_fresnel(z) * f(side * t * t) / PI.sqrt())
            };
            integrate_with(&h, Domain::SemiInfinite(0.0), &cfg)?
        } else {
            // s = |chi| / (sqrt(pi) t), x = side chi^2 / (pi s^2)
            let ac = chi.abs();
            let h = move |s: f64| {
                if s == 0.0 {
                    return real(0.0);
                }
                let x = side * chi * chi / (PI * s * s);
                real(g_fresnel(-s) * 2.0 * ac / (PI * s * s) * f(x))
            };
            oscillatory_panels(&h, OSC_S_MAX, &panel_cfg)?
        };
        total.value += r.value;
        total.abs_error_estimate += r.abs_error_estimate;
        total.evaluations += r.evaluations;
    }
    Ok(total)
}

/// `int T2(x, chi) f(chi) dchi`, integrated in `z = -sign(x) chi / sqrt(pi |x|)`,
/// where `T2 dchi = (chi / x) g(z) dz`.
fn apply_t22_at<F: Fn(f64) -> f64>(f: &F, x: f64, tol: f64) -> Result<QuadResult> {
    if x == 0.0 {
        return Err(Error::domain("T2_2 output is singular at x = 0"));
    }
    let c = (PI * x.abs()).sqrt();
    let chi_of = move |z: f64| -x.signum() * z * c;
    let integrand = move |z: f64| {
        let chi = chi_of(z);
        real(chi / x * g_fresnel(z) * f(chi))
    };
    let cfg = QuadConfig::with_tol(tol);
    let smooth = integrate_with(&integrand, Domain::SemiInfinite(0.0), &cfg)?;
    // oscillatory side z < 0: march over period panels until two are quiet
    let panel_cfg = QuadConfig::with_tol(0.01 * tol);
    let mut total = smooth;
    let mut a: f64 = 0.0;
    let mut j: f64 = 1.0;
    let mut quiet = 0;
    while quiet < 4 {
        let b = (2.0 * j).sqrt();
        let r = integrate_finite(&|s: f64| integrand(-s), a, b, &panel_cfg)?;
        total.value += r.value;
        total.abs_error_estimate += r.abs_error_estimate;
        total.evaluations += r.evaluations;
        // the envelope sqrt(2) |chi/x| f(chi) bounds the remaining panels once small
        let env = (2f64).sqrt() * (chi_of(-b) / x).abs() * f(chi_of(-b)).abs();
        if env * (b - a) < 0.01 * tol && r.value.norm() < 0.1 * tol {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if b > 1.0e4 {
            return Err(Error::NoConvergence(total));
        }
        a = b;
        j += 1.0;
    }
    Ok(total)
}

/// `max |T[propagate(p0, tau; mu)] - propagate(T[p0], alpha tau; mu/alpha)|`
/// over the default wave-number grid.
pub fn pde_conjugation_check(mu: f64, alpha: f64, p0: &CharFn, tau: f64) -> Result<f64> {
    let spec = TransformSpec::new(mu, alpha)?;
    if spec.target_mu() > 2.0 + 1e-12 {
        return Err(Error::domain(format!(
            "mu / alpha = {} exceeds 2; the transformed equation is not a valid FFPE",
            spec.target_mu()
        )));
    }
    let p0 = p0.clone().with_mu(mu);
    let lhs = transform_cf(&spec, &propagate(&p0, tau)?)?;
    let rhs = propagate(&transform_cf(&spec, &p0)?, spec.time_factor() * tau)?;
    let grid = Grid::default_wavenumber();
    let mut worst = (lhs.eval(0.0)? - rhs.eval(0.0)?).norm();
    for &k in grid.points() {
        worst = worst.max((lhs.eval(k)? - rhs.eval(k)?).norm());
    }
    Ok(worst)
}
