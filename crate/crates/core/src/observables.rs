//! Bounded observables as sums of Fourier-space atoms, and the relaxation
//! diagnostics built from them: the distance to equilibrium `Delta_u(tau)`
//! and the equilibrium autocorrelation `c_u(tau)`.
//!
//! With `u(k) = int u(x) e^{ikx} dx`, expectations are
//! `<u>_p = (1/2pi) int u(-k) p(k) dk`. Every integrand here is Hermitian, so
//! line integrals are folded onto `(0, inf)`; pairing `k` with `-k` is also
//! what turns the `1/k` atom of `sign(x)` into a principal value.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{check_mu, Parity};
use crate::error::{Error, Result};
use crate::evolve::{stationary_cf, CharFn};
use crate::numerics::{integrate_finite, integrate_with, Domain, QuadConfig, QuadResult};

pub type SpectrumFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Singularity {
    None,
    /// Finite limit at `k = 0`; the evaluator returns it.
    RemovableAt0,
    /// Odd `1/k` pole; only meaningful as a principal value.
    PrincipalValue1OverK,
}

#[derive(Clone)]
pub enum Atom {
    /// `weight * delta(k - location)`.
    Dirac { weight: Complex64, location: f64 },
    Smooth { evaluator: SpectrumFn, singularity: Singularity },
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Dirac { weight, location } => write!(f, "Dirac({weight} at {location})"),
            Atom::Smooth { singularity, .. } => write!(f, "Smooth({singularity:?})"),
        }
    }
}

/// Fourier image of a bounded real observable. Atoms must together satisfy
/// `u(-k) = conj(u(k))`.
#[derive(Clone)]
pub struct ObservableSpectrum {
    pub name: String,
    pub atoms: Vec<Atom>,
    pub parity: Option<Parity>,
    /// Real-space form, needed only for simulation.
    pub real: Option<RealFn>,
}

impl fmt::Debug for ObservableSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObservableSpectrum")
            .field("name", &self.name)
            .field("atoms", &self.atoms)
            .field("parity", &self.parity)
            .finish()
    }
}

impl ObservableSpectrum {
    /// `u(x)`, if the real-space form is known.
    pub fn eval_real(&self, x: f64) -> Result<f64> {
        match &self.real {
            Some(f) => Ok(f(x)),
            None => Err(Error::domain(format!("observable '{}' has no real-space form", self.name))),
        }
    }

    fn smooth_atoms(&self) -> impl Iterator<Item = (&SpectrumFn, Singularity)> {
        self.atoms.iter().filter_map(|a| match a {
            Atom::Smooth { evaluator, singularity } => Some((evaluator, *singularity)),
            Atom::Dirac { .. } => None,
        })
    }

    fn dirac_atoms(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        self.atoms.iter().filter_map(|a| match a {
            Atom::Dirac { weight, location } => Some((*weight, *location)),
            Atom::Smooth { .. } => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    CosHalf,
    SinHalf,
    Sign,
    Box2,
    SignedBox2,
}

impl Builtin {
    pub const ALL: [Builtin; 5] = [Builtin::CosHalf, Builtin::SinHalf, Builtin::Sign, Builtin::Box2, Builtin::SignedBox2];

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::CosHalf => "cos_half",
            Builtin::SinHalf => "sin_half",
            Builtin::Sign => "sign",
            Builtin::Box2 => "box2",
            Builtin::SignedBox2 => "signed_box2",
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown observable '{s}' (expected cos_half, sin_half, sign, box2 or signed_box2)")))
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `cos(x/2)`, `sin(x/2)`, `sign(x)`, the indicator of `[-2, 2]` and its
/// product with `sign(x)`.
pub fn builtin_observable(which: Builtin) -> ObservableSpectrum {
    let name = which.name().to_string();
    let smooth = |f: fn(f64) -> Complex64, singularity| Atom::Smooth { evaluator: Arc::new(f), singularity };
    let (atoms, parity, real): (Vec<Atom>, Parity, RealFn) = match which {
        Builtin::CosHalf => (
            vec![Atom::Dirac { weight: c(PI), location: 0.5 }, Atom::Dirac { weight: c(PI), location: -0.5 }],
            Parity::Even,
            Arc::new(|x: f64| (0.5 * x).cos()),
        ),
        Builtin::SinHalf => (
            vec![
                Atom::Dirac { weight: Complex64::new(0.0, PI), location: 0.5 },
                Atom::Dirac { weight: Complex64::new(0.0, -PI), location: -0.5 },
            ],
            Parity::Odd,
            Arc::new(|x: f64| (0.5 * x).sin()),
        ),
        Builtin::Sign => (
            vec![smooth(|k| if k == 0.0 { c(0.0) } else { Complex64::new(0.0, 2.0 / k) }, Singularity::PrincipalValue1OverK)],
            Parity::Odd,
            Arc::new(|x: f64| if x == 0.0 { 0.0 } else { x.signum() }),
        ),
        Builtin::Box2 => (
            vec![smooth(
                |k| if k.abs() < 1e-4 { c(4.0 * (1.0 - 2.0 * k * k / 3.0)) } else { c(2.0 * (2.0 * k).sin() / k) },
                Singularity::RemovableAt0,
            )],
            Parity::Even,
            Arc::new(|x: f64| if x.abs() <= 2.0 { 1.0 } else { 0.0 }),
        ),
        Builtin::SignedBox2 => (
            // 2i(1 - cos 2k)/k written without cancellation
            vec![smooth(
                |k| if k == 0.0 { c(0.0) } else { Complex64::new(0.0, 4.0 * k.sin().powi(2) / k) },
                Singularity::RemovableAt0,
            )],
            Parity::Odd,
            Arc::new(|x: f64| if x.abs() <= 2.0 && x != 0.0 { x.signum() } else { 0.0 }),
        ),
    };
    ObservableSpectrum { name, atoms, parity: Some(parity), real: Some(real) }
}

/// Value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesMeta {
    pub observable: String,
    pub mu: f64,
    pub initial: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxationSeries {
    pub taus: Vec<f64>,
    /// `NaN` at failed points.
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub meta: SeriesMeta,
    /// Indices of points whose evaluation failed, with the reason.
    pub failures: Vec<(usize, String)>,
}

impl RelaxationSeries {
    pub fn new(taus: Vec<f64>, values: Vec<f64>, errors: Vec<f64>, meta: SeriesMeta) -> Result<Self> {
        if taus.len() != values.len() || taus.len() != errors.len() {
            return Err(Error::domain("series arrays differ in length"));
        }
        check_taus(&taus)?;
        Ok(RelaxationSeries { taus, values, errors, meta, failures: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

pub(crate) fn check_taus(taus: &[f64]) -> Result<()> {
    if taus.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::domain("times must be finite and nonnegative"));
    }
    if taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("times must be strictly increasing"));
    }
    Ok(())
}

const LINE_TOL: f64 = 1e-12;
const INNER_TOL: f64 = 1e-10;
const OUTER_TOL: f64 = 1e-6;

/// `int_R h(k) dk` as `int_0^inf [h(k) + h(-k)] dk`, split at `kink > 0` if
/// the integrand has one there.
///
/// Features near `0` and near the kink have unit width in `k` however far out
/// the kink lies, so `[0, kink]` is cut at distances `1, 2, 4, ...` from both
/// ends; a single Kronrod panel over a long interval would step over them.
fn folded_line<H: Fn(f64) -> Complex64>(h: &H, kink: Option<f64>, tol: f64) -> Result<QuadResult> {
    let f = |k: f64| h(k) + h(-k);
    match kink {
        Some(b) if b > 0.0 && b.is_finite() => {
            let mut cuts = vec![0.0, b];
            let mut d = 1.0;
            while 2.0 * d < b {
                cuts.push(d);
                cuts.push(b - d);
                d *= 2.0;
            }
            cuts.sort_by(f64::total_cmp);
            let cfg = QuadConfig::with_tol(tol / cuts.len() as f64);
            let mut r = integrate_with(&f, Domain::SemiInfinite(b), &cfg)?;
            for w in cuts.windows(2) {
                let p = integrate_finite(&f, w[0], w[1], &cfg)?;
                r.value += p.value;
                r.abs_error_estimate += p.abs_error_estimate;
                r.evaluations += p.evaluations;
            }
            Ok(r)
        }
        _ => integrate_with(&f, Domain::SemiInfinite(0.0), &QuadConfig::with_tol(tol)),
    }
}

/// `<u>_p` for a characteristic function `p`.
pub fn expectation(u: &ObservableSpectrum, p: &CharFn) -> Result<Estimate> {
    linear_functional(u, &|k| p.eval(k))
}

/// `<u>` under the stationary law of order `mu`.
pub fn stationary_average(u: &ObservableSpectrum, mu: f64) -> Result<Estimate> {
    check_mu(mu)?;
    linear_functional(u, &|k| Ok(c(stationary_cf(mu, k))))
}

/// `(1/2pi) int u(-k) b(k) dk` for a Hermitian `b`.
fn linear_functional(u: &ObservableSpectrum, b: &(dyn Fn(f64) -> Result<Complex64> + Sync)) -> Result<Estimate> {
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for (w, a) in u.dirac_atoms() {
        total += w * b(-a)?;
    }
    for (s, _) in u.smooth_atoms() {
        let failure = RefCell::new(None);
        let h = |k: f64| match b(k) {
            Ok(v) => s(-k) * v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                c(0.0)
            }
        };
        let r = folded_line(&h, None, LINE_TOL)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        total += r.value;
        err += r.abs_error_estimate;
    }
    Ok(Estimate { value: total.re / (2.0 * PI), error: err / (2.0 * PI) })
}

/// Distance to equilibrium with error estimate.
pub fn delta_u_estimate(u: &ObservableSpectrum, p0: &CharFn, mu: f64, tau: f64) -> Result<Estimate> {
    check_mu(mu)?;
    if !(tau >= 0.0) {
        return Err(Error::domain(format!("time must be nonnegative, got {tau}")));
    }
    let shrink = (-tau).exp();
    let damping = -(-mu * tau).exp_m1() / mu;
    // p(k, tau) - p_st(k); vanishes at k = 0, which makes PV atoms integrable
    let bracket = |k: f64| -> Result<Complex64> {
        let a = k.abs().powf(mu);
        Ok(p0.eval(k * shrink)? * (-a * damping).exp() - (-a / mu).exp())
    };
    let r = linear_functional(u, &bracket)?;
    Ok(Estimate { value: r.value.abs(), error: r.error })
}

/// `Delta_u(tau) = |<u>_{p(tau)} - <u>_st|` for the evolution of `p0` under order `mu`.
pub fn delta_u(u: &ObservableSpectrum, p0: &CharFn, mu: f64, tau: f64) -> Result<f64> {
    delta_u_estimate(u, p0, mu, tau).map(|e| e.value)
}

/// Two-point bracket `p_st(k)[p_st(k e^{-tau} - k')/p_st(k e^{-tau}) - p_st(-k')]`.
#[derive(Clone, Copy)]
struct CorrBracket {
    mu: f64,
    shrink: f64,
    damping: f64,
}

impl CorrBracket {
    fn new(mu: f64, tau: f64) -> Self {
        CorrBracket { mu, shrink: (-tau).exp(), damping: -(-mu * tau).exp_m1() / mu }
    }

    fn eval(&self, k: f64, kp: f64) -> f64 {
        let ratio = (-k.abs().powf(self.mu) * self.damping).exp();
        ratio * stationary_cf(self.mu, k * self.shrink - kp) - stationary_cf(self.mu, k) * stationary_cf(self.mu, kp)
    }
}

/// Stationary autocorrelation with error estimate.
pub fn corr_u_estimate(u: &ObservableSpectrum, mu: f64, tau: f64) -> Result<Estimate> {
    check_mu(mu)?;
    if !(tau >= 0.0) {
        return Err(Error::domain(format!("time must be nonnegative, got {tau}")));
    }
    let br = CorrBracket::new(mu, tau);
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    // u(-k) atoms in k, u(k') atoms in k'
    for (w1, a1) in u.dirac_atoms() {
        for (w2, a2) in u.dirac_atoms() {
            total += w1 * w2 * br.eval(-a1, a2);
        }
        for (s2, _) in u.smooth_atoms() {
            let k = -a1;
            let r = folded_line(&|kp: f64| s2(kp) * br.eval(k, kp), Some((k * br.shrink).abs()), LINE_TOL)?;
            total += w1 * r.value;
            err += w1.norm() * r.abs_error_estimate;
        }
    }
    for (s1, _) in u.smooth_atoms() {
        for (w2, a2) in u.dirac_atoms() {
            let kink = a2.abs() / br.shrink;
            let r = folded_line(&|k: f64| s1(-k) * br.eval(k, a2), Some(kink), LINE_TOL)?;
            total += w2 * r.value;
            err += w2.norm() * r.abs_error_estimate;
        }
        for (s2, sing2) in u.smooth_atoms() {
            let r = smooth_pair(s1, s2, sing2, &br)?;
            total += r.value;
            err += r.abs_error_estimate;
        }
    }
    let norm = 4.0 * PI * PI;
    Ok(Estimate { value: total.re / norm, error: err / norm })
}

/// `int dk s1(-k) int dk' s2(k') B(k, k')` by nested adaptive quadrature.
fn smooth_pair(s1: &SpectrumFn, s2: &SpectrumFn, sing2: Singularity, br: &CorrBracket) -> Result<QuadResult> {
    let failure = RefCell::new(None);
    let worst_inner = RefCell::new(0.0f64);
    let inner = |k: f64| -> Complex64 {
        let q = k * br.shrink;
        match folded_line(&|kp: f64| s2(kp) * br.eval(k, kp), Some(q.abs()), INNER_TOL) {
            Ok(r) => {
                let mut w = worst_inner.borrow_mut();
                *w = w.max(r.abs_error_estimate);
                r.value
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                c(0.0)
            }
        }
    };
    let r = folded_line(&|k: f64| s1(-k) * inner(k), None, OUTER_TOL);
    if let Some(e) = failure.into_inner() {
        return Err(match (e, sing2) {
            (Error::NoConvergence(q), Singularity::PrincipalValue1OverK) => Error::NonCancellation(format!(
                "inner principal-value integral failed to converge (best {} ± {:.3e}); the bracket does not vanish fast enough at k' = 0",
                q.value, q.abs_error_estimate
            )),
            (e, _) => e,
        });
    }
    let mut r = r?;
    r.abs_error_estimate += worst_inner.into_inner();
    Ok(r)
}

/// `c_u(tau) = <u(x(t + tau)) u(x(t))> - <u>^2` at stationarity.
pub fn corr_u(u: &ObservableSpectrum, mu: f64, tau: f64) -> Result<f64> {
    corr_u_estimate(u, mu, tau).map(|e| e.value)
}

/// Minimum fraction of points that must succeed for a series to be returned.
pub const MIN_SUCCESS_FRACTION: f64 = 0.8;

fn collect_series<F>(taus: &[f64], meta: SeriesMeta, eval: F) -> Result<RelaxationSeries>
where
    F: Fn(f64) -> Result<Estimate> + Sync,
{
    check_taus(taus)?;
    let results: Vec<Result<Estimate>> = taus.par_iter().map(|&t| eval(t)).collect();
    let mut values = Vec::with_capacity(taus.len());
    let mut errors = Vec::with_capacity(taus.len());
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(e) => {
                values.push(e.value);
                errors.push(e.error);
            }
            Err(e) if e.is_domain() => return Err(e),
            Err(e) => {
                log::warn!("{} at tau = {}: {e}", meta.observable, taus[i]);
                values.push(f64::NAN);
                errors.push(f64::INFINITY);
                failures.push((i, e.to_string()));
            }
        }
    }
    let ok = taus.len() - failures.len();
    if (ok as f64) < MIN_SUCCESS_FRACTION * taus.len() as f64 {
        return Err(Error::Insufficient(format!(
            "{} of {} points failed for {}; first failure: {}",
            failures.len(),
            taus.len(),
            meta.observable,
            failures[0].1
        )));
    }
    Ok(RelaxationSeries { taus: taus.to_vec(), values, errors, meta, failures })
}

pub fn delta_series(u: &ObservableSpectrum, p0: &CharFn, mu: f64, taus: &[f64]) -> Result<RelaxationSeries> {
    let meta = SeriesMeta { observable: u.name.clone(), mu, initial: p0.label.clone() };
    collect_series(taus, meta, |t| delta_u_estimate(u, p0, mu, t))
}

pub fn corr_series(u: &ObservableSpectrum, mu: f64, taus: &[f64]) -> Result<RelaxationSeries> {
    let meta = SeriesMeta { observable: u.name.clone(), mu, initial: "stationary".into() };
    collect_series(taus, meta, |t| corr_u_estimate(u, mu, t))
}
