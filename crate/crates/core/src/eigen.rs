//! Eigenfunctions of the fractional Fokker-Planck operator.
//!
//! Fourier space: `phi+ = |k|^{-lambda} e^{-|k|^mu/mu}` and
//! `phi- = i sign(k) |k|^{-lambda} e^{-|k|^mu/mu}`. Real-space evaluators use
//! prefactors that make them exact inverse transforms of these, so the
//! recurrences hold without extra constants:
//!
//! * `phi(lambda - mu) = [(1 - lambda) + x d/dx] phi(lambda)`
//! * `d/dx phi+(lambda) = -phi-(lambda - 1)`, `d/dx phi-(lambda) = phi+(lambda - 1)`

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{integrate_with, Domain, Grid, QuadConfig, SpacingPolicy};
use crate::specfun::{gamma, kummer_m};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// `+1` for even, `-1` for odd.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" | "+" => Ok(Parity::Even),
            "odd" | "-" => Ok(Parity::Odd),
            other => Err(Error::domain(format!("unknown parity '{other}' (expected even or odd)"))),
        }
    }
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu <= 2.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("stability exponent mu = {mu} outside (0, 2]")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenFunction {
    pub parity: Parity,
    pub lambda: f64,
    pub mu: f64,
}

impl EigenFunction {
    pub fn new(parity: Parity, lambda: f64, mu: f64) -> Result<Self> {
        check_mu(mu)?;
        if !lambda.is_finite() {
            return Err(Error::domain("eigenvalue must be finite"));
        }
        Ok(EigenFunction { parity, lambda, mu })
    }

    pub fn fourier(&self, k: f64) -> Result<Complex64> {
        phi_fourier(self, k)
    }

    /// Real-space value: closed forms for `mu = 1` and `mu = 2`, quadrature
    /// otherwise.
    pub fn real(&self, x: f64) -> Result<f64> {
        if self.mu == 2.0 {
            phi_real_gauss(self.parity, self.lambda, x)
        } else if self.mu == 1.0 {
            phi_real_cauchy(self.parity, self.lambda, x)
        } else {
            phi_real_numeric(self, x)
        }
    }
}

fn require_fourier_domain(lambda: f64) -> Result<()> {
    if lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "lambda = {lambda}: Fourier-space eigenfunctions need lambda < 1 (not integrable at k = 0 otherwise)"
        )))
    }
}

pub fn phi_fourier(ef: &EigenFunction, k: f64) -> Result<Complex64> {
    require_fourier_domain(ef.lambda)?;
    if k == 0.0 {
        if ef.lambda > 0.0 {
            return Err(Error::domain(format!("phi(k) diverges at k = 0 for lambda = {} > 0", ef.lambda)));
        }
        let v = if ef.lambda == 0.0 && ef.parity == Parity::Even { 1.0 } else { 0.0 };
        return Ok(Complex64::new(v, 0.0));
    }
    let ak = k.abs();
    let m = ak.powf(-ef.lambda) * (-ak.powf(ef.mu) / ef.mu).exp();
    Ok(match ef.parity {
        Parity::Even => Complex64::new(m, 0.0),
        Parity::Odd => Complex64::new(0.0, k.signum() * m),
    })
}

/// Real-space eigenfunction of the Gaussian process (`mu = 2`), any real `lambda`.
///
/// Where the Gamma prefactor has a pole (even: `lambda = 2n+1`, odd:
/// `lambda = 2n+2`) it is replaced by 1, leaving the Laguerre polynomial forms
/// `(1/2pi) 2^{(1-lambda)/2} M(-n, 1/2, -x^2/2)` and
/// `(1/2pi) 2^{1-lambda/2} x M(-n, 3/2, -x^2/2)`.
pub fn phi_real_gauss(parity: Parity, lambda: f64, x: f64) -> Result<f64> {
    let z = -0.5 * x * x;
    match parity {
        Parity::Even => {
            let a = 0.5 * (1.0 - lambda);
            let g = gamma(a).unwrap_or(1.0);
            Ok(kummer_m(a, 0.5, z)? * 2f64.powf(a) * g / (2.0 * PI))
        }
        Parity::Odd => {
            let a = 1.0 - 0.5 * lambda;
            let g = gamma(a).unwrap_or(1.0);
            Ok(x * kummer_m(a, 1.5, z)? * 2f64.powf(a) * g / (2.0 * PI))
        }
    }
}

/// Real-space eigenfunction of the Cauchy process (`mu = 1`), `lambda < 1`.
pub fn phi_real_cauchy(parity: Parity, lambda: f64, x: f64) -> Result<f64> {
    require_fourier_domain(lambda)?;
    if lambda <= 0.0 && lambda == lambda.round() && lambda >= -170.0 {
        // (1 + ix)^{-(n+1)} n! = n! (1 - ix)^{n+1} / (1 + x^2)^{n+1}
        let n = (-lambda) as i32;
        let w = Complex64::new(1.0, -x).powi(n + 1) / (1.0 + x * x).powi(n + 1);
        let f = gamma(n as f64 + 1.0)? / PI;
        return Ok(match parity {
            Parity::Even => f * w.re,
            Parity::Odd => -f * w.im,
        });
    }
    let s = 1.0 - lambda;
    let envelope = gamma(s)? / PI * (1.0 + x * x).powf(-0.5 * s);
    let phase = s * x.atan();
    Ok(match parity {
        Parity::Even => envelope * phase.cos(),
        Parity::Odd => envelope * phase.sin(),
    })
}

/// Real-space eigenfunction by inverse Fourier quadrature:
/// `(1/pi) int_0^inf |phi(k)| cos(kx) dk` (even) or `... sin(kx) dk` (odd).
pub fn phi_real_numeric(ef: &EigenFunction, x: f64) -> Result<f64> {
    phi_real_numeric_tol(ef, x, 1e-11)
}

pub fn phi_real_numeric_tol(ef: &EigenFunction, x: f64, tol: f64) -> Result<f64> {
    require_fourier_domain(ef.lambda)?;
    check_mu(ef.mu)?;
    if ef.parity == Parity::Odd && x == 0.0 {
        return Ok(0.0);
    }
    let (lambda, mu) = (ef.lambda, ef.mu);
    let trig = move |kx: f64| match ef.parity {
        Parity::Even => kx.cos(),
        Parity::Odd => kx.sin(),
    };
    let cfg = QuadConfig::with_tol(tol);
    let r = if lambda > 0.0 {
        // k = u^{1/(1-lambda)} absorbs the k^{-lambda} endpoint singularity
        let p = 1.0 / (1.0 - lambda);
        let f = move |u: f64| {
            let k = u.powf(p);
            Complex64::new(p * (-k.powf(mu) / mu).exp() * trig(k * x), 0.0)
        };
        integrate_with(&f, Domain::SemiInfinite(0.0), &cfg)?
    } else {
        let f = move |k: f64| Complex64::new(k.powf(-lambda) * (-k.powf(mu) / mu).exp() * trig(k * x), 0.0);
        integrate_with(&f, Domain::SemiInfinite(0.0), &cfg)?
    };
    Ok(r.re() / PI)
}

/// Index `(m, n)` of the eigenvalue `-(m + mu n)`, with an optional third
/// index `l` for the rates `-(l + mu m + alpha n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
pub struct LadderIndex {
    pub m: u32,
    pub n: u32,
    pub l: Option<u32>,
}

impl LadderIndex {
    pub fn new(m: u32, n: u32) -> Self {
        LadderIndex { m, n, l: None }
    }

    pub fn eigenvalue(&self, mu: f64) -> f64 {
        -(self.m as f64 + mu * self.n as f64)
    }
}

/// Real-space function sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sampled {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Sampled {
    pub fn from_fn<F: FnMut(f64) -> Result<f64>>(grid: Grid, mut f: F) -> Result<Self> {
        let values = grid.points().iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Ok(Sampled { grid, values })
    }

    pub fn xs(&self) -> &[f64] {
        self.grid.points()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderFunction {
    pub samples: Sampled,
    pub parity: Parity,
    pub index: LadderIndex,
    pub mu: f64,
}

impl LadderFunction {
    pub fn eigenvalue(&self) -> f64 {
        self.index.eigenvalue(self.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderStep {
    /// `(m, n) -> (m, n+1)`, same parity.
    RaiseN,
    /// `(m, n) -> (m+1, n)`, parity flips.
    RaiseM,
}

/// Default bound on the relative discretization error estimate of
/// [`ladder_apply`].
pub const LADDER_TOL: f64 = 1e-3;

/// Applies one ladder operator to a sampled eigenfunction.
///
/// Fails with [`Error::Discretization`] when the three- and five-point
/// derivative estimates disagree by more than `tol` relative to the largest
/// derivative magnitude.
pub fn ladder_apply(step: LadderStep, f: &LadderFunction, tol: f64) -> Result<LadderFunction> {
    let h = f
        .samples
        .grid
        .step()
        .ok_or_else(|| Error::domain("ladder operators need a uniform x-grid"))?;
    let (d5, d3) = derivative_samples(&f.samples.values, h)?;
    let scale = d5.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let estimate = d5.iter().zip(&d3).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale.max(f64::MIN_POSITIVE);
    if estimate > tol {
        return Err(Error::Discretization { estimate, tol });
    }
    let xs = f.samples.xs();
    let (values, parity, index) = match step {
        LadderStep::RaiseN => {
            let c = f.index.m as f64 + 1.0 + f.mu * f.index.n as f64;
            let v = f.samples.values.iter().zip(&d5).zip(xs).map(|((p, dp), x)| c * p + x * dp).collect();
            (v, f.parity, LadderIndex { n: f.index.n + 1, ..f.index })
        }
        LadderStep::RaiseM => {
            // output parity +: +d/dx of the odd input; output -: -d/dx of the even input
            let out = f.parity.flip();
            let s = out.sign();
            let v = d5.iter().map(|d| s * d).collect();
            (v, out, LadderIndex { m: f.index.m + 1, ..f.index })
        }
    };
    Ok(LadderFunction {
        samples: Sampled { grid: f.samples.grid.clone(), values },
        parity,
        index,
        mu: f.mu,
    })
}

/// Five-point and three-point first derivatives on a uniform grid, one-sided
/// at the two outermost points of each edge.
fn derivative_samples(v: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = v.len();
    if n < 5 {
        return Err(Error::domain("at least five samples are needed for derivatives"));
    }
    let mut d5 = vec![0.0; n];
    let mut d3 = vec![0.0; n];
    for i in 0..n {
        if i >= 2 && i + 2 < n {
            d5[i] = (8.0 * (v[i + 1] - v[i - 1]) - (v[i + 2] - v[i - 2])) / (12.0 * h);
            d3[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        } else if i < 2 {
            let w = &v[i..i + 5];
            d5[i] = (-25.0 * w[0] + 48.0 * w[1] - 36.0 * w[2] + 16.0 * w[3] - 3.0 * w[4]) / (12.0 * h);
            d3[i] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
        } else {
            let w = &v[i - 4..=i];
            d5[i] = (25.0 * w[4] - 48.0 * w[3] + 36.0 * w[2] - 16.0 * w[1] + 3.0 * w[0]) / (12.0 * h);
            d3[i] = (3.0 * w[4] - 4.0 * w[3] + w[2]) / (2.0 * h);
        }
    }
    Ok((d5, d3))
}

/// Closed-form real-space evaluator for `mu` in {1, 2}.
fn closed_form(parity: Parity, lambda: f64, mu: f64, x: f64) -> Result<f64> {
    if mu == 2.0 {
        phi_real_gauss(parity, lambda, x)
    } else if mu == 1.0 {
        phi_real_cauchy(parity, lambda, x)
    } else {
        Err(Error::domain(format!("closed forms exist only for mu = 1 and mu = 2, got {mu}")))
    }
}

/// `phi(lambda - mu) - [(1 - lambda) phi(lambda) -/+ x phi'(lambda - 1)]`, where
/// `phi'` has the opposite parity and the sign is `-` for even, `+` for odd.
pub fn recurrence_residual(parity: Parity, lambda: f64, mu: f64, x: f64) -> Result<f64> {
    for l in [lambda, lambda - 1.0, lambda - mu] {
        require_fourier_domain(l)?;
    }
    let lhs = closed_form(parity, lambda - mu, mu, x)?;
    let rhs = (1.0 - lambda) * closed_form(parity, lambda, mu, x)?
        - parity.sign() * x * closed_form(parity.flip(), lambda - 1.0, mu, x)?;
    Ok(lhs - rhs)
}

/// Large-`|x|` behaviour of a real-space eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Asymptotics {
    /// `phi(x) ~ |x|^exponent`.
    PowerLaw(f64),
    /// Decays faster than any power (Gaussian envelope).
    GaussianLocalized,
}

/// Leading tail exponent of `phi(x)`, read off from the first term of the
/// small-`k` expansion `|k|^{-lambda} sum_j (-|k|^mu/mu)^j / j!` that is not
/// smooth at `k = 0`. A term `|k|^s` (even) or `sign(k)|k|^s` (odd) that is
/// not smooth produces `|x|^{-s-1}`.
///
/// For `mu = 2` this is `lambda - 1` except on the harmonic spectrum. For
/// `mu < 2` higher terms matter: the Cauchy density (`mu = 1`, `lambda = 0`)
/// decays as `|x|^{-2}`.
pub fn asymptotic_exponent(ef: &EigenFunction) -> Result<Asymptotics> {
    let (lambda, mu) = (ef.lambda, ef.mu);
    if mu == 2.0 && lambda >= 1.0 {
        // polynomial (Laguerre) or growing Kummer solutions, degree lambda - 1
        return Ok(Asymptotics::PowerLaw(lambda - 1.0));
    }
    require_fourier_domain(lambda)?;
    let smooth = |s: f64| {
        let r = s.round();
        s >= 0.0
            && (s - r).abs() < 1e-12
            && match ef.parity {
                Parity::Even => (r as i64) % 2 == 0,
                Parity::Odd => (r as i64) % 2 == 1,
            }
    };
    for j in 0..64 {
        let s = -lambda + mu * j as f64;
        if !smooth(s) {
            return Ok(Asymptotics::PowerLaw(-s - 1.0));
        }
    }
    Ok(Asymptotics::GaussianLocalized)
}

/// Result of the Schroedinger lift `psi = p e^{x^2/4}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lifted {
    pub samples: Sampled,
    /// Number of grid points dropped at each edge because `e^{x^2/4}` overflows.
    pub truncated: usize,
}

/// Divides a `mu = 2` real-space function by the ground state `e^{-x^2/4}`.
pub fn schroedinger_lift(p: &Sampled) -> Result<Lifted> {
    let limit = 4.0 * (f64::MAX.ln() - 1.0);
    let keep: Vec<usize> = (0..p.values.len()).filter(|&i| p.xs()[i].powi(2) < limit).collect();
    let truncated = (p.values.len() - keep.len()) / 2;
    if keep.len() < 2 {
        return Err(Error::Overflow("every grid point overflows e^{x^2/4}".into()));
    }
    if truncated > 0 {
        log::warn!("schroedinger lift: dropped {truncated} points per edge where e^(x^2/4) overflows");
    }
    let lo = p.xs()[keep[0]];
    let hi = p.xs()[keep[keep.len() - 1]];
    let grid = match p.grid.spacing() {
        SpacingPolicy::Uniform if truncated > 0 => Grid::uniform_on(keep.len(), lo, hi)?,
        _ => p.grid.clone(),
    };
    let values = keep.iter().map(|&i| p.values[i] * (0.25 * p.xs()[i].powi(2)).exp()).collect();
    Ok(Lifted { samples: Sampled { grid, values }, truncated })
}

/// Potential offset `V - eps0 = U'^2/4 - U''/2` whose Schroedinger ground
/// state is `e^{-U/2}`.
pub fn cole_hopf_potential(u_prime: f64, u_second: f64) -> f64 {
    0.25 * u_prime * u_prime - 0.5 * u_second
}

/// Largest `|-psi0'' + (V - eps0) psi0|` over `xs` for `U = x^2/2`, with
/// `psi0 = e^{-x^2/4}` and `psi0''` by central differences.
pub fn harmonic_ground_state_residual(xs: &[f64]) -> f64 {
    let psi0 = |x: f64| (-0.25 * x * x).exp();
    let h = 1e-3;
    xs.iter()
        .map(|&x| {
            let d2 = (-psi0(x + 2.0 * h) + 16.0 * psi0(x + h) - 30.0 * psi0(x) + 16.0 * psi0(x - h)
                - psi0(x - 2.0 * h))
                / (12.0 * h * h);
            (-d2 + cole_hopf_potential(x, 1.0) * psi0(x)).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::derivative;
    use crate::specfun::{erf, hermite_he, laguerre_gen, pochhammer};

    fn ef(parity: Parity, lambda: f64, mu: f64) -> EigenFunction {
        EigenFunction::new(parity, lambda, mu).unwrap()
    }

    #[test]
    fn fourier_examples() {
        let v = ef(Parity::Even, 0.0, 1.0).fourier(1.0).unwrap();
        assert!((v.re - (-1f64).exp()).abs() < 1e-15 && v.im == 0.0);
        let v = ef(Parity::Even, -2.0, 2.0).fourier(1.0).unwrap();
        assert!((v.re - (-0.5f64).exp()).abs() < 1e-15);
        let v = ef(Parity::Odd, 0.0, 1.0).fourier(-2.0).unwrap();
        assert!(v.re == 0.0 && (v.im + (-2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn fourier_domain_errors() {
        assert!(ef(Parity::Even, 1.0, 1.0).fourier(0.5).unwrap_err().is_domain());
        assert!(ef(Parity::Even, 0.5, 1.0).fourier(0.0).unwrap_err().is_domain());
        assert!(EigenFunction::new(Parity::Even, 0.0, 2.5).is_err());
    }

    #[test]
    fn gauss_examples() {
        let inv_sqrt_2pi = 1.0 / (2.0 * PI).sqrt();
        assert!((phi_real_gauss(Parity::Even, 0.0, 0.0).unwrap() - inv_sqrt_2pi).abs() < 1e-15);
        assert!((phi_real_gauss(Parity::Even, 0.0, 1.0).unwrap() - inv_sqrt_2pi * (-0.5f64).exp()).abs() < 1e-15);
        let q = phi_real_numeric(&ef(Parity::Even, 0.5, 2.0), 2.0).unwrap();
        assert!((phi_real_gauss(Parity::Even, 0.5, 2.0).unwrap() - q).abs() < 1e-8);
    }

    #[test]
    fn cauchy_examples() {
        assert!((phi_real_cauchy(Parity::Even, 0.0, 0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((phi_real_cauchy(Parity::Odd, 0.0, 1.0).unwrap() - 0.5 / PI).abs() < 1e-15);
        assert!(phi_real_cauchy(Parity::Even, -1.0, 1.0).unwrap().abs() < 1e-15);
        assert!(phi_real_cauchy(Parity::Even, 1.0, 1.0).unwrap_err().is_domain());
    }

    #[test]
    fn cauchy_rational_form_agrees_with_trigonometric_form() {
        for n in 0..4 {
            for x in [-2.0f64, -0.3, 0.0, 0.8, 3.5] {
                for p in [Parity::Even, Parity::Odd] {
                    let lambda = -(n as f64);
                    let s = 1.0 - lambda;
                    let env = gamma(s).unwrap() / PI * (1.0 + x * x).powf(-0.5 * s);
                    let trig = match p {
                        Parity::Even => env * (s * f64::atan(x)).cos(),
                        Parity::Odd => env * (s * f64::atan(x)).sin(),
                    };
                    assert!((phi_real_cauchy(p, lambda, x).unwrap() - trig).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn numeric_matches_closed_forms() {
        let c = phi_real_cauchy(Parity::Even, 0.0, 0.5).unwrap();
        assert!((phi_real_numeric(&ef(Parity::Even, 0.0, 1.0), 0.5).unwrap() - c).abs() < 1e-8);
        let g = phi_real_gauss(Parity::Odd, -1.0, 1.0).unwrap();
        assert!((phi_real_numeric(&ef(Parity::Odd, -1.0, 2.0), 1.0).unwrap() - g).abs() < 1e-8);
    }

    /// Stable density tail mass beyond `l` from the convergent series of the
    /// symmetric stable law with `alpha < 1` and scale `c = 1/mu`.
    fn stable_tail_mass(alpha: f64, c: f64, l: f64) -> f64 {
        let mut s = 0.0;
        for n in 1..60 {
            let nf = n as f64;
            let t = gamma(nf * alpha + 1.0).unwrap() / gamma(nf + 1.0).unwrap()
                * (0.5 * PI * nf * alpha).sin()
                * c.powi(n)
                * l.powf(-nf * alpha)
                / (nf * alpha);
            s += if n % 2 == 1 { t } else { -t };
        }
        2.0 * s / PI
    }

    #[test]
    fn numeric_stationary_density_normalized() {
        let mu = 2.0 / 3.0;
        let e = ef(Parity::Even, 0.0, mu);
        let l: f64 = 60.0;
        // composite Simpson on [0, l] in the variable x = u^3, which clusters
        // nodes at the origin cusp
        let n = 600;
        let umax = l.cbrt();
        let h = umax / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let u = i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * phi_real_numeric_tol(&e, u.powi(3), 1e-12).unwrap() * 3.0 * u * u;
        }
        let core = 2.0 * s * h / 3.0;
        let total = core + stable_tail_mass(mu, 1.0 / mu, l);
        assert!((total - 1.0).abs() < 1e-4, "{total}");
    }

    #[test]
    fn derivative_flips_parity() {
        let h = 1e-4;
        for mu in [1.0, 2.0] {
            for &lambda in &[0.5, 0.0, -0.5, -1.0, -2.0] {
                for p in [Parity::Even, Parity::Odd] {
                    for x in [-2.2, -0.4, 0.3, 1.7] {
                        let d = derivative(|y| closed_form(p, lambda, mu, y).unwrap(), x, h);
                        let target = -p.sign() * closed_form(p.flip(), lambda - 1.0, mu, x).unwrap();
                        assert!((d - target).abs() < 1e-6, "mu {mu} lambda {lambda} {p:?} x {x}");
                    }
                }
            }
        }
    }

    #[test]
    fn recurrence_examples() {
        assert!(recurrence_residual(Parity::Even, 0.0, 1.0, 0.0).unwrap().abs() < 1e-12);
        assert!(recurrence_residual(Parity::Even, 0.5, 1.0, 1.3).unwrap().abs() < 1e-9);
        assert!(recurrence_residual(Parity::Odd, -1.0, 2.0, 0.7).unwrap().abs() < 1e-9);
        assert!(recurrence_residual(Parity::Even, 0.5, 1.5, 1.0).unwrap_err().is_domain());
    }

    fn sampled(p: Parity, lambda: f64, mu: f64, grid: &Grid) -> Sampled {
        Sampled::from_fn(grid.clone(), |x| closed_form(p, lambda, mu, x)).unwrap()
    }

    #[test]
    fn ladder_raise_n_on_cauchy_density() {
        let grid = Grid::uniform(2001, 10.0).unwrap();
        let f = LadderFunction {
            samples: sampled(Parity::Even, 0.0, 1.0, &grid),
            parity: Parity::Even,
            index: LadderIndex::new(0, 0),
            mu: 1.0,
        };
        let g = ladder_apply(LadderStep::RaiseN, &f, LADDER_TOL).unwrap();
        assert_eq!(g.index, LadderIndex::new(0, 1));
        assert_eq!(g.eigenvalue(), -1.0);
        for (x, v) in g.samples.xs().iter().zip(&g.samples.values) {
            assert!((v - phi_real_cauchy(Parity::Even, -1.0, *x).unwrap()).abs() < 1e-6, "x {x}");
        }
    }

    #[test]
    fn ladder_raise_m_on_gaussian_density() {
        let grid = Grid::uniform(1601, 8.0).unwrap();
        let f = LadderFunction {
            samples: sampled(Parity::Even, 0.0, 2.0, &grid),
            parity: Parity::Even,
            index: LadderIndex::new(0, 0),
            mu: 2.0,
        };
        let g = ladder_apply(LadderStep::RaiseM, &f, LADDER_TOL).unwrap();
        assert_eq!(g.index, LadderIndex::new(1, 0));
        assert_eq!(g.parity, Parity::Odd);
        for (x, v) in g.samples.xs().iter().zip(&g.samples.values) {
            // x N(x)
            let expected = x * (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
            assert!((v - expected).abs() < 1e-6);
            assert!((v - phi_real_gauss(Parity::Odd, -1.0, *x).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn ladder_rejects_coarse_grid() {
        let grid = Grid::uniform(21, 10.0).unwrap();
        let f = LadderFunction {
            samples: sampled(Parity::Even, 0.0, 2.0, &grid),
            parity: Parity::Even,
            index: LadderIndex::new(0, 0),
            mu: 2.0,
        };
        assert!(matches!(ladder_apply(LadderStep::RaiseN, &f, LADDER_TOL), Err(Error::Discretization { .. })));
    }

    #[test]
    fn asymptotic_examples() {
        let a = |p, l, m| asymptotic_exponent(&ef(p, l, m)).unwrap();
        assert_eq!(a(Parity::Even, 0.5, 2.0), Asymptotics::PowerLaw(-0.5));
        assert_eq!(a(Parity::Even, -2.0, 2.0), Asymptotics::GaussianLocalized);
        assert_eq!(a(Parity::Odd, -1.0, 2.0), Asymptotics::GaussianLocalized);
        assert_eq!(a(Parity::Odd, -2.0, 2.0), Asymptotics::PowerLaw(-3.0));
        assert_eq!(a(Parity::Even, 3.0, 2.0), Asymptotics::PowerLaw(2.0));
        // Cauchy density tail x^{-2}, odd partner x^{-1}
        assert_eq!(a(Parity::Even, 0.0, 1.0), Asymptotics::PowerLaw(-2.0));
        assert_eq!(a(Parity::Odd, 0.0, 1.0), Asymptotics::PowerLaw(-1.0));
        assert!(asymptotic_exponent(&ef(Parity::Even, 1.5, 1.0)).unwrap_err().is_domain());
    }

    #[test]
    fn asymptotic_exponent_matches_measured_slopes() {
        let cases = [
            (Parity::Even, 0.0, 1.0),
            (Parity::Odd, 0.0, 1.0),
            (Parity::Even, 0.5, 1.0),
            (Parity::Odd, -1.0, 1.0),
            (Parity::Even, 0.5, 2.0),
            (Parity::Even, -2.0 / 3.0, 2.0),
        ];
        for (p, lambda, mu) in cases {
            let e = ef(p, lambda, mu);
            let Asymptotics::PowerLaw(expected) = asymptotic_exponent(&e).unwrap() else {
                panic!("expected a power law");
            };
            let (x1, x2) = (400.0, 800.0);
            let slope = (e.real(x2).unwrap().abs().ln() - e.real(x1).unwrap().abs().ln()) / (x2 / x1).ln();
            assert!((slope - expected).abs() < 0.02, "{p:?} {lambda} {mu}: {slope} vs {expected}");
        }
    }

    #[test]
    fn lift_examples() {
        let grid = Grid::uniform(161, 8.0).unwrap();
        let p1 = sampled(Parity::Odd, -1.0, 2.0, &grid);
        let psi = schroedinger_lift(&p1).unwrap();
        assert_eq!(psi.truncated, 0);
        let ratio: Vec<f64> = psi
            .samples
            .xs()
            .iter()
            .zip(&psi.samples.values)
            .filter(|(x, _)| x.abs() > 0.05)
            .map(|(x, v)| v / (hermite_he(1, *x) * (-0.25 * x * x).exp()))
            .collect();
        assert!(ratio.iter().all(|r| (r - ratio[0]).abs() < 1e-12 * ratio[0].abs()));

        let p0 = sampled(Parity::Even, 0.0, 2.0, &grid);
        let psi = schroedinger_lift(&p0).unwrap();
        for (x, v) in psi.samples.xs().iter().zip(&psi.samples.values) {
            assert!((v - (-0.25 * x * x).exp() / (2.0 * PI).sqrt()).abs() < 1e-15);
        }

        let p = sampled(Parity::Even, 0.5, 2.0, &grid);
        let psi = schroedinger_lift(&p).unwrap();
        let at = |x: f64| {
            let i = psi.samples.xs().iter().position(|&y| (y - x).abs() < 1e-9).unwrap();
            psi.samples.values[i].abs()
        };
        assert!(at(8.0) > at(4.0));
    }

    #[test]
    fn lift_truncates_on_overflow() {
        let grid = Grid::uniform(401, 100.0).unwrap();
        let p = Sampled { values: vec![1e-300; 401], grid };
        let psi = schroedinger_lift(&p).unwrap();
        assert!(psi.truncated > 0);
        assert!(psi.samples.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn harmonic_potential_and_ground_state() {
        let xs: Vec<f64> = (-40..=40).map(|i| 0.1 * i as f64).collect();
        assert!(harmonic_ground_state_residual(&xs) < 1e-8);
        for x in [0.0, 1.0, 2.5] {
            assert!((cole_hopf_potential(x, 1.0) - (0.25 * x * x - 0.5)).abs() < 1e-15);
        }
    }

    #[test]
    fn harmonic_reductions_to_hermite() {
        let xs: Vec<f64> = (0..20).map(|i| -3.8 + 0.4 * i as f64 + 0.013).collect();
        for n in 0..=3u32 {
            for (p, lambda, deg) in [(Parity::Even, -2.0 * n as f64, 2 * n), (Parity::Odd, -(2.0 * n as f64 + 1.0), 2 * n + 1)] {
                let r: Vec<f64> = xs
                    .iter()
                    .map(|&x| phi_real_gauss(p, lambda, x).unwrap() / (hermite_he(deg, x) * (-0.5 * x * x).exp()))
                    .collect();
                let mean = r.iter().sum::<f64>() / r.len() as f64;
                let var = r.iter().map(|v| (v / mean - 1.0).powi(2)).sum::<f64>() / r.len() as f64;
                assert!(var < 1e-16, "n {n} {p:?}: {var}");
            }
        }
    }

    #[test]
    fn positive_integer_laguerre_forms() {
        for n in 0..=3u32 {
            let nf = n as f64;
            for x in [-2.0, -0.5, 0.7, 1.9] {
                let z = -0.5 * x * x;
                let even = phi_real_gauss(Parity::Even, 2.0 * nf + 1.0, x).unwrap();
                let lag = gamma(nf + 1.0).unwrap() / pochhammer(0.5, n) * laguerre_gen(n, -0.5, z);
                let pref = 2f64.powf(-nf) / (2.0 * PI);
                assert!((even - pref * lag).abs() < 1e-12 * lag.abs().max(1.0));
                let odd = phi_real_gauss(Parity::Odd, 2.0 * nf + 2.0, x).unwrap();
                let lag = gamma(nf + 1.0).unwrap() / pochhammer(1.5, n) * x * laguerre_gen(n, 0.5, z);
                assert!((odd - pref * lag).abs() < 1e-12 * lag.abs().max(1.0));
            }
        }
    }

    #[test]
    fn lambda_one_pair() {
        // even: constant; odd: proportional to erf(x / sqrt 2), and solves
        // phi'' + x phi' + phi = lambda phi with lambda = 1
        let c = phi_real_gauss(Parity::Even, 1.0, 0.0).unwrap();
        for x in [-1.5, 0.4, 3.0] {
            assert!((phi_real_gauss(Parity::Even, 1.0, x).unwrap() - c).abs() < 1e-14);
            let ratio = phi_real_gauss(Parity::Odd, 1.0, x).unwrap() / erf(x / 2f64.sqrt());
            let r0 = phi_real_gauss(Parity::Odd, 1.0, 1.0).unwrap() / erf(1.0 / 2f64.sqrt());
            assert!((ratio - r0).abs() < 1e-12);
        }
        let f = |x: f64| erf(x / 2f64.sqrt());
        for x in [-1.0, 0.3, 1.2] {
            let h = 1e-3;
            let d1 = derivative(f, x, h);
            let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            let lhs = d2 + x * d1 + f(x);
            assert!((lhs - f(x)).abs() < 1e-6);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn fourier_eigen_ode(mu in 0.2f64..2.0, lambda in -3.0f64..0.99, k in 0.05f64..4.0, odd in any::<bool>(), neg in any::<bool>()) {
                let p = if odd { Parity::Odd } else { Parity::Even };
                let k = if neg { -k } else { k };
                let e = ef(p, lambda, mu);
                let h = 1e-4 * k.abs();
                let f = |q: f64| e.fourier(q).unwrap();
                let d = (f(k - 2.0 * h) - f(k + 2.0 * h) + (f(k + h) - f(k - h)) * 8.0) / (12.0 * h);
                let phi = f(k);
                let res = -d * k - phi * k.abs().powf(mu) - phi * lambda;
                prop_assert!(res.norm() <= 1e-6 * phi.norm().max(1e-300));
            }

            #[test]
            fn fractional_shift(mu in 0.2f64..2.0, lambda in -3.0f64..0.99, alpha in 0.0f64..2.0, k in -5.0f64..5.0, odd in any::<bool>()) {
                prop_assume!(k != 0.0);
                let p = if odd { Parity::Odd } else { Parity::Even };
                let lhs = ef(p, lambda, mu).fourier(k).unwrap() * k.abs().powf(alpha);
                let rhs = ef(p, lambda - alpha, mu).fourier(k).unwrap();
                prop_assert!((lhs - rhs).norm() <= 4.0 * f64::EPSILON * rhs.norm());
            }

            #[test]
            fn recurrence_random(lambda in -3.0f64..0.99, x in -5.0f64..5.0, odd in any::<bool>(), gauss in any::<bool>()) {
                let p = if odd { Parity::Odd } else { Parity::Even };
                let mu = if gauss { 2.0 } else { 1.0 };
                prop_assert!(recurrence_residual(p, lambda, mu, x).unwrap().abs() < 1e-9);
            }
        }
    }
}
