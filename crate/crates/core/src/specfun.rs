//! Special functions needed by the closed-form eigenfunctions and kernels.
//!
//! Everything here is real-argument and double precision.

use std::f64::consts::{FRAC_2_SQRT_PI, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Lanczos coefficients for g = 607/128 (Godfrey).
const LANCZOS_G: f64 = 607.0 / 128.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

/// `sin(pi x)` with exact zeros at the integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    // r in [-1, 1]
    if r == 0.0 || r.abs() == 1.0 {
        0.0
    } else if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Gamma function. Fails at the poles `0, -1, -2, ...`.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("gamma of NaN"));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::domain(format!("gamma has a pole at {x}")));
    }
    if x == x.round() && x <= 171.0 {
        let mut f = 1.0;
        for i in 2..x as u32 {
            f *= i as f64;
        }
        return Ok(f);
    }
    if x < 0.5 {
        // reflection; 1 - x >= 0.5
        return Ok(PI / (sin_pi(x) * gamma_lanczos(1.0 - x)));
    }
    Ok(gamma_lanczos(x))
}

/// Lanczos approximation for `x >= 0.5`.
fn gamma_lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // t^(z+1/2) split in two halves so that Gamma(170) does not overflow midway
    let half = t.powf(0.5 * (z + 0.5));
    SQRT_2PI * half * (half * (-t).exp()) * sum
}

/// `1/Gamma(x)`, zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else {
        gamma(x).map(|g| 1.0 / g).unwrap_or(0.0)
    }
}

/// Pochhammer symbol `(a)_n = a (a+1) ... (a+n-1)`.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    (0..n).map(|i| a + i as f64).product()
}

/// Arguments of the confluent hypergeometric functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypergeomArgs {
    pub a: f64,
    pub b: f64,
    pub z: f64,
}

impl HypergeomArgs {
    pub fn new(a: f64, b: f64, z: f64) -> Self {
        HypergeomArgs { a, b, z }
    }

    pub fn kummer_m(&self) -> Result<f64> {
        kummer_m(self.a, self.b, self.z)
    }

    pub fn tricomi_u(&self) -> Result<Complex64> {
        tricomi_u(self.a, self.b, self.z)
    }
}

/// `|z|` above which the asymptotic expansion replaces the Taylor series.
const KUMMER_ASYMPTOTIC_Z: f64 = 50.0;

/// Kummer's function `M(a, b, z)`.
///
/// Negative arguments go through `M(a,b,z) = e^z M(b-a,b,-z)` so the series
/// has no alternating cancellation; terminating series are summed directly.
pub fn kummer_m(a: f64, b: f64, z: f64) -> Result<f64> {
    if is_nonpositive_integer(b) {
        return Err(Error::domain(format!("M(a, b, z) undefined for b = {b}")));
    }
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(Error::domain("non-finite hypergeometric argument"));
    }
    if is_nonpositive_integer(a) {
        return Ok(kummer_series(a, b, z));
    }
    if z >= 0.0 {
        if z <= KUMMER_ASYMPTOTIC_Z {
            return Ok(kummer_series(a, b, z));
        }
        match kummer_scaled_asymptotic(a, b, z) {
            Some(s) => {
                let log_mag = z + s.abs().ln();
                if log_mag > f64::MAX.ln() {
                    return Err(Error::Overflow(format!(
                        "M({a}, {b}, {z}) has magnitude about 10^{:.1}",
                        log_mag / std::f64::consts::LN_10
                    )));
                }
                Ok(s * z.exp())
            }
            None => Ok(kummer_series(a, b, z)),
        }
    } else {
        let w = -z;
        let c = b - a;
        if is_nonpositive_integer(c) {
            return Ok(z.exp() * kummer_series(c, b, w));
        }
        if w <= KUMMER_ASYMPTOTIC_Z {
            return Ok(z.exp() * kummer_series(c, b, w));
        }
        match kummer_scaled_asymptotic(c, b, w) {
            Some(s) => Ok(s),
            None => Ok(z.exp() * kummer_series(c, b, w)),
        }
    }
}

/// Plain Taylor series of `M(a, b, z)`.
pub(crate) fn kummer_series(a: f64, b: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0.0;
    while n < 20_000.0 {
        term *= (a + n) * z / ((b + n) * (n + 1.0));
        sum += term;
        n += 1.0;
        if term == 0.0 {
            break;
        }
        // only stop once the term ratio has turned into a contraction
        if n > (a.abs() + 1.0) && n > z.abs() && term.abs() <= f64::EPSILON * 0.25 * sum.abs() {
            break;
        }
    }
    sum
}

/// `e^{-z} M(a, b, z)` for large positive `z` from the standard asymptotic
/// expansion. Returns `None` if the series does not reach full precision.
fn kummer_scaled_asymptotic(a: f64, b: f64, z: f64) -> Option<f64> {
    let s1 = asymptotic_sum(b - a, 1.0 - a, z)?;
    let lead = rgamma(a) * gamma(b).ok()? * ((a - b) * z.ln()).exp() * s1;
    let sub_weight = rgamma(b - a) * (PI * a).cos();
    let sub = if sub_weight == 0.0 {
        0.0
    } else {
        let s2 = asymptotic_sum(a, a - b + 1.0, -z).unwrap_or(1.0);
        sub_weight * gamma(b).ok()? * (-z - a * z.ln()).exp() * s2
    };
    Some(lead + sub)
}

/// `sum_n (p)_n (q)_n / (n! z^n)`, truncated at the smallest term.
fn asymptotic_sum(p: f64, q: f64, z: f64) -> Option<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0;
    for n in 0..500 {
        let n = n as f64;
        let next = term * (p + n) * (q + n) / ((n + 1.0) * z);
        if next == 0.0 {
            return Some(sum);
        }
        if next.abs() > term.abs() {
            break;
        }
        sum += next;
        term = next;
        if term.abs() <= f64::EPSILON * 0.25 * sum.abs() {
            return Some(sum);
        }
    }
    None
}

/// Tricomi's function `U(a, b, z)` for real `z`, from
/// `U = Gamma(1-b)/Gamma(a-b+1) M(a,b,z) + Gamma(b-1)/Gamma(a) z^{1-b} M(a-b+1,2-b,z)`.
///
/// `z^{1-b}` takes the principal branch, so negative `z` gives complex values.
/// A term whose reciprocal-Gamma weight vanishes is dropped.
pub fn tricomi_u(a: f64, b: f64, z: f64) -> Result<Complex64> {
    let power = Complex64::new(z, 0.0).powf(1.0 - b);
    tricomi_with_power(a, b, z, power)
}

fn tricomi_with_power(a: f64, b: f64, z: f64, power: Complex64) -> Result<Complex64> {
    if b == b.round() {
        return Err(Error::domain(format!("two-term Tricomi form needs non-integer b, got {b}")));
    }
    let w1 = rgamma(a - b + 1.0);
    let w2 = rgamma(a);
    if w1 == 0.0 && w2 == 0.0 {
        return Err(Error::domain(format!("U({a}, {b}, z): both Gamma weights at poles")));
    }
    let mut u = Complex64::new(0.0, 0.0);
    if w1 != 0.0 {
        u += gamma(1.0 - b)? * w1 * kummer_m(a, b, z)?;
    }
    if w2 != 0.0 && power != Complex64::new(0.0, 0.0) {
        u += power * (gamma(b - 1.0)? * w2 * kummer_m(a - b + 1.0, 2.0 - b, z)?);
    }
    Ok(u)
}

/// `U((1-lambda)/2, 1/2, -x^2/2)` with `z^{1/2}` written as `-i x / sqrt(2)`
/// rather than `i |x| / sqrt(2)`, so the imaginary part is odd in `x`.
pub fn tricomi_u_harmonic(lambda: f64, x: f64) -> Result<Complex64> {
    let z = -0.5 * x * x;
    let power = Complex64::new(0.0, -x / std::f64::consts::SQRT_2);
    tricomi_with_power(0.5 * (1.0 - lambda), 0.5, z, power)
}

/// Fresnel integrals `(C(x), S(x))` with kernel `pi t^2 / 2`.
pub fn fresnel(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (c, s) = if ax <= FRESNEL_SERIES_X {
        fresnel_series(ax)
    } else {
        // (1/2 - C) + i (1/2 - S) = e^{i theta} A with theta = pi x^2 / 2
        let a = fresnel_aux(ax);
        let theta = fresnel_phase(ax);
        let rot = Complex64::new(theta.cos(), theta.sin()) * a;
        (0.5 - rot.re, 0.5 - rot.im)
    };
    (c.copysign(x), s.copysign(x))
}

const FRESNEL_SERIES_X: f64 = 1.6;

/// `pi x^2 / 2` reduced modulo `2 pi` with the integer part of `x^2 / 4`
/// removed exactly where possible.
fn fresnel_phase(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let frac = q - q.floor();
    2.0 * PI * frac
}

fn fresnel_series(x: f64) -> (f64, f64) {
    let t = 0.5 * PI * x * x;
    let mut c = 0.0;
    let mut s = 0.0;
    // term_n = (-1)^n t^{2n} / (2n)! for C, t^{2n+1}/(2n+1)! for S
    let mut fact_term = 1.0;
    let mut n = 0u32;
    loop {
        let k = n as f64;
        let dc = fact_term / (4.0 * k + 1.0);
        let ts = fact_term * t / (2.0 * k + 1.0);
        let ds = ts / (4.0 * k + 3.0);
        c += dc;
        s += ds;
        fact_term = -ts * t / (2.0 * k + 2.0);
        n += 1;
        if dc.abs().max(ds.abs()) < 1e-18 || n > 100 {
            break;
        }
    }
    (c * x, s * x)
}

/// Auxiliary `A(x) = e^{-i pi x^2/2} [(1/2 - C) + i (1/2 - S)]` for `x > 0`,
/// free of cancellation for large `x`. Continued fraction for the
/// complementary error function (modified Lentz).
pub fn fresnel_aux(x: f64) -> Complex64 {
    let x = x.abs();
    if x <= FRESNEL_SERIES_X {
        let (c, s) = fresnel_series(x);
        let theta = fresnel_phase(x);
        return Complex64::new(theta.cos(), -theta.sin()) * Complex64::new(0.5 - c, 0.5 - s);
    }
    let tiny = 1e-300;
    let pix2 = PI * x * x;
    let mut b = Complex64::new(1.0, -pix2);
    let mut cc = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    let mut n = -1.0;
    for _ in 2..500 {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += 4.0;
        d = (d * a + b).inv();
        cc = b + cc.inv() * a;
        let del = cc * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h *= Complex64::new(x, -x);
    Complex64::new(0.5, 0.5) * h
}

/// Probabilists' Hermite polynomial `He_n(x)`.
pub fn hermite_he(n: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Generalized Laguerre polynomial `L_n^a(x)`.
pub fn laguerre_gen(n: u32, a: f64, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 + a - x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

const ERF_SERIES_X: f64 = 3.0;

/// Error function.
pub fn erf(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < ERF_SERIES_X { erf_series(ax) } else { 1.0 - erfc_cf(ax) };
    v.copysign(x)
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x >= ERF_SERIES_X {
        erfc_cf(x)
    } else if x > 0.5 {
        // still fine in absolute terms; relative accuracy degrades below 1e-13 only near x = 3
        1.0 - erf_series(x)
    } else {
        1.0 - erf(x)
    }
}

/// `erf x = (2/sqrt(pi)) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!`, all terms positive.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term > 1e-17 * sum {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// `erfc x = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`.
fn erfc_cf(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..300 {
        let a = 0.5 * n as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = c * d;
        f *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}
