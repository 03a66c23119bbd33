//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands.
//!
//! Finite intervals use global adaptive bisection driven by the 21-point
//! Kronrod rule with its embedded 10-point Gauss rule. Semi-infinite and
//! full-line domains are covered by marching over panels of growing width
//! until the integrand's contribution falls below tolerance; integrands that
//! keep oscillating past the cutoff fall back to epsilon-algorithm
//! extrapolation of the panel partial sums.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Kronrod abscissae, descending, last entry is the centre.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_292_831_475,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the odd-indexed Kronrod abscissae XGK[1], XGK[3], ...
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl QuadResult {
    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }

    fn zero() -> Self {
        QuadResult { value: Complex64::new(0.0, 0.0), abs_error_estimate: 0.0, evaluations: 0 }
    }

    fn accumulate(&mut self, other: &QuadResult) {
        self.value += other.value;
        self.abs_error_estimate += other.abs_error_estimate;
        self.evaluations += other.evaluations;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Finite(f64, f64),
    /// `[start, +inf)`.
    SemiInfinite(f64),
    FullLine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections per finite interval.
    pub max_subdivisions: usize,
    /// Width of the first panel on unbounded domains.
    pub initial_panel: f64,
    /// Panels on unbounded domains double in width up to this value.
    pub max_panel: f64,
    /// Distance from the start point at which unbounded integration stops
    /// marching and attempts tail extrapolation.
    pub cutoff: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_subdivisions: 4000,
            initial_panel: 1.0,
            max_panel: 8.0,
            cutoff: 1.0e3,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        QuadConfig { abs_tol, ..Default::default() }
    }

    fn target(&self, value: Complex64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.norm())
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One application of the 21-point Kronrod rule with QUADPACK's error heuristic.
fn kronrod21<F>(f: &F, a: f64, b: f64) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut resk = fc * WGK[10];
    let mut resabs = fc.norm() * WGK[10];
    let mut resg = Complex64::new(0.0, 0.0);
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += (f1 + f2) * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            resg += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

/// Global adaptive integration over a finite interval.
pub fn integrate_finite<F>(f: &F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    if a == b {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), abs_error_estimate: 0.0, evaluations: 1 });
    }
    let (value, error) = kronrod21(f, a, b);
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;

    let mut splits = 0;
    while total_err > cfg.target(total) {
        if splits >= cfg.max_subdivisions {
            return Err(Error::NoConvergence(QuadResult {
                value: total,
                abs_error_estimate: total_err,
                evaluations,
            }));
        }
        let seg = heap.pop().expect("segment heap is never empty");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
            // interval exhausted at machine resolution; keep it and give up refining
            heap.push(seg);
            let value: Complex64 = heap.iter().map(|s| s.value).sum();
            let err: f64 = heap.iter().map(|s| s.error).sum();
            return Err(Error::NoConvergence(QuadResult { value, abs_error_estimate: err, evaluations }));
        }
        let (v1, e1) = kronrod21(f, seg.a, mid);
        let (v2, e2) = kronrod21(f, mid, seg.b);
        evaluations += 42;
        splits += 1;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        if splits % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value: Complex64 = heap.iter().map(|s| s.value).sum();
    let err: f64 = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult { value, abs_error_estimate: err, evaluations })
}

/// Integrates over `[start, inf)` by marching over panels.
pub fn integrate_semi_infinite<F>(f: &F, start: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let mut acc = QuadResult::zero();
    let mut a = start;
    let mut width = cfg.initial_panel;
    let mut quiet = 0;
    let mut panels = 0usize;
    let mut partial_sums = Vec::new();
    // partial sums at distances that roughly double, for algebraic extrapolation
    let mut checkpoints: Vec<(f64, Complex64)> = Vec::new();
    let mut next_checkpoint = cfg.cutoff / 64.0;
    let panel_cfg = QuadConfig { abs_tol: 0.1 * cfg.abs_tol, ..*cfg };

    while a - start < cfg.cutoff {
        let b = a + width;
        let r = integrate_finite(f, a, b, &panel_cfg)?;
        acc.accumulate(&r);
        panels += 1;
        if width >= cfg.max_panel {
            partial_sums.push(acc.value);
        }
        if b - start >= next_checkpoint {
            checkpoints.push((b - start, acc.value));
            next_checkpoint = 2.0 * (b - start);
        }
        let tail_tol = 0.1 * cfg.target(acc.value);
        // For an algebraic tail k^{-p}, p >= 2, the remainder is bounded by the
        // last panel's contribution times (distance travelled / panel width).
        let tail_bound = (r.value.norm() + r.abs_error_estimate) * ((b - start) / width).max(1.0);
        if tail_bound < tail_tol {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= 2 && panels >= 4 {
            return Ok(acc);
        }
        a = b;
        width = (2.0 * width).min(cfg.max_panel);
    }

    // Slowly decaying but non-oscillating tails: map [a, inf) onto (0, 1].
    let map_cfg = QuadConfig { max_subdivisions: 200, abs_tol: 0.5 * cfg.abs_tol, ..*cfg };
    let mapped = |t: f64| if t == 0.0 { Complex64::new(0.0, 0.0) } else { f(a / t) * (a / (t * t)) };
    if let Ok(tail) = integrate_finite(&mapped, 0.0, 1.0, &map_cfg) {
        acc.accumulate(&tail);
        return Ok(acc);
    }

    // Algebraic decay with an oscillating remainder of higher order. Each
    // checkpoint sum is continued with a smooth (all derivatives vanish at
    // both ends) taper over [D, 2D], which suppresses the oscillating boundary
    // term while keeping the algebraic remainder a sum of powers of D.
    let bump = |t: f64| if t <= 0.0 { 0.0 } else { (-1.0 / t).exp() };
    let taper = |t: f64| bump(1.0 - t) / (bump(1.0 - t) + bump(t));
    let mut smoothed = Vec::with_capacity(checkpoints.len());
    for &(d, sum) in &checkpoints {
        let (lo, len) = (start + d, d);
        let g = |k: f64| f(k) * taper((k - lo) / len);
        match integrate_finite(&g, lo, lo + len, &panel_cfg) {
            Ok(r) => smoothed.push((d, sum + r.value)),
            Err(_) => break,
        }
    }
    if let Some((tail, err)) = algebraic_tail(&smoothed) {
        let value = smoothed[smoothed.len() - 1].1 + tail;
        if err <= cfg.target(value) {
            return Ok(QuadResult {
                value,
                abs_error_estimate: err + acc.abs_error_estimate,
                evaluations: acc.evaluations,
            });
        }
    }

    // The integrand has not died out: treat the partial sums as an oscillating
    // sequence and extrapolate.
    match wynn_epsilon(&partial_sums) {
        Some((limit, err)) if err <= cfg.target(limit) => Ok(QuadResult {
            value: limit,
            abs_error_estimate: err + acc.abs_error_estimate,
            evaluations: acc.evaluations,
        }),
        Some((limit, err)) => Err(Error::NoConvergence(QuadResult {
            value: limit,
            abs_error_estimate: err.max(acc.abs_error_estimate),
            evaluations: acc.evaluations,
        })),
        None => Err(Error::NoConvergence(acc)),
    }
}

/// Number of powers `D^{-q}, D^{-q-1}, ...` in the remainder model.
const TAIL_TERMS: usize = 3;

/// Limit of partial sums behaving like `S - sum_j C_j D^{-q-j}` in the
/// distance `D` travelled, fitted to `TAIL_TERMS + 2` checkpoints. The
/// exponent is found by scanning the least-squares residual of the linear fit
/// at fixed `q`.
fn power_law_limit(p: &[(f64, Complex64)]) -> Option<Complex64> {
    const M: usize = TAIL_TERMS + 1;
    let dref = p[p.len() - 1].0;
    let fit = |q: f64| -> Option<(f64, Complex64)> {
        let cols: Vec<Vec<f64>> = (0..M)
            .map(|j| p.iter().map(|(d, _)| if j == 0 { 1.0 } else { (d / dref).powf(-q - (j - 1) as f64) }).collect())
            .collect();
        // modified Gram-Schmidt on the columns
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(M);
        let mut r = [[0.0f64; M]; M];
        for (j, col) in cols.iter().enumerate() {
            let mut v = col.clone();
            for (i, b) in basis.iter().enumerate() {
                let d: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                r[i][j] = d;
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(n > 1e-12 * col.iter().map(|x| x * x).sum::<f64>().sqrt()) {
                return None;
            }
            r[j][j] = n;
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
        let proj: Vec<Complex64> = basis.iter().map(|b| b.iter().zip(p).map(|(x, (_, s))| s * x).sum()).collect();
        let residual: f64 = p
            .iter()
            .enumerate()
            .map(|(i, (_, s))| (s - (0..M).map(|j| proj[j] * basis[j][i]).sum::<Complex64>()).norm_sqr())
            .sum();
        let mut coef = [Complex64::new(0.0, 0.0); M];
        for i in (0..M).rev() {
            let acc: Complex64 = (i + 1..M).map(|j| coef[j] * r[i][j]).sum();
            coef[i] = (proj[i] - acc) / r[i][i];
        }
        Some((residual, coef[0]))
    };
    let qs: Vec<f64> = (0..=240).map(|i| 0.02 * (300.0f64).powf(i as f64 / 240.0)).collect();
    let scores: Vec<f64> = qs.iter().map(|&q| fit(q).map_or(f64::INFINITY, |(r, _)| r)).collect();
    let best = (0..qs.len()).min_by(|&i, &j| scores[i].total_cmp(&scores[j]))?;
    if !scores[best].is_finite() {
        return None;
    }
    // golden-section refinement inside the neighbouring scan cells
    let (mut lo, mut hi) = (qs[best.saturating_sub(1)], qs[(best + 1).min(qs.len() - 1)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let score = |q: f64| fit(q).map_or(f64::INFINITY, |(r, _)| r);
    for _ in 0..60 {
        let (m1, m2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if score(m1) < score(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    fit(0.5 * (lo + hi)).map(|(_, c0)| c0)
}

/// Remainder beyond the last checkpoint from a power-law fit to the last
/// checkpoints; the error is the change against the fit that ends one
/// checkpoint earlier. The returned tail is relative to the last checkpoint sum.
fn algebraic_tail(points: &[(f64, Complex64)]) -> Option<(Complex64, f64)> {
    let (n, m) = (points.len(), TAIL_TERMS + 2);
    if n < m + 1 {
        return None;
    }
    let last = power_law_limit(&points[n - m..])?;
    let prev = power_law_limit(&points[n - m - 1..n - 1])?;
    Some((last - points[n - 1].1, (last - prev).norm()))
}

/// Wynn's epsilon algorithm. Returns the extrapolated limit and an error
/// estimate from the agreement of successive even-column entries.
pub fn wynn_epsilon(seq: &[Complex64]) -> Option<(Complex64, f64)> {
    let n = seq.len().min(60);
    if n < 5 {
        return None;
    }
    let seq = &seq[seq.len() - n..];
    let zero = Complex64::new(0.0, 0.0);
    let mut prev: Vec<Complex64> = vec![zero; n + 1];
    let mut cur: Vec<Complex64> = seq.to_vec();
    let mut best = (seq[n - 1], (seq[n - 1] - seq[n - 2]).norm());
    let mut column = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff.norm() == 0.0 {
                // converged exactly
                return Some((cur[i + 1], 0.0));
            }
            next.push(prev[i + 1] + diff.inv());
        }
        column += 1;
        if column % 2 == 0 && next.len() >= 2 {
            let m = next.len();
            let err = (next[m - 1] - next[m - 2]).norm();
            if err < best.1 && err.is_finite() {
                best = (next[m - 1], err);
            }
        }
        prev = cur;
        cur = next;
    }
    Some(best)
}

/// Integrates `f` over `domain` to absolute tolerance `tol`.
pub fn integrate<F>(f: F, domain: Domain, tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    integrate_with(&f, domain, &QuadConfig::with_tol(tol))
}

pub fn integrate_with<F>(f: &F, domain: Domain, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    if !(cfg.abs_tol > 0.0) {
        return Err(Error::domain("quadrature tolerance must be positive"));
    }
    match domain {
        Domain::Finite(a, b) => integrate_finite(f, a, b, cfg),
        Domain::SemiInfinite(a) => integrate_semi_infinite(f, a, cfg),
        Domain::FullLine => {
            let half = QuadConfig { abs_tol: 0.5 * cfg.abs_tol, ..*cfg };
            let mut right = integrate_semi_infinite(f, 0.0, &half)?;
            let left = integrate_semi_infinite(&|k: f64| f(-k), 0.0, &half)?;
            right.accumulate(&left);
            Ok(right)
        }
    }
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F>(f: F, domain: Domain, tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), domain, tol)
}

/// Principal value of the integral of `f` over the real line, where `f` may
/// carry an odd `1/k` singularity at the origin.
///
/// The integral is folded onto `(0, inf)` so that mirrored points cancel the
/// odd part exactly. An even `1/|k|` component does not cancel and is
/// reported as [`Error::NonCancellation`].
pub fn integrate_pv_symmetric<F>(f: F, tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    let folded = |k: f64| f(k) + f(-k);
    let probe_far = 1e-6 * folded(1e-6);
    let probe_near = 1e-9 * folded(1e-9);
    if probe_near.norm() > 1e-6 && probe_near.norm() > 0.5 * probe_far.norm() {
        return Err(Error::NonCancellation(format!(
            "k*(f(k)+f(-k)) -> {:.3e} as k -> 0",
            probe_near.norm()
        )));
    }
    integrate_with(&folded, Domain::SemiInfinite(0.0), &QuadConfig::with_tol(tol))
}
