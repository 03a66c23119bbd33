//! Sample grids on the wave-number and position axes, and cubic-spline
//! interpolation over them.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpacingPolicy {
    Uniform,
    /// Geometric spacing in `|k|` on each side of the origin, which is excluded.
    SymmetricLog,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    points: Vec<f64>,
    spacing: SpacingPolicy,
    halfwidth: f64,
}

impl Grid {
    /// `n` equally spaced points on `[-halfwidth, halfwidth]`.
    pub fn uniform(n: usize, halfwidth: f64) -> Result<Self> {
        Self::uniform_on(n, -halfwidth, halfwidth)
    }

    /// `n` equally spaced points on `[lo, hi]`.
    pub fn uniform_on(n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::domain(format!("uniform grid needs n >= 2 and lo < hi (n={n}, [{lo}, {hi}])")));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let points = (0..n).map(|i| if i == n - 1 { hi } else { lo + h * i as f64 }).collect();
        Ok(Grid { points, spacing: SpacingPolicy::Uniform, halfwidth: 0.5 * (hi - lo) })
    }

    /// `n` points (even), `n/2` per side, geometrically spaced in `[kmin, halfwidth]`.
    pub fn symmetric_log(n: usize, kmin: f64, halfwidth: f64) -> Result<Self> {
        if n < 8 || n & 1 == 1 || !(kmin > 0.0) || !(halfwidth > kmin) {
            return Err(Error::domain(format!(
                "symmetric-log grid needs even n >= 8 and 0 < kmin < halfwidth (n={n}, kmin={kmin}, halfwidth={halfwidth})"
            )));
        }
        let m = n / 2;
        let (l0, l1) = (kmin.ln(), halfwidth.ln());
        let positive: Vec<f64> = (0..m)
            .map(|i| {
                if i == m - 1 {
                    halfwidth
                } else if i == 0 {
                    kmin
                } else {
                    (l0 + (l1 - l0) * i as f64 / (m - 1) as f64).exp()
                }
            })
            .collect();
        let mut points: Vec<f64> = positive.iter().rev().map(|k| -k).collect();
        points.extend_from_slice(&positive);
        Ok(Grid { points, spacing: SpacingPolicy::SymmetricLog, halfwidth })
    }

    /// 2x512 points with `|k|` in `[1e-6, 50]`.
    pub fn default_wavenumber() -> Self {
        Self::symmetric_log(1024, 1e-6, 50.0).expect("valid default grid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> SpacingPolicy {
        self.spacing
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Uniform spacing, or `None` for non-uniform grids.
    pub fn step(&self) -> Option<f64> {
        match self.spacing {
            SpacingPolicy::Uniform => Some(self.points[1] - self.points[0]),
            SpacingPolicy::SymmetricLog => None,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo() && x <= self.hi()
    }
}

/// Natural cubic spline through `(xs[i], ys[i])`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n != ys.len() || n < 2 {
            return Err(Error::domain("spline needs at least two (x, y) pairs of equal length"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("spline abscissae must be strictly increasing"));
        }
        let mut second = vec![0.0; n];
        if n > 2 {
            // tridiagonal solve for the interior second derivatives
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            let mut upper = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            }
            for i in 2..n - 1 {
                let lower = xs[i] - xs[i - 1];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            for i in (1..n - 1).rev() {
                let next = if i + 1 < n - 1 { second[i + 1] } else { 0.0 };
                second[i] = (rhs[i] - upper[i] * next) / diag[i];
            }
        }
        Ok(CubicSpline { xs: xs.to_vec(), ys: ys.to_vec(), second })
    }

    pub fn lo(&self) -> f64 {
        self.xs[0]
    }

    pub fn hi(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= self.lo() && x <= self.hi()) {
            return Err(Error::OutsideHull { query: x, lo: self.lo(), hi: self.hi() });
        }
        let i = match self.xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => return Ok(self.ys[i]),
            Err(i) => i - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = 1.0 - a;
        Ok(a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0)
    }
}

#[derive(Debug, Clone)]
enum SplineLayout {
    Uniform { re: CubicSpline, im: CubicSpline },
    /// Splines in `ln|k|` on each side, linear across the gap around zero.
    SymmetricLog { pos_re: CubicSpline, pos_im: CubicSpline, neg_re: CubicSpline, neg_im: CubicSpline },
}

/// Complex cubic interpolant over a [`Grid`].
#[derive(Debug, Clone)]
pub struct ComplexSpline {
    grid: Grid,
    values: Vec<Complex64>,
    layout: SplineLayout,
}

impl ComplexSpline {
    pub fn new(grid: &Grid, values: &[Complex64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "{} values supplied for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        let re: Vec<f64> = values.iter().map(|v| v.re).collect();
        let im: Vec<f64> = values.iter().map(|v| v.im).collect();
        let layout = match grid.spacing() {
            SpacingPolicy::Uniform => SplineLayout::Uniform {
                re: CubicSpline::new(grid.points(), &re)?,
                im: CubicSpline::new(grid.points(), &im)?,
            },
            SpacingPolicy::SymmetricLog => {
                let m = grid.len() / 2;
                let logs: Vec<f64> = grid.points()[m..].iter().map(|k| k.ln()).collect();
                let neg_re: Vec<f64> = re[..m].iter().rev().copied().collect();
                let neg_im: Vec<f64> = im[..m].iter().rev().copied().collect();
                SplineLayout::SymmetricLog {
                    pos_re: CubicSpline::new(&logs, &re[m..])?,
                    pos_im: CubicSpline::new(&logs, &im[m..])?,
                    neg_re: CubicSpline::new(&logs, &neg_re)?,
                    neg_im: CubicSpline::new(&logs, &neg_im)?,
                }
            }
        };
        Ok(ComplexSpline { grid: grid.clone(), values: values.to_vec(), layout })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn eval(&self, query: f64) -> Result<Complex64> {
        if !self.grid.contains(query) {
            return Err(Error::OutsideHull { query, lo: self.grid.lo(), hi: self.grid.hi() });
        }
        match &self.layout {
            SplineLayout::Uniform { re, im } => Ok(Complex64::new(re.eval(query)?, im.eval(query)?)),
            SplineLayout::SymmetricLog { pos_re, pos_im, neg_re, neg_im } => {
                let m = self.grid.len() / 2;
                let kmin = self.grid.points()[m];
                if query >= kmin {
                    let s = query.ln().min(pos_re.hi());
                    Ok(Complex64::new(pos_re.eval(s)?, pos_im.eval(s)?))
                } else if query <= -kmin {
                    let s = (-query).ln().min(neg_re.hi());
                    Ok(Complex64::new(neg_re.eval(s)?, neg_im.eval(s)?))
                } else {
                    let left = self.values[m - 1];
                    let right = self.values[m];
                    let t = (query + kmin) / (2.0 * kmin);
                    Ok(left * (1.0 - t) + right * t)
                }
            }
        }
    }
}

/// Interpolates sampled complex `values` on `grid` at `query`.
///
/// Builds the spline on every call; use [`ComplexSpline`] directly for
/// repeated queries.
pub fn interp_complex(grid: &Grid, values: &[Complex64], query: f64) -> Result<Complex64> {
    ComplexSpline::new(grid, values)?.eval(query)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_log_grid_is_mirrored() {
        let g = Grid::symmetric_log(64, 1e-4, 20.0).unwrap();
        let n = g.len();
        for i in 0..n {
            assert_eq!(g.points()[i], -g.points()[n - 1 - i]);
        }
        assert!(g.points().windows(2).all(|w| w[1] > w[0]));
        assert!(!g.points().contains(&0.0));
        let d = Grid::default_wavenumber();
        assert_eq!(d.len(), 1024);
        assert_eq!(d.hi(), 50.0);
    }

    #[test]
    fn node_queries_are_exact() {
        let g = Grid::symmetric_log(128, 1e-5, 50.0).unwrap();
        let vals: Vec<Complex64> =
            g.points().iter().map(|&k| Complex64::new((-k.abs()).exp(), k.sin())).collect();
        let s = ComplexSpline::new(&g, &vals).unwrap();
        for (k, v) in g.points().iter().zip(&vals) {
            assert_eq!(s.eval(*k).unwrap(), *v);
        }
        let u = Grid::uniform(33, 4.0).unwrap();
        let vals: Vec<Complex64> = u.points().iter().map(|&k| Complex64::new(k * k, -k)).collect();
        for (k, v) in u.points().iter().zip(&vals) {
            assert_eq!(interp_complex(&u, &vals, *k).unwrap(), *v);
        }
    }

    #[test]
    fn interpolates_laplace_envelope() {
        let g = Grid::symmetric_log(256, 1e-3, 50.0).unwrap();
        let vals: Vec<Complex64> = g.points().iter().map(|&k| Complex64::new((-k.abs()).exp(), 0.0)).collect();
        let v = interp_complex(&g, &vals, 0.3).unwrap();
        assert!((v.re - (-0.3f64).exp()).abs() < 1e-6, "{}", v.re - (-0.3f64).exp());
    }

    #[test]
    fn interpolates_gaussian() {
        let g = Grid::symmetric_log(256, 1e-3, 50.0).unwrap();
        let vals: Vec<Complex64> = g.points().iter().map(|&k| Complex64::new((-0.5 * k * k).exp(), 0.0)).collect();
        let v = interp_complex(&g, &vals, 1.7).unwrap();
        assert!((v.re - (-1.445f64).exp()).abs() < 1e-6, "{}", v.re - (-1.445f64).exp());
        let v = interp_complex(&g, &vals, -1.7).unwrap();
        assert!((v.re - (-1.445f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn refuses_extrapolation() {
        let g = Grid::uniform(11, 1.0).unwrap();
        let vals = vec![Complex64::new(1.0, 0.0); 11];
        assert!(matches!(interp_complex(&g, &vals, 1.5), Err(Error::OutsideHull { .. })));
    }

    #[test]
    fn spline_reproduces_cubic_interior() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let s = CubicSpline::new(&xs, &ys).unwrap();
        assert!((s.eval(1.234).unwrap() - 1.234f64.sin()).abs() < 1e-5);
    }
}
