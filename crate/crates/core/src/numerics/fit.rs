use serde::Serialize;

use crate::error::{Error, Result};
use crate::observables::RelaxationSeries;

/// Least-squares fit of `value ≈ exp(intercept - rate * tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    /// Positive decay constant.
    pub rate: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    /// Root-mean-square residual of the log-linear fit.
    pub residual: f64,
    pub samples: usize,
}

/// Minimum number of samples a fit window must contain.
pub const MIN_FIT_SAMPLES: usize = 4;

pub fn fit_rate(series: &RelaxationSeries, window: (f64, f64)) -> Result<RateFit> {
    fit_log_linear(&series.taus, &series.values, window)
}

/// Non-finite values mark failed points and are skipped.
pub fn fit_log_linear(taus: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::domain(format!("fit window ({lo}, {hi}) is empty")));
    }
    if taus.len() != values.len() {
        return Err(Error::domain("tau and value arrays differ in length"));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in taus.iter().zip(values) {
        if t < lo || t > hi || !v.is_finite() {
            continue;
        }
        if !(v > 0.0) {
            return Err(Error::NonPositive { tau: t, value: v });
        }
        xs.push(t);
        ys.push(v.ln());
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::Insufficient(format!(
            "{} samples in window ({lo}, {hi}); need at least {MIN_FIT_SAMPLES}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(RateFit { rate: -slope, intercept, window, residual: (ss / n).sqrt(), samples: xs.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn unit_rate() {
        let t = linspace(0.0, 4.0, 41);
        let v: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
        let f = fit_log_linear(&t, &v, (0.0, 4.0)).unwrap();
        assert!((f.rate - 1.0).abs() < 1e-10);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn two_thirds_rate_and_intercept() {
        let t = linspace(0.0, 4.0, 41);
        let v: Vec<f64> = t.iter().map(|t| 3.0 * (-2.0 * t / 3.0).exp()).collect();
        let f = fit_log_linear(&t, &v, (0.0, 4.0)).unwrap();
        assert!((f.rate - 2.0 / 3.0).abs() < 1e-10);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn names_first_non_positive_tau() {
        let t = linspace(0.0, 4.0, 17);
        let mut v: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
        v[3] = 0.0;
        v[5] = -1.0;
        match fit_log_linear(&t, &v, (0.0, 4.0)) {
            Err(Error::NonPositive { tau, .. }) => assert_eq!(tau, t[3]),
            other => panic!("unexpected {other:?}"),
        }
        // outside the window it does not matter
        assert!(fit_log_linear(&t, &v, (2.0, 4.0)).is_ok());
    }

    #[test]
    fn needs_four_samples() {
        let t = linspace(0.0, 4.0, 9);
        let v: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
        assert!(matches!(fit_log_linear(&t, &v, (0.0, 1.0)), Err(Error::Insufficient(_))));
    }
}
