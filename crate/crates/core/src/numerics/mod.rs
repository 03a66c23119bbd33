//! Shared numerical primitives: adaptive quadrature, principal values,
//! log-linear rate fits, grids and interpolation.

mod fit;
mod grid;
mod quad;

pub use fit::{fit_log_linear, fit_rate, RateFit, MIN_FIT_SAMPLES};
pub use grid::{interp_complex, ComplexSpline, CubicSpline, Grid, SpacingPolicy};
pub use quad::{
    integrate, integrate_finite, integrate_pv_symmetric, integrate_real, integrate_semi_infinite,
    integrate_with, wynn_epsilon, Domain, QuadConfig, QuadResult,
};

/// First derivative by a five-point central stencil (Richardson-extrapolated
/// three-point differences).
pub fn derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)
}
