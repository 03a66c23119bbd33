//! Spectral theory and simulation of the fractional Fokker-Planck operator
//! of the Levy-Ornstein-Uhlenbeck process.
//!
//! Fourier convention throughout: `f(k) = int f(x) e^{ikx} dx` and
//! `f(x) = (1/2pi) int f(k) e^{-ikx} dk`. Time is measured in units of the
//! inverse restoring rate and space so that the stationary characteristic
//! function is `exp(-|k|^mu / mu)`.

// `!(a < b)` comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigen;
pub mod error;
pub mod kernel;
pub mod montecarlo;
pub mod evolve;
pub mod numerics;
pub mod observables;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;
