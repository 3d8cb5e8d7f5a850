//! Moderately interacting particle approximation of the two-dimensional
//! vorticity equation.
//!
//! The crate is organised bottom-up:
//!
//! - [`kernels`]: the bump mollifier and its `N`-dependent rescaling, the
//!   Biot–Savart kernel, the drift cutoff and the smoothed kernel table.
//! - [`grid`]: periodic grid fields, spectral transforms, Bessel-potential
//!   norms, the heat semigroup, mollified deposition and the Fréchet
//!   trajectory distance.
//! - [`particles`]: initial sampling, drift evaluation, Euler–Maruyama
//!   stepping, whole-trajectory runs and box-concentration audits.
//! - [`pde`]: the pseudo-spectral reference solver for the limiting equation
//!   and the two-species system, plus the Lamb–Oseen exact solution.
//! - [`analysis`]: Monte Carlo diagnostics and convergence sweeps.
//! - [`config`]: flat `key = value` run configuration with admissibility
//!   gates.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::field_reassign_with_default))]

pub mod analysis;
pub mod config;
mod error;
pub mod grid;
pub mod kernels;
pub mod particles;
pub mod pde;
pub mod stats;

pub use error::{Error, Result};

/// A point or vector in the plane.
pub type Vec2 = [f64; 2];
