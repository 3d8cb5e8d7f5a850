//! Uniform periodic grids over `[-L, L)²` and the spectral machinery built on
//! them.
//!
//! Values are stored row-major: row `r` holds `y = -L + r·h`, column `c` holds
//! `x = -L + c·h`. Spectral coefficients use the standard FFT layout with
//! wavenumbers `(π/L)·{0, 1, …, n/2-1, -n/2, …, -1}` along each axis.

pub(crate) mod deposit;
mod fft;
mod field;
mod frechet;
mod ops;

pub use deposit::deposit_mollified;
pub use field::{GridField, SpectralField, VectorGridField};
pub use frechet::{ball_window, frechet_distance, slobodeckij_norm, windowed_bessel_norm};
pub use ops::{
    bessel_apply, bessel_norm, biot_savart_velocity, convolve_centered, grad_semigroup_commute_check,
    heat_semigroup, semigroup_smoothing_probe, spectral_gradient, sup_norm_on_box,
};

pub(crate) use fft::Fft2;
pub(crate) use ops::biot_savart_spectra;

use crate::{Error, Result, Vec2};

/// Discretisation of the plane by the periodic box `[-L, L)²` with `n` nodes
/// per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridGeometry {
    n: usize,
    half_width: f64,
}

impl GridGeometry {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid size {n} must be a power of two and at least 16"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "box half-width {half_width} must be positive"
            )));
        }
        Ok(Self { n, half_width })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Number of nodes, `n²`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical coordinate of node index `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Node position for a flat row-major index.
    pub fn point(&self, index: usize) -> Vec2 {
        [self.coord(index % self.n), self.coord(index / self.n)]
    }

    /// Flat index of the node at the origin.
    pub fn origin_index(&self) -> usize {
        let half = self.n / 2;
        half * self.n + half
    }

    /// Signed FFT index of storage position `i`.
    pub fn signed_index(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Physical wavenumber of storage position `i`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        std::f64::consts::PI / self.half_width * self.signed_index(i) as f64
    }

    pub(crate) fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Minimum-image reduction of a displacement component into `[-L, L)`.
    pub fn wrap(&self, d: f64) -> f64 {
        let period = 2.0 * self.half_width;
        let w = d - period * ((d + self.half_width) / period).floor();
        if w >= self.half_width {
            w - period
        } else {
            w
        }
    }

    /// Whether `other` samples the same box on a grid that this one refines.
    pub fn refines(&self, other: &GridGeometry) -> bool {
        self.half_width == other.half_width && self.n >= other.n && self.n.is_multiple_of(other.n)
    }
}
