use rustfft::num_complex::Complex64;

use super::{Fft2, GridGeometry};
use crate::{Error, Result, Vec2};

/// Real scalar field sampled on the nodes of a [`GridGeometry`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    geometry: GridGeometry,
    values: Vec<f64>,
    time: f64,
}

impl GridField {
    pub fn zeros(geometry: GridGeometry) -> Self {
        Self {
            geometry,
            values: vec![0.0; geometry.len()],
            time: 0.0,
        }
    }

    pub fn from_fn(geometry: GridGeometry, f: impl Fn(Vec2) -> f64) -> Self {
        let values = (0..geometry.len()).map(|i| f(geometry.point(i))).collect();
        Self {
            geometry,
            values,
            time: 0.0,
        }
    }

    pub fn from_values(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::GeometryMismatch(format!(
                "{} values for a {}×{} grid",
                values.len(),
                geometry.n(),
                geometry.n()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite grid value at index {i}"
            )));
        }
        Ok(Self {
            geometry,
            values,
            time: 0.0,
        })
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.geometry.n() + col]
    }

    pub fn spectral(&self) -> SpectralField {
        let mut coeffs: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Fft2::plan(self.geometry.n()).forward(&mut coeffs);
        SpectralField {
            geometry: self.geometry,
            coeffs,
        }
    }

    /// Riemann sum `h² Σ f`.
    pub fn integral(&self) -> f64 {
        self.geometry.cell_area() * self.values.iter().sum::<f64>()
    }

    /// `h²`-weighted discrete `L^p` norm; `p = ∞` gives the maximum modulus.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        let sum: f64 = if p == 2.0 {
            self.values.iter().map(|v| v * v).sum()
        } else {
            self.values.iter().map(|v| v.abs().powf(p)).sum()
        };
        (self.geometry.cell_area() * sum).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Periodic bilinear interpolation.
    pub fn interpolate(&self, x: Vec2) -> f64 {
        bilinear(&self.geometry, &self.values, x)
    }

    fn assert_same_grid(&self, other: &GridField) {
        assert_eq!(
            self.geometry, other.geometry,
            "grid fields live on different geometries"
        );
    }

    /// Pointwise `self - other`; both fields must share a geometry.
    pub fn sub(&self, other: &GridField) -> GridField {
        self.assert_same_grid(other);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        GridField {
            geometry: self.geometry,
            values,
            time: self.time,
        }
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, scale: f64, other: &GridField) {
        self.assert_same_grid(other);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += scale * b;
        }
    }

    pub fn scaled(&self, scale: f64) -> GridField {
        GridField {
            geometry: self.geometry,
            values: self.values.iter().map(|v| v * scale).collect(),
            time: self.time,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField {
            geometry: self.geometry,
            values: self.values.iter().map(|&v| f(v)).collect(),
            time: self.time,
        }
    }

    /// Sample onto a coarser grid of the same box by taking the coincident
    /// nodes.
    pub fn restrict_to(&self, coarse: &GridGeometry) -> Result<GridField> {
        if !self.geometry.refines(coarse) {
            return Err(Error::GeometryMismatch(format!(
                "a {}-point grid cannot be restricted to {} points",
                self.geometry.n(),
                coarse.n()
            )));
        }
        let stride = self.geometry.n() / coarse.n();
        let n = self.geometry.n();
        let values = (0..coarse.len())
            .map(|i| {
                let (r, c) = (i / coarse.n(), i % coarse.n());
                self.values[r * stride * n + c * stride]
            })
            .collect();
        Ok(GridField {
            geometry: *coarse,
            values,
            time: self.time,
        })
    }
}

pub(crate) fn bilinear(geometry: &GridGeometry, values: &[f64], x: Vec2) -> f64 {
    let n = geometry.n();
    let h = geometry.spacing();
    let l = geometry.half_width();
    let u = (x[0] + l) / h;
    let v = (x[1] + l) / h;
    let (fu, fv) = (u.floor(), v.floor());
    let (tx, ty) = (u - fu, v - fv);
    let c0 = (fu as i64).rem_euclid(n as i64) as usize;
    let r0 = (fv as i64).rem_euclid(n as i64) as usize;
    let c1 = (c0 + 1) % n;
    let r1 = (r0 + 1) % n;
    let f00 = values[r0 * n + c0];
    let f01 = values[r0 * n + c1];
    let f10 = values[r1 * n + c0];
    let f11 = values[r1 * n + c1];
    (1.0 - ty) * ((1.0 - tx) * f00 + tx * f01) + ty * ((1.0 - tx) * f10 + tx * f11)
}

/// Unnormalised discrete Fourier coefficients of a grid field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    geometry: GridGeometry,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(geometry: GridGeometry) -> Self {
        Self {
            geometry,
            coeffs: vec![Complex64::default(); geometry.len()],
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Inverse transform, keeping the real part.
    pub fn to_real(&self) -> GridField {
        let mut data = self.coeffs.clone();
        Fft2::plan(self.geometry.n()).inverse(&mut data);
        GridField {
            geometry: self.geometry,
            values: data.into_iter().map(|c| c.re).collect(),
            time: 0.0,
        }
    }

    /// Multiply every mode by `m(kx, ky)`.
    pub fn multiply(&self, m: impl Fn(f64, f64) -> f64) -> SpectralField {
        self.map_modes(|kx, ky, c| c * m(kx, ky))
    }

    /// Apply `f(kx, ky, coefficient)` to every mode.
    pub fn map_modes(&self, f: impl Fn(f64, f64, Complex64) -> Complex64) -> SpectralField {
        let g = &self.geometry;
        let n = g.n();
        let kx: Vec<f64> = (0..n).map(|i| g.wavenumber(i)).collect();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(kx[i % n], kx[i / n], c))
            .collect();
        SpectralField {
            geometry: self.geometry,
            coeffs,
        }
    }

    /// Physical wavevector of flat index `i`.
    pub fn wavevector(&self, i: usize) -> Vec2 {
        let n = self.geometry.n();
        [
            self.geometry.wavenumber(i % n),
            self.geometry.wavenumber(i / n),
        ]
    }

    /// Whether flat index `i` sits on a Nyquist row or column.
    pub fn on_nyquist(&self, i: usize) -> bool {
        let n = self.geometry.n();
        self.geometry.is_nyquist(i % n) || self.geometry.is_nyquist(i / n)
    }

    /// Discrete `L²` norm of the represented field via Parseval.
    pub fn l2_norm(&self) -> f64 {
        let n2 = self.geometry.len() as f64;
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (self.geometry.cell_area() * sum / n2).sqrt()
    }

    /// Inverse-transform two Hermitian spectra with one complex FFT.
    pub fn to_real_pair(a: &SpectralField, b: &SpectralField) -> (GridField, GridField) {
        assert_eq!(a.geometry, b.geometry);
        let i = Complex64::new(0.0, 1.0);
        let mut data: Vec<Complex64> = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| x + i * y)
            .collect();
        Fft2::plan(a.geometry.n()).inverse(&mut data);
        let (re, im) = data.into_iter().map(|c| (c.re, c.im)).unzip();
        (
            GridField {
                geometry: a.geometry,
                values: re,
                time: 0.0,
            },
            GridField {
                geometry: a.geometry,
                values: im,
                time: 0.0,
            },
        )
    }

    /// Forward-transform two real fields with one complex FFT.
    pub fn from_real_pair(a: &GridField, b: &GridField) -> (SpectralField, SpectralField) {
        assert_eq!(a.geometry, b.geometry);
        let g = a.geometry;
        let n = g.n();
        let mut data: Vec<Complex64> = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(&x, &y)| Complex64::new(x, y))
            .collect();
        Fft2::plan(n).forward(&mut data);
        let mut sa = vec![Complex64::default(); g.len()];
        let mut sb = vec![Complex64::default(); g.len()];
        for r in 0..n {
            let rm = (n - r) % n;
            for c in 0..n {
                let cm = (n - c) % n;
                let z = data[r * n + c];
                let zc = data[rm * n + cm].conj();
                sa[r * n + c] = (z + zc) * 0.5;
                sb[r * n + c] = Complex64::new(0.0, -0.5) * (z - zc);
            }
        }
        (
            SpectralField {
                geometry: g,
                coeffs: sa,
            },
            SpectralField {
                geometry: g,
                coeffs: sb,
            },
        )
    }
}

/// Two-component field on a grid, e.g. a velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorGridField {
    geometry: GridGeometry,
    components: [Vec<f64>; 2],
    time: f64,
}

impl VectorGridField {
    pub fn new(x: GridField, y: GridField) -> Self {
        assert_eq!(x.geometry, y.geometry);
        Self {
            geometry: x.geometry,
            time: x.time,
            components: [x.values, y.values],
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn component(&self, axis: usize) -> GridField {
        GridField {
            geometry: self.geometry,
            values: self.components[axis].clone(),
            time: self.time,
        }
    }

    pub fn component_values(&self, axis: usize) -> &[f64] {
        &self.components[axis]
    }

    pub fn at_index(&self, index: usize) -> Vec2 {
        [self.components[0][index], self.components[1][index]]
    }

    pub fn set_at_index(&mut self, index: usize, v: Vec2) {
        self.components[0][index] = v[0];
        self.components[1][index] = v[1];
    }

    pub fn interpolate(&self, x: Vec2) -> Vec2 {
        [
            bilinear(&self.geometry, &self.components[0], x),
            bilinear(&self.geometry, &self.components[1], x),
        ]
    }

    /// Largest Euclidean magnitude over the nodes.
    pub fn max_magnitude(&self) -> f64 {
        self.components[0]
            .iter()
            .zip(&self.components[1])
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    /// Largest single-component modulus over the nodes.
    pub fn max_component(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}
