//! Pseudo-spectral reference solver for the limiting vorticity equation, its
//! clamped variant and the two-species system.

mod refinement;

pub use refinement::{uniqueness_refinement_check, RefinementConfig, RefinementRow, RefinementTable};

use crate::grid::{biot_savart_velocity, GridField, GridGeometry, SpectralField, VectorGridField};
use crate::kernels::{clamp_f, CutoffParams};
use crate::{Error, Result};
use rustfft::num_complex::Complex64;
use std::f64::consts::PI;

/// Step parameters of the reference solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdeConfig {
    pub nu: f64,
    pub dt: f64,
    /// Clamp the velocity componentwise to `[-M, M]` when set.
    pub cutoff: Option<CutoffParams>,
    /// Two-thirds rule on the flux spectrum.
    pub dealias: bool,
    pub geometry: GridGeometry,
    /// Largest tolerated fraction of `|ξ|` mass in the two outer node rings;
    /// `None` disables the check.
    pub boundary_tol: Option<f64>,
}

impl PdeConfig {
    pub fn new(geometry: GridGeometry, nu: f64, dt: f64) -> Result<Self> {
        if !(nu > 0.0 && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "nu = {nu} and dt = {dt} must be positive"
            )));
        }
        Ok(Self {
            nu,
            dt,
            cutoff: None,
            dealias: true,
            geometry,
            boundary_tol: Some(1e-8),
        })
    }

    pub fn with_cutoff(mut self, cutoff: Option<CutoffParams>) -> Self {
        self.cutoff = cutoff;
        self
    }
}

/// `u = K ∗ ξ` on the periodic box.
pub fn velocity_from_vorticity(xi: &GridField) -> VectorGridField {
    biot_savart_velocity(xi)
}

/// `Γ/(4πν(t+t₀)) exp(-|x|²/(4ν(t+t₀)))` with `t₀ = σ₀²/(2ν)`.
pub fn gaussian_vortex_exact(t: f64, nu: f64, sigma0: f64, circulation: f64, geometry: &GridGeometry) -> GridField {
    let s = 4.0 * nu * (t + sigma0 * sigma0 / (2.0 * nu));
    GridField::from_fn(*geometry, |x| circulation / (PI * s) * (-(x[0] * x[0] + x[1] * x[1]) / s).exp()).with_time(t)
}

/// What the solver observed over the steps taken so far.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolverMonitor {
    pub steps: usize,
    /// Largest velocity component seen, after clamping.
    pub max_velocity: f64,
    /// Largest velocity component before clamping.
    pub max_raw_velocity: f64,
    pub max_cfl: f64,
    pub max_boundary_fraction: f64,
}

/// ETD-Euler integrator holding one spectral state per species:
/// `ξ̂ ← e^{-ν|k|²dt} (ξ̂ + dt 𝒩̂)` with `𝒩 = -div(ξ v)` and `v` the
/// (clamped) velocity of the total vorticity.
#[derive(Clone, Debug)]
pub struct VorticitySolver {
    config: PdeConfig,
    species: Vec<SpectralField>,
    decay: Vec<f64>,
    time: f64,
    monitor: SolverMonitor,
}

impl VorticitySolver {
    pub fn new(xi: &GridField, config: PdeConfig) -> Result<Self> {
        Self::build(vec![xi], config)
    }

    /// Two nonnegative species advected by the velocity of `ξ⁺ - ξ⁻`.
    pub fn two_species(plus: &GridField, minus: &GridField, config: PdeConfig) -> Result<Self> {
        Self::build(vec![plus, minus], config)
    }

    fn build(fields: Vec<&GridField>, config: PdeConfig) -> Result<Self> {
        let g = config.geometry;
        if fields.iter().any(|f| f.geometry() != &g) {
            return Err(Error::GeometryMismatch("initial field and solver grid differ".into()));
        }
        let time = fields[0].time();
        let grid = SpectralField::zeros(g);
        let decay = (0..g.len())
            .map(|i| {
                let k = grid.wavevector(i);
                (-config.nu * (k[0] * k[0] + k[1] * k[1]) * config.dt).exp()
            })
            .collect();
        Ok(Self {
            config,
            species: fields.iter().map(|f| f.spectral()).collect(),
            decay,
            time,
            monitor: SolverMonitor::default(),
        })
    }

    pub fn config(&self) -> &PdeConfig {
        &self.config
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn monitor(&self) -> &SolverMonitor {
        &self.monitor
    }

    /// Each species field.
    pub fn fields(&self) -> Vec<GridField> {
        let mut out: Vec<GridField> = match self.species.as_slice() {
            [a, b] => {
                let (x, y) = SpectralField::to_real_pair(a, b);
                vec![x, y]
            }
            s => s.iter().map(|f| f.to_real()).collect(),
        };
        for f in &mut out {
            f.set_time(self.time);
        }
        out
    }

    /// Total vorticity `ξ` (two species: `ξ⁺ - ξ⁻`).
    pub fn vorticity(&self) -> GridField {
        self.total_spectrum().to_real().with_time(self.time)
    }

    fn total_spectrum(&self) -> SpectralField {
        match self.species.as_slice() {
            [a] => a.clone(),
            [a, b] => {
                let mut d = a.clone();
                for (c, m) in d.coeffs_mut().iter_mut().zip(b.coeffs()) {
                    *c -= *m;
                }
                d
            }
            _ => unreachable!("one or two species"),
        }
    }

    /// Takes one step of size `config.dt`.
    pub fn step(&mut self) -> Result<()> {
        let reals = self.fields();
        if let Some(tol) = self.config.boundary_tol {
            let fraction = boundary_fraction(&reals);
            self.monitor.max_boundary_fraction = self.monitor.max_boundary_fraction.max(fraction);
            if fraction > tol {
                return Err(Error::BoundaryMass {
                    fraction,
                    tolerance: tol,
                    time: self.time,
                });
            }
        }
        let (nonlinear, raw, clamped) = self.transport(&reals);
        let cfl = self.config.dt * clamped / self.config.geometry.spacing();
        self.monitor.max_raw_velocity = self.monitor.max_raw_velocity.max(raw);
        self.monitor.max_velocity = self.monitor.max_velocity.max(clamped);
        self.monitor.max_cfl = self.monitor.max_cfl.max(cfl);
        if cfl > 0.5 {
            return Err(Error::CflViolation { cfl, time: self.time });
        }
        let dt = self.config.dt;
        for (state, n) in self.species.iter_mut().zip(&nonlinear) {
            for ((c, n), d) in state.coeffs_mut().iter_mut().zip(n.coeffs()).zip(&self.decay) {
                *c = (*c + dt * n) * d;
            }
        }
        self.time += dt;
        self.monitor.steps += 1;
        Ok(())
    }

    /// `-div(ξ_s v)` per species, with the largest velocity component before
    /// and after clamping.
    fn transport(&self, reals: &[GridField]) -> (Vec<SpectralField>, f64, f64) {
        let g = self.config.geometry;
        let (ux_hat, uy_hat) = crate::grid::biot_savart_spectra(&self.total_spectrum());
        let (mut ux, mut uy) = SpectralField::to_real_pair(&ux_hat, &uy_hat);
        let mut raw = 0.0f64;
        let mut clamped = 0.0f64;
        for (a, b) in ux.values_mut().iter_mut().zip(uy.values_mut().iter_mut()) {
            raw = raw.max(a.abs()).max(b.abs());
            if let Some(params) = self.config.cutoff {
                [*a, *b] = clamp_f([*a, *b], params);
            }
            clamped = clamped.max(a.abs()).max(b.abs());
        }
        let third = g.n() as i64 / 3;
        let keep = |i: usize| {
            !self.config.dealias
                || (g.signed_index(i % g.n()).abs() < third && g.signed_index(i / g.n()).abs() < third)
        };
        let out = reals
            .iter()
            .map(|xi| {
                let flux = |u: &GridField| {
                    GridField::from_values(g, xi.values().iter().zip(u.values()).map(|(a, b)| a * b).collect())
                        .expect("finite flux")
                };
                let (fx, fy) = SpectralField::from_real_pair(&flux(&ux), &flux(&uy));
                let mut n = SpectralField::zeros(g);
                for (i, c) in n.coeffs_mut().iter_mut().enumerate() {
                    if keep(i) && !fx.on_nyquist(i) {
                        let k = fx.wavevector(i);
                        *c = -Complex64::i() * (k[0] * fx.coeffs()[i] + k[1] * fy.coeffs()[i]);
                    }
                }
                n
            })
            .collect();
        (out, raw, clamped)
    }

    /// Steps until `time` is reached; `time` must be a multiple of `dt` past
    /// the current time.
    pub fn advance_to(&mut self, time: f64) -> Result<()> {
        let k = ((time - self.time) / self.config.dt).round();
        if k < 0.0 || ((time - self.time) - k * self.config.dt).abs() > 1e-9 * self.config.dt.max(time.abs()) {
            return Err(Error::InvalidParameter(format!(
                "cannot reach t = {time} from t = {} in steps of {}",
                self.time, self.config.dt
            )));
        }
        for _ in 0..k as usize {
            self.step()?;
        }
        self.time = time;
        Ok(())
    }
}

/// Fraction of `Σ|ξ|`, summed over the given fields, on nodes with
/// `max(|x|,|y|) ≥ L - 2h`.
pub fn boundary_fraction(fields: &[GridField]) -> f64 {
    let mut band = 0.0;
    let mut total = 0.0;
    for field in fields {
        let g = field.geometry();
        let edge = g.half_width() - 2.0 * g.spacing();
        for (i, v) in field.values().iter().enumerate() {
            let x = g.point(i);
            total += v.abs();
            if x[0].abs().max(x[1].abs()) >= edge - 1e-12 * g.half_width() {
                band += v.abs();
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        band / total
    }
}

/// One ETD-Euler step of the single equation.
pub fn vorticity_step(xi: &GridField, config: &PdeConfig) -> Result<GridField> {
    let mut solver = VorticitySolver::new(xi, *config)?;
    solver.step()?;
    Ok(solver.fields().remove(0))
}

/// One ETD-Euler step of the two-species system.
pub fn two_species_step(plus: &GridField, minus: &GridField, config: &PdeConfig) -> Result<(GridField, GridField)> {
    let mut solver = VorticitySolver::two_species(plus, minus, *config)?;
    solver.step()?;
    let mut f = solver.fields();
    let minus = f.pop().expect("two species");
    Ok((f.pop().expect("two species"), minus))
}

/// `-div(ξ v)` with `v` the (clamped) velocity of `ξ`, as used by the
/// stepper.
pub fn transport_term(xi: &GridField, config: &PdeConfig) -> Result<GridField> {
    let solver = VorticitySolver::new(xi, *config)?;
    let (mut n, _, _) = solver.transport(std::slice::from_ref(xi));
    Ok(n.remove(0).to_real())
}
