use super::drift::{drift, grid_drift, DriftMethod};
use super::noise::brownian_increments;
use super::{sample_initial, ParticleEnsemble, Species};
use crate::config::SimConfig;
use crate::grid::{deposit_mollified, GridField, GridGeometry};
use crate::kernels::{build_smoothed_kernel, CutoffParams, MollifierSpec, SmoothedKernelTable};
use crate::{Error, Result, Vec2};

/// `X_i + b_i dt + √(2ν) ΔW_i` with the given increments.
pub fn apply_increments(
    ensemble: &ParticleEnsemble,
    drift: &[Vec2],
    increments: &[Vec2],
    dt: f64,
    nu: f64,
) -> ParticleEnsemble {
    let s = (2.0 * nu).sqrt();
    let positions = ensemble
        .positions()
        .iter()
        .zip(drift)
        .zip(increments)
        .map(|((x, b), dw)| [x[0] + b[0] * dt + s * dw[0], x[1] + b[1] * dt + s * dw[1]])
        .collect();
    ensemble.with_positions(positions)
}

/// One Euler–Maruyama step with the ensemble's own Brownian increments.
pub fn euler_maruyama_step(ensemble: &ParticleEnsemble, drift: &[Vec2], dt: f64, nu: f64) -> Result<ParticleEnsemble> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step {dt} must be positive")));
    }
    if drift.len() != ensemble.len() {
        return Err(Error::InvalidParameter(format!(
            "{} drift vectors for {} particles",
            drift.len(),
            ensemble.len()
        )));
    }
    Ok(apply_increments(ensemble, drift, &brownian_increments(ensemble, dt), dt, nu))
}

/// A particle system in motion, advanced one fixed step at a time.
pub(crate) struct ParticleSystem {
    ensemble: ParticleEnsemble,
    mollifier: MollifierSpec,
    n: usize,
    beta: f64,
    geometry: GridGeometry,
    cutoff: CutoffParams,
    table: Option<SmoothedKernelTable>,
    dt: f64,
    nu: f64,
}

impl ParticleSystem {
    pub(crate) fn new(config: &SimConfig, n: usize, seed: u64) -> Result<Self> {
        let ensemble = sample_initial(&config.initial, n, seed)?;
        let mollifier = MollifierSpec::bump();
        let table = match config.drift {
            DriftMethod::Direct => Some(build_smoothed_kernel(&mollifier, n, config.beta, &config.geometry)?),
            DriftMethod::Grid => None,
        };
        Ok(Self {
            ensemble,
            mollifier,
            n,
            beta: config.beta,
            geometry: config.geometry,
            cutoff: CutoffParams::new(config.m)?,
            table,
            dt: config.dt,
            nu: config.nu,
        })
    }

    pub(crate) fn ensemble(&self) -> &ParticleEnsemble {
        &self.ensemble
    }

    pub(crate) fn time(&self) -> f64 {
        self.ensemble.step() as f64 * self.dt
    }

    /// Advances one step and returns the Brownian increments it used.
    pub(crate) fn step(&mut self) -> Result<Vec<Vec2>> {
        let b = match &self.table {
            Some(t) => drift(&self.ensemble, t, self.cutoff)?,
            None => grid_drift(&self.ensemble, &self.mollifier, self.n, self.beta, &self.geometry, self.cutoff)?,
        };
        let dw = brownian_increments(&self.ensemble, self.dt);
        self.ensemble = apply_increments(&self.ensemble, &b, &dw, self.dt, self.nu);
        Ok(dw)
    }

    pub(crate) fn deposit(&self, ensemble: &ParticleEnsemble) -> Result<GridField> {
        Ok(deposit_mollified(ensemble, &self.mollifier, self.n, self.beta, &self.geometry)?.with_time(self.time()))
    }
}

/// Snapshots of `g^N_t` and, for signed runs, of each species.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// `g^N` (signed runs: `g^{N,+} - g^{N,-}`) at each snapshot time.
    pub fields: Vec<GridField>,
    /// `(g^{N,+}, g^{N,-})` per snapshot for signed runs.
    pub species_fields: Option<Vec<(GridField, GridField)>>,
    pub ensemble: ParticleEnsemble,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.fields.iter().map(|f| f.time()).collect()
    }
}

/// Runs the particle system with `config.n_particles` particles per species
/// on `[0, T]`, depositing at the configured snapshot times.
pub fn run_trajectory(config: &SimConfig, seed: u64) -> Result<Trajectory> {
    run_trajectory_with(config, config.n_particles, seed)
}

pub(crate) fn run_trajectory_with(config: &SimConfig, n: usize, seed: u64) -> Result<Trajectory> {
    let mut system = ParticleSystem::new(config, n, seed)?;
    let signed = config.initial.is_signed();
    let steps = config.step_count();
    let marks = config.snapshot_steps();
    let mut fields = Vec::with_capacity(marks.len());
    let mut species_fields = signed.then(Vec::new);
    let mut record = |system: &ParticleSystem| -> Result<()> {
        let e = system.ensemble();
        if let Some(parts) = species_fields.as_mut() {
            let plus = system.deposit(&e.select(Species::Plus))?;
            let minus = system.deposit(&e.select(Species::Minus))?.scaled(-1.0);
            let mut diff = plus.clone();
            diff.add_scaled(-1.0, &minus);
            fields.push(diff);
            parts.push((plus, minus));
        } else {
            fields.push(system.deposit(e)?);
        }
        Ok(())
    };
    for k in 0..=steps {
        if marks.contains(&k) {
            record(&system)?;
        }
        if k < steps {
            system.step()?;
        }
    }
    Ok(Trajectory {
        fields,
        species_fields,
        ensemble: system.ensemble,
    })
}
