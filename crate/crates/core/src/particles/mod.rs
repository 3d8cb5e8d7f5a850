//! The interacting particle system: initial sampling, drift, Euler–Maruyama
//! stepping, whole trajectories and box-concentration audits.

mod concentration;
mod drift;
mod dynamics;
mod noise;
mod sampling;

pub use concentration::{box_concentration, concentration_audit, ConcentrationAudit};
pub(crate) use drift::canonical_order;
pub use drift::{drift, grid_drift, DriftMethod};
pub use dynamics::{apply_increments, euler_maruyama_step, run_trajectory, Trajectory};
pub(crate) use dynamics::{run_trajectory_with, ParticleSystem};
pub use noise::brownian_increments;
pub use sampling::{initial_regularity_probe, sample_initial, InitialDataSpec, InitialKind};

use crate::{Error, Result, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Species {
    Plus,
    Minus,
}

impl Species {
    pub fn sign(self) -> f64 {
        match self {
            Species::Plus => 1.0,
            Species::Minus => -1.0,
        }
    }

    pub(crate) fn tag(self) -> u64 {
        match self {
            Species::Plus => 0,
            Species::Minus => 1,
        }
    }
}

/// Positions, signed weights and species of a particle cloud, with the seed
/// and step counter that address its Brownian increments.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleEnsemble {
    positions: Vec<Vec2>,
    weights: Vec<f64>,
    species: Vec<Species>,
    seed: u64,
    step: u64,
}

impl ParticleEnsemble {
    pub fn new(positions: Vec<Vec2>, weights: Vec<f64>, species: Vec<Species>, seed: u64) -> Result<Self> {
        if positions.len() != weights.len() || positions.len() != species.len() {
            return Err(Error::InvalidParameter(format!(
                "ensemble arrays differ in length: {} positions, {} weights, {} species",
                positions.len(),
                weights.len(),
                species.len()
            )));
        }
        if let Some(i) = positions.iter().position(|x| !(x[0].is_finite() && x[1].is_finite())) {
            return Err(Error::InvalidParameter(format!("particle {i} has a non-finite position")));
        }
        Ok(Self {
            positions,
            weights,
            species,
            seed,
            step: 0,
        })
    }

    /// `N` particles of one species with weight `1/N` each.
    pub fn unsigned(positions: Vec<Vec2>, seed: u64) -> Self {
        let n = positions.len();
        Self {
            weights: vec![1.0 / n.max(1) as f64; n],
            species: vec![Species::Plus; n],
            positions,
            seed,
            step: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of completed Euler–Maruyama steps.
    pub fn step(&self) -> u64 {
        self.step
    }

    /// Particles per species, the `N` of the `V^N` scaling.
    pub fn n_per_species(&self) -> usize {
        let plus = self.species.iter().filter(|s| **s == Species::Plus).count();
        plus.max(self.len() - plus)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// The sub-cloud of one species, keeping weights and lineage.
    pub fn select(&self, species: Species) -> ParticleEnsemble {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.species[i] == species).collect();
        ParticleEnsemble {
            positions: keep.iter().map(|&i| self.positions[i]).collect(),
            weights: keep.iter().map(|&i| self.weights[i]).collect(),
            species: vec![species; keep.len()],
            seed: self.seed,
            step: self.step,
        }
    }

    pub(crate) fn with_positions(&self, positions: Vec<Vec2>) -> ParticleEnsemble {
        ParticleEnsemble {
            positions,
            weights: self.weights.clone(),
            species: self.species.clone(),
            seed: self.seed,
            step: self.step + 1,
        }
    }

    /// Index of each particle within its own species.
    pub(crate) fn species_indices(&self) -> Vec<u64> {
        let mut counts = [0u64; 2];
        self.species
            .iter()
            .map(|s| {
                let c = &mut counts[s.tag() as usize];
                *c += 1;
                *c - 1
            })
            .collect()
    }
}
