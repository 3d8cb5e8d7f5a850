use super::ParticleEnsemble;
use crate::Vec2;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// ChaCha words consumed per particle and step: two `u64` draws.
const WORDS_PER_STEP: u128 = 4;

/// Standard normal pair for one particle at one step.
///
/// The generator is addressed by `(seed, species, index, step)` alone, so the
/// increments do not depend on evaluation order or thread count. Box–Muller
/// keeps the number of raw draws fixed, which the addressing relies on.
pub(crate) fn normal_pair(base: &ChaCha8Rng, species: u64, index: u64, step: u64) -> Vec2 {
    let mut rng = base.clone();
    rng.set_stream(species << 62 | index);
    rng.set_word_pos(step as u128 * WORDS_PER_STEP);
    let unit = |x: u64| 1.0 - (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let u1 = unit(rng.next_u64());
    let u2 = unit(rng.next_u64());
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    [r * c, r * s]
}

/// Brownian increments `W_{t+dt} - W_t` for every particle at the ensemble's
/// current step.
pub fn brownian_increments(ensemble: &ParticleEnsemble, dt: f64) -> Vec<Vec2> {
    let base = ChaCha8Rng::seed_from_u64(ensemble.seed());
    let sd = dt.sqrt();
    ensemble
        .species()
        .iter()
        .zip(ensemble.species_indices())
        .map(|(s, i)| {
            let g = normal_pair(&base, s.tag(), i, ensemble.step());
            [sd * g[0], sd * g[1]]
        })
        .collect()
}
