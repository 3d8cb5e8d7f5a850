use super::{GridField, GridGeometry};
use crate::kernels::{MollifierSpec, ScaledMollifier};
use crate::particles::ParticleEnsemble;
use crate::{Error, Result, Vec2};

/// `g(x_j) = Σ_i w_i V^N(x_j - X_i)` on the grid nodes.
///
/// Each particle's footprint is rescaled so that its Riemann sum is exactly
/// `w_i`; the unscaled bump sum differs from one by the quadrature error of the
/// grid, about `1e-4` at four cells per radius.
pub fn deposit_mollified(
    ensemble: &ParticleEnsemble,
    spec: &MollifierSpec,
    n: usize,
    beta: f64,
    geometry: &GridGeometry,
) -> Result<GridField> {
    deposit_weighted(
        ensemble.positions(),
        ensemble.weights(),
        &spec.scaled(n, beta),
        geometry,
    )
}

pub(crate) fn deposit_weighted(
    positions: &[Vec2],
    weights: &[f64],
    mollifier: &ScaledMollifier,
    geometry: &GridGeometry,
) -> Result<GridField> {
    debug_assert_eq!(positions.len(), weights.len());
    let mut field = GridField::zeros(*geometry);
    if positions.is_empty() {
        return Ok(field);
    }
    mollifier.check_resolution(geometry)?;
    let radius = mollifier.radius();
    let l = geometry.half_width();
    for (index, x) in positions.iter().enumerate() {
        let inside = |c: f64| c >= -l + radius && c < l - radius;
        if !(inside(x[0]) && inside(x[1])) {
            return Err(Error::ClippedParticle {
                index,
                x: x[0],
                y: x[1],
            });
        }
    }
    let mut scratch = Vec::new();
    let values = field.values_mut();
    for i in crate::particles::canonical_order(positions, weights) {
        if weights[i] == 0.0 {
            continue;
        }
        add_footprint(values, mollifier, geometry, positions[i], weights[i], &mut scratch);
    }
    Ok(field)
}

/// A single normalised footprint, used to build kernel tables. Wraps
/// periodically, so the centre may sit anywhere in the box.
pub(crate) fn footprint_field(
    mollifier: &ScaledMollifier,
    geometry: &GridGeometry,
    center: Vec2,
    weight: f64,
) -> GridField {
    let mut field = GridField::zeros(*geometry);
    let mut scratch = Vec::new();
    add_footprint(
        field.values_mut(),
        mollifier,
        geometry,
        center,
        weight,
        &mut scratch,
    );
    field
}

fn add_footprint(
    values: &mut [f64],
    mollifier: &ScaledMollifier,
    geometry: &GridGeometry,
    x: Vec2,
    weight: f64,
    scratch: &mut Vec<(usize, f64)>,
) {
    let n = geometry.n() as i64;
    let h = geometry.spacing();
    let l = geometry.half_width();
    let radius = mollifier.radius();
    let lo = |c: f64| ((c - radius + l) / h).ceil() as i64;
    let hi = |c: f64| ((c + radius + l) / h).floor() as i64;
    scratch.clear();
    let mut total = 0.0;
    for r in lo(x[1])..=hi(x[1]) {
        let dy = -l + r as f64 * h - x[1];
        let row = r.rem_euclid(n) as usize * n as usize;
        for c in lo(x[0])..=hi(x[0]) {
            let dx = -l + c as f64 * h - x[0];
            let v = mollifier.eval_sq(dx * dx + dy * dy);
            if v > 0.0 {
                scratch.push((row + c.rem_euclid(n) as usize, v));
                total += v;
            }
        }
    }
    if total == 0.0 {
        return;
    }
    let scale = weight / (total * h * h);
    for &(i, v) in scratch.iter() {
        values[i] += scale * v;
    }
}
