use super::ParticleEnsemble;
use crate::grid::{biot_savart_velocity, deposit_mollified, GridGeometry};
use crate::kernels::{clamp_f, CutoffParams, MollifierSpec, SmoothedKernelTable};
use crate::{Error, Result, Vec2};
use rayon::prelude::*;

/// How the smoothed interaction is summed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriftMethod {
    /// `O(N²)` pair sum through the kernel table.
    Direct,
    /// Deposit, spectral velocity, bilinear read-back.
    Grid,
}

/// Index order independent of particle labels, used wherever floating-point
/// sums run over the cloud.
pub(crate) fn canonical_order(positions: &[Vec2], weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|&a, &b| {
        positions[a][0]
            .total_cmp(&positions[b][0])
            .then(positions[a][1].total_cmp(&positions[b][1]))
            .then(weights[a].total_cmp(&weights[b]))
    });
    order
}

fn check_inside(ensemble: &ParticleEnsemble, geometry: &GridGeometry) -> Result<()> {
    let l = geometry.half_width();
    match ensemble
        .positions()
        .iter()
        .position(|x| !(x[0] >= -l && x[0] < l && x[1] >= -l && x[1] < l))
    {
        Some(i) => Err(Error::GeometryMismatch(format!(
            "particle {i} at ({}, {}) lies outside the table box of half-width {l}",
            ensemble.positions()[i][0],
            ensemble.positions()[i][1]
        ))),
        None => Ok(()),
    }
}

/// `b_i = F(Σ_k w_k (K ∗ V^N)(X_i - X_k))`, self-term included.
pub fn drift(ensemble: &ParticleEnsemble, table: &SmoothedKernelTable, params: CutoffParams) -> Result<Vec<Vec2>> {
    check_inside(ensemble, table.geometry())?;
    let x = ensemble.positions();
    let w = ensemble.weights();
    let order = canonical_order(x, w);
    Ok(x.par_iter()
        .map(|xi| {
            let mut acc = [0.0, 0.0];
            for &k in &order {
                let t = table.eval([xi[0] - x[k][0], xi[1] - x[k][1]]);
                acc[0] += w[k] * t[0];
                acc[1] += w[k] * t[1];
            }
            clamp_f(acc, params)
        })
        .collect())
}

/// The same drift through the mollified density `g^N` on a grid.
pub fn grid_drift(
    ensemble: &ParticleEnsemble,
    spec: &MollifierSpec,
    n: usize,
    beta: f64,
    geometry: &GridGeometry,
    params: CutoffParams,
) -> Result<Vec<Vec2>> {
    let g = deposit_mollified(ensemble, spec, n, beta, geometry)?;
    let u = biot_savart_velocity(&g);
    Ok(ensemble
        .positions()
        .iter()
        .map(|x| clamp_f(u.interpolate(*x), params))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::build_smoothed_kernel;
    use crate::particles::{sample_initial, InitialDataSpec, Species};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(n: usize, beta: f64, grid: usize, l: f64) -> SmoothedKernelTable {
        build_smoothed_kernel(&MollifierSpec::bump(), n, beta, &GridGeometry::new(grid, l).unwrap()).unwrap()
    }

    #[test]
    fn single_particle_has_no_drift() {
        let t = table(1, 0.2, 64, 4.0);
        let e = ParticleEnsemble::unsigned(vec![[0.3, -0.2]], 0);
        assert_eq!(drift(&e, &t, CutoffParams::new(1.0).unwrap()).unwrap(), vec![[0.0, 0.0]]);
    }

    #[test]
    fn symmetric_pair_is_antisymmetric() {
        let t = table(2, 0.2, 128, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let c: Vec2 = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            let d: Vec2 = [rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
            let e = ParticleEnsemble::unsigned(vec![[c[0] + d[0], c[1] + d[1]], [c[0] - d[0], c[1] - d[1]]], 0);
            let b = drift(&e, &t, CutoffParams::new(0.05).unwrap()).unwrap();
            assert!((b[0][0] + b[1][0]).abs() < 1e-10 && (b[0][1] + b[1][1]).abs() < 1e-10);
        }
    }

    #[test]
    fn drift_respects_cutoff_and_box() {
        let t = table(200, 0.2, 128, 2.0);
        let spec = InitialDataSpec::gaussian([0.0, 0.0], 0.3);
        let e = sample_initial(&spec, 200, 1).unwrap();
        for m in [0.0, 0.01, 0.1] {
            let b = drift(&e, &t, CutoffParams::new(m).unwrap()).unwrap();
            assert!(b.iter().all(|v| v[0].abs() <= m && v[1].abs() <= m));
        }
        let outside = ParticleEnsemble::unsigned(vec![[2.5, 0.0]], 0);
        assert!(matches!(
            drift(&outside, &t, CutoffParams::new(1.0).unwrap()),
            Err(Error::GeometryMismatch(_))
        ));
    }

    #[test]
    fn grid_path_matches_direct_sum() {
        let geometry = GridGeometry::new(256, 2.0).unwrap();
        let spec = MollifierSpec::bump();
        let big = CutoffParams::new(1e9).unwrap();
        for (n, data) in [
            (2000, InitialDataSpec::gaussian([0.1, -0.2], 0.4)),
            (500, InitialDataSpec::dipole([0.4, 0.0], [-0.4, 0.0], 0.25, 1.0)),
        ] {
            let e = sample_initial(&data, n, 5).unwrap();
            let t = build_smoothed_kernel(&spec, e.n_per_species(), 0.15, &geometry).unwrap();
            let direct = drift(&e, &t, big).unwrap();
            let grid = grid_drift(&e, &spec, e.n_per_species(), 0.15, &geometry, big).unwrap();
            let scale = direct.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
            let err = direct
                .iter()
                .zip(&grid)
                .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
                .fold(0.0, f64::max);
            assert!(err < 1e-3 * scale, "N={n}: {err:e} vs {scale:e}");
        }
    }

    #[test]
    fn signed_weights_enter_with_sign() {
        let t = table(1, 0.2, 128, 2.0);
        let e = ParticleEnsemble::new(
            vec![[0.0, 0.0], [0.5, 0.0]],
            vec![1.0, -1.0],
            vec![Species::Plus, Species::Minus],
            0,
        )
        .unwrap();
        let b = drift(&e, &t, CutoffParams::new(10.0).unwrap()).unwrap();
        let k = t.eval([-0.5, 0.0]);
        assert!((b[0][0] + k[0]).abs() < 1e-15 && (b[0][1] + k[1]).abs() < 1e-15);
        // a ± pair translates together
        assert!((b[0][1] - b[1][1]).abs() < 1e-10);
    }
}
