use super::ParticleEnsemble;
use crate::grid::GridGeometry;
use crate::Vec2;
use std::collections::HashMap;

fn half_width(ensemble: &ParticleEnsemble, r: f64, beta: f64) -> f64 {
    r / (ensemble.n_per_species().max(1) as f64).powf(beta)
}

fn in_box(x: Vec2, center: Vec2, w: f64) -> bool {
    (x[0] - center[0]).abs() <= w && (x[1] - center[1]).abs() <= w
}

/// Number of particles in the closed square of half-width `r N^{-β}` around
/// `center`.
pub fn box_concentration(ensemble: &ParticleEnsemble, center: Vec2, r: f64, beta: f64) -> usize {
    let w = half_width(ensemble, r, beta);
    ensemble.positions().iter().filter(|x| in_box(**x, center, w)).count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcentrationAudit {
    pub passed: bool,
    /// `(C_sup / h_V) N^{1-2β}`.
    pub bound: f64,
    pub worst_center: Vec2,
    pub worst_count: usize,
    pub boxes_scanned: usize,
}

/// Scans boxes of half-width `r_V N^{-β}` centred at the nodes of `scan` with
/// `‖x‖_∞ ≤ radius`, and checks every count against `(C_sup/h_V) N^{1-2β}`.
///
/// `c_sup` is the sup-norm cap on `g^N` the audit is held to; with the
/// ensemble's own `sup g^N` the bound always holds.
pub fn concentration_audit(
    ensemble: &ParticleEnsemble,
    beta: f64,
    h_v: f64,
    r_v: f64,
    c_sup: f64,
    scan: &GridGeometry,
    radius: f64,
) -> ConcentrationAudit {
    let n = ensemble.n_per_species().max(1) as f64;
    let bound = c_sup / h_v * n.powf(1.0 - 2.0 * beta);
    let w = half_width(ensemble, r_v, beta);
    let cell = |c: f64| (c / w).floor() as i64;
    let mut buckets: HashMap<(i64, i64), Vec<Vec2>> = HashMap::new();
    for x in ensemble.positions() {
        buckets.entry((cell(x[0]), cell(x[1]))).or_default().push(*x);
    }
    let mut worst = ([0.0, 0.0], 0usize);
    let mut scanned = 0;
    for i in 0..scan.len() {
        let c = scan.point(i);
        if c[0].abs().max(c[1].abs()) > radius {
            continue;
        }
        scanned += 1;
        let (bx, by) = (cell(c[0]), cell(c[1]));
        let mut count = 0;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(b) = buckets.get(&(bx + dx, by + dy)) {
                    count += b.iter().filter(|x| in_box(**x, c, w)).count();
                }
            }
        }
        if count > worst.1 {
            worst = (c, count);
        }
    }
    ConcentrationAudit {
        passed: worst.1 as f64 <= bound,
        bound,
        worst_center: worst.0,
        worst_count: worst.1,
        boxes_scanned: scanned,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::deposit_mollified;
    use crate::kernels::MollifierSpec;
    use crate::particles::{sample_initial, InitialDataSpec};

    fn lattice(side: usize) -> Vec<Vec2> {
        let s = 1.0 / side as f64;
        (0..side * side)
            .map(|k| [-0.5 + s * (0.5 + (k % side) as f64), -0.5 + s * (0.5 + (k / side) as f64)])
            .collect()
    }

    #[test]
    fn lattice_count_matches_area() {
        let beta = 0.2;
        for side in [32, 64, 128] {
            let e = ParticleEnsemble::unsigned(lattice(side), 0);
            let n = (side * side) as f64;
            let expected = 4.0 * 0.25 * n.powf(1.0 - 2.0 * beta);
            let count = box_concentration(&e, [0.0, 0.0], 0.5, beta) as f64;
            assert!(count <= 2.0 * expected && count >= 0.5 * expected, "{count} vs {expected}");
        }
        let e = ParticleEnsemble::unsigned(lattice(16), 0);
        assert_eq!(box_concentration(&e, [3.0, 3.0], 0.5, 0.2), 0);
    }

    #[test]
    fn single_particle_passes() {
        let (h, r) = MollifierSpec::bump().lower_box_bound();
        let scan = GridGeometry::new(32, 1.0).unwrap();
        for n_beta in [0.1, 0.3, 0.49] {
            let e = ParticleEnsemble::unsigned(vec![[0.1, 0.1]], 0);
            let audit = concentration_audit(&e, n_beta, h, r, 1.0, &scan, 1.0);
            assert_eq!(audit.worst_count, 1);
            assert!(audit.passed);
        }
    }

    #[test]
    fn own_sup_norm_always_passes() {
        let spec = MollifierSpec::bump();
        let (h, r) = spec.lower_box_bound();
        let geometry = GridGeometry::new(256, 2.0).unwrap();
        for (seed, sigma) in [(1, 0.05), (2, 0.2), (3, 0.35)] {
            let n = 3000;
            let beta = 0.2;
            let e = sample_initial(&InitialDataSpec::gaussian([0.0, 0.0], sigma), n, seed).unwrap();
            let g = deposit_mollified(&e, &spec, n, beta, &geometry).unwrap();
            let audit = concentration_audit(&e, beta, h, r, g.sup_norm(), &geometry, 1.0);
            assert!(audit.passed, "{audit:?}");
        }
    }
}
