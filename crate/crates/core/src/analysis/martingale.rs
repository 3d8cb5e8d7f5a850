use super::distinct;
use crate::config::SimConfig;
use crate::grid::{convolve_centered, spectral_gradient, GridField, VectorGridField};
use crate::kernels::MollifierSpec;
use crate::particles::ParticleSystem;
use crate::stats::mean;
use crate::{Error, Result, Vec2};
use rayon::prelude::*;

/// `φ(x) = (1 - |x-c|²/R²)³` inside the ball of radius `R`, zero outside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFunction {
    pub center: Vec2,
    pub radius: f64,
}

impl TestFunction {
    pub fn eval(&self, x: Vec2) -> f64 {
        let s = ((x[0] - self.center[0]).powi(2) + (x[1] - self.center[1]).powi(2)) / (self.radius * self.radius);
        if s < 1.0 {
            (1.0 - s).powi(3)
        } else {
            0.0
        }
    }

    pub fn grad(&self, x: Vec2) -> Vec2 {
        let r2 = self.radius * self.radius;
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        let s = (d[0] * d[0] + d[1] * d[1]) / r2;
        if s >= 1.0 {
            return [0.0, 0.0];
        }
        let c = -6.0 * (1.0 - s).powi(2) / r2;
        [c * d[0], c * d[1]]
    }

    /// `‖∇φ‖_∞ = 96 / (25 √5 R)`, attained at `|x - c| = R/√5`.
    pub fn grad_sup(&self) -> f64 {
        96.0 / (25.0 * 5f64.sqrt() * self.radius)
    }
}

/// Second moment of `(1/N) Σ_i ∫_0^t ∇(V^N ∗ φ)(X_s^i)·dW_s^i` for one `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MartingaleRow {
    pub n: usize,
    /// Seed mean of the squared Euler sum.
    pub raw_second_moment: f64,
    /// Seed mean of `(1/N²) Σ_i ∫ |∇(V^N ∗ φ)(X_s^i)|² ds`, the Itô-isometry
    /// form of the same moment.
    pub isometry: f64,
    /// `t ‖∇φ‖²_∞ / N`.
    pub bound: f64,
}

pub fn martingale_variance_probe(
    config: &SimConfig,
    phi: &TestFunction,
    n_list: &[usize],
    seeds: &[u64],
) -> Result<Vec<MartingaleRow>> {
    distinct(n_list, "N_list")?;
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("at least one seed is required".into()));
    }
    let t = config.t_final;
    let phi_field = GridField::from_fn(config.geometry, |x| phi.eval(x));
    n_list
        .iter()
        .map(|&n| {
            let grad = smoothed_gradient(&phi_field, n, config.beta)?;
            let samples: Vec<(f64, f64)> = seeds
                .par_iter()
                .map(|&seed| one_run(config, &grad, n, seed))
                .collect::<Result<_>>()?;
            Ok(MartingaleRow {
                n,
                raw_second_moment: mean(&samples.iter().map(|s| s.0 * s.0).collect::<Vec<_>>()),
                isometry: mean(&samples.iter().map(|s| s.1).collect::<Vec<_>>()),
                bound: t * phi.grad_sup().powi(2) / n as f64,
            })
        })
        .collect()
}

/// `∇(V^N ∗ φ)` on the grid.
fn smoothed_gradient(phi: &GridField, n: usize, beta: f64) -> Result<VectorGridField> {
    let g = phi.geometry();
    let mollifier = MollifierSpec::bump().scaled(n, beta);
    mollifier.check_resolution(g)?;
    let profile = crate::grid::deposit::footprint_field(&mollifier, g, [0.0, 0.0], 1.0);
    Ok(spectral_gradient(&convolve_centered(phi, &profile)))
}

/// The Euler sum and its isometry counterpart along one run.
fn one_run(config: &SimConfig, grad: &VectorGridField, n: usize, seed: u64) -> Result<(f64, f64)> {
    let mut system = ParticleSystem::new(config, n, seed)?;
    let dt = config.dt;
    let mut sum = 0.0;
    let mut iso = 0.0;
    for _ in 0..config.step_count() {
        let e = system.ensemble();
        let grads: Vec<Vec2> = e.positions().iter().map(|x| grad.interpolate(*x)).collect();
        let weights = e.weights().to_vec();
        let dw = system.step()?;
        for ((g, w), d) in grads.iter().zip(&weights).zip(&dw) {
            sum += w * (g[0] * d[0] + g[1] * d[1]);
            iso += w * w * (g[0] * g[0] + g[1] * g[1]) * dt;
        }
    }
    Ok((sum, iso))
}

/// Whether every raw moment sits below `1.2 ×` its bound, and whether each
/// doubling of `N` halves the isometry estimate to within 20%.
pub fn martingale_checks(rows: &[MartingaleRow]) -> (bool, bool) {
    let bound_ok = rows.iter().all(|r| r.raw_second_moment <= 1.2 * r.bound);
    let halving_ok = rows.windows(2).all(|w| {
        if w[1].n != 2 * w[0].n {
            return true;
        }
        let ratio = w[0].isometry / w[1].isometry;
        (ratio / 2.0 - 1.0).abs() <= 0.2
    });
    (bound_ok, halving_ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridGeometry;

    fn small_config() -> SimConfig {
        let mut c = SimConfig::default();
        c.geometry = GridGeometry::new(128, 4.0).unwrap();
        c.t_final = 0.25;
        c.dt = 0.25 / 16.0;
        c.pde_dt = c.dt;
        c.snapshot_times = vec![0.0, 0.25];
        c
    }

    #[test]
    fn gradient_sup_matches_closed_form() {
        let phi = TestFunction {
            center: [0.2, -0.1],
            radius: 0.8,
        };
        let r = 0.8 / 5f64.sqrt();
        let at = [0.2 + r, -0.1];
        let g = phi.grad(at);
        assert!((g[0].hypot(g[1]) - phi.grad_sup()).abs() < 1e-12);
        let mut worst = 0.0f64;
        for k in 0..2000 {
            let rr = 0.8 * k as f64 / 2000.0;
            let g = phi.grad([0.2 + rr, -0.1]);
            worst = worst.max(g[0].hypot(g[1]));
            // finite-difference check of the gradient
            let x = [0.2 + rr * 0.6, -0.1 + rr * 0.8];
            let h = 1e-6;
            let fd = (phi.eval([x[0] + h, x[1]]) - phi.eval([x[0] - h, x[1]])) / (2.0 * h);
            assert!((fd - phi.grad(x)[0]).abs() < 1e-6);
        }
        assert!(worst <= phi.grad_sup() * (1.0 + 1e-12));
    }

    #[test]
    fn zero_horizon_has_zero_variance() {
        let mut c = small_config();
        c.t_final = 0.0;
        c.snapshot_times = vec![0.0];
        let phi = TestFunction { center: [0.0, 0.0], radius: 1.0 };
        let rows = martingale_variance_probe(&c, &phi, &[200], &[1, 2]).unwrap();
        assert_eq!(rows[0].raw_second_moment, 0.0);
        assert_eq!(rows[0].isometry, 0.0);
    }

    #[test]
    fn flat_test_function_region_gives_no_variance() {
        let c = small_config();
        let far = TestFunction { center: [3.0, 3.0], radius: 0.5 };
        let rows = martingale_variance_probe(&c, &far, &[200], &[1, 2, 3]).unwrap();
        assert!(rows[0].raw_second_moment < 1e-10);
        assert!(rows[0].isometry < 1e-10);
    }

    #[test]
    fn variance_scales_inversely_with_n() {
        let c = small_config();
        let phi = TestFunction { center: [0.0, 0.0], radius: 1.0 };
        let seeds: Vec<u64> = (0..16).collect();
        let rows = martingale_variance_probe(&c, &phi, &[200, 400], &seeds).unwrap();
        let (bound_ok, halving_ok) = martingale_checks(&rows);
        assert!(bound_ok && halving_ok, "{rows:?}");
    }
}
