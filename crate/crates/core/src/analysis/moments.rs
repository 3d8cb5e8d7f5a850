use super::distinct;
use crate::config::SimConfig;
use crate::grid::{bessel_norm, GridField};
use crate::particles::run_trajectory_with;
use crate::stats::{log_log_slope, mean};
use crate::{Error, Result};
use rayon::prelude::*;

/// Seed means of `‖(I-Δ)^{α/2} g_t^N‖_p^q` at each snapshot time.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub n_particles: usize,
    pub beta: f64,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub times: Vec<f64>,
    pub means: Vec<f64>,
    pub seeds: usize,
}

pub const MIN_SEEDS: usize = 8;

pub fn moment_bound_probe(config: &SimConfig, n_list: &[usize], seeds: &[u64], q: f64) -> Result<Vec<MomentReport>> {
    if !(2.0 / config.p < config.alpha && config.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {} must lie in (2/p, 1)",
            config.alpha
        )));
    }
    if seeds.len() < MIN_SEEDS {
        return Err(Error::InvalidParameter(format!(
            "moment estimates need at least {MIN_SEEDS} seeds, got {}",
            seeds.len()
        )));
    }
    distinct(n_list, "N_list")?;
    distinct(seeds, "seeds")?;
    n_list
        .iter()
        .map(|&n| {
            let per_seed: Vec<Vec<f64>> = seeds
                .par_iter()
                .map(|&seed| {
                    let t = run_trajectory_with(config, n, seed)?;
                    Ok(t.fields.iter().map(|g| bessel_norm(g, config.alpha, config.p).powf(q)).collect())
                })
                .collect::<Result<_>>()?;
            let snaps = config.snapshot_times.len();
            let means = (0..snaps)
                .map(|k| mean(&per_seed.iter().map(|v| v[k]).collect::<Vec<_>>()))
                .collect();
            Ok(MomentReport {
                n_particles: n,
                beta: config.beta,
                alpha: config.alpha,
                p: config.p,
                q,
                times: config.snapshot_times.clone(),
                means,
                seeds: seeds.len(),
            })
        })
        .collect()
}

/// Largest log–log slope of the seed mean against `N` over the snapshot
/// times.
pub fn moment_trend_slope(reports: &[MomentReport]) -> f64 {
    let snaps = reports.first().map_or(0, |r| r.means.len());
    (0..snaps)
        .map(|k| {
            let pts: Vec<(f64, f64)> = reports.iter().map(|r| (r.n_particles as f64, r.means[k])).collect();
            log_log_slope(&pts)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderReport {
    pub gamma: f64,
    pub q_prime: f64,
    /// Ensemble mean of the discrete double integral.
    pub value: f64,
    pub per_trajectory: Vec<f64>,
}

/// Trapezoidal `∬ ‖g_t - g_s‖_{-2,2}^{q'} / |t-s|^{1+q'γ} ds dt` over the
/// snapshot grid, pairs closer than one snapshot spacing left out.
pub fn time_regularity_probe(trajectories: &[Vec<GridField>], gamma: f64, q_prime: f64) -> Result<HolderReport> {
    if gamma * q_prime <= 1.0 {
        return Err(Error::ConditionViolation {
            product: gamma * q_prime,
        });
    }
    if !(gamma > 0.0 && gamma < 0.5 && q_prime >= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < gamma < 1/2 and q' ≥ 2, got gamma = {gamma}, q' = {q_prime}"
        )));
    }
    let per_trajectory = trajectories
        .iter()
        .map(|traj| double_integral(traj, gamma, q_prime))
        .collect::<Result<Vec<_>>>()?;
    Ok(HolderReport {
        gamma,
        q_prime,
        value: mean(&per_trajectory),
        per_trajectory,
    })
}

fn double_integral(traj: &[GridField], gamma: f64, q_prime: f64) -> Result<f64> {
    let m = traj.len();
    if m < 2 {
        return Ok(0.0);
    }
    let times: Vec<f64> = traj.iter().map(|f| f.time()).collect();
    let dt = times[1] - times[0];
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(Error::InvalidParameter("snapshot times must be uniformly spaced".into()));
    }
    let weight = |i: usize| if i == 0 || i == m - 1 { 0.5 * dt } else { dt };
    let mut total = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let d = bessel_norm(&traj[j].sub(&traj[i]), -2.0, 2.0);
            let gap = times[j] - times[i];
            total += 2.0 * weight(i) * weight(j) * d.powf(q_prime) / gap.powf(1.0 + q_prime * gamma);
        }
    }
    Ok(total)
}
