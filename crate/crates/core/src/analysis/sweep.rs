use super::distinct;
use crate::config::SimConfig;
use crate::grid::{frechet_distance, sup_norm_on_box, GridField};
use crate::kernels::CutoffParams;
use crate::particles::{run_trajectory_with, Species};
use crate::pde::{PdeConfig, SolverMonitor, VorticitySolver};
use crate::stats::{median, strictly_decreasing};
use crate::{Error, Result};
use rayon::prelude::*;

/// Reference-solver snapshots at the configured times.
#[derive(Clone, Debug)]
pub struct ReferenceRun {
    pub fields: Vec<GridField>,
    pub monitor: SolverMonitor,
}

/// Solves the clamped limiting equation (two species for signed data) from
/// the configured initial vorticity.
pub fn reference_solution(config: &SimConfig) -> Result<ReferenceRun> {
    let g = config.geometry;
    let mut pde = PdeConfig::new(g, config.nu, config.pde_dt)?.with_cutoff(Some(CutoffParams::new(config.m)?));
    pde.boundary_tol = Some(config.boundary_tol);
    let mut solver = if config.initial.is_signed() {
        VorticitySolver::two_species(
            &config.initial.density(Species::Plus, &g)?,
            &config.initial.density(Species::Minus, &g)?,
            pde,
        )?
    } else {
        VorticitySolver::new(&config.initial.vorticity(&g)?, pde)?
    };
    let mut fields = Vec::with_capacity(config.snapshot_times.len());
    for &t in &config.snapshot_times {
        solver.advance_to(t)?;
        fields.push(solver.vorticity());
    }
    Ok(ReferenceRun {
        fields,
        monitor: *solver.monitor(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub seed: u64,
    /// `max_t sup_{‖x‖_∞ ≤ R} |g_t^N - ξ(t)|`.
    pub sup_error: f64,
    pub frechet: f64,
    /// `‖g_T^N - ξ(T)‖_2`.
    pub l2_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepMedian {
    pub n: usize,
    pub sup_error: f64,
    pub frechet: f64,
    pub l2_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub medians: Vec<SweepMedian>,
    pub sup_monotone: bool,
    pub frechet_monotone: bool,
    pub config_hash: String,
    pub provenance: String,
}

/// Error metrics of one particle trajectory against the reference.
pub fn score_trajectory(
    n: usize,
    seed: u64,
    particles: &[GridField],
    reference: &[GridField],
    config: &SimConfig,
) -> Result<SweepRow> {
    if particles.len() != reference.len() || particles.is_empty() {
        return Err(Error::MismatchedTrajectories("snapshot count"));
    }
    let sup_error = particles
        .iter()
        .zip(reference)
        .map(|(a, b)| sup_norm_on_box(&a.sub(b), config.r_box))
        .fold(0.0, f64::max);
    let frechet = frechet_distance(particles, reference, config.eta, config.p)?;
    let last = particles.len() - 1;
    Ok(SweepRow {
        n,
        seed,
        sup_error,
        frechet,
        l2_error: particles[last].sub(&reference[last]).l2_norm(),
    })
}

/// Runs every `(N, seed)` pair against one reference solution and checks
/// that the per-`N` medians of both error metrics strictly decrease.
pub fn convergence_sweep(config: &SimConfig, n_list: &[usize], seeds: &[u64]) -> Result<SweepReport> {
    distinct(n_list, "N_list")?;
    distinct(seeds, "seeds")?;
    let reference = reference_solution(config)?;
    let jobs: Vec<(usize, u64)> = n_list.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(n, seed)| {
            let t = run_trajectory_with(config, n, seed)?;
            score_trajectory(n, seed, &t.fields, &reference.fields, config)
        })
        .collect::<Result<_>>()?;
    let medians: Vec<SweepMedian> = n_list
        .iter()
        .map(|&n| {
            let of = |f: fn(&SweepRow) -> f64| median(&rows.iter().filter(|r| r.n == n).map(f).collect::<Vec<_>>());
            SweepMedian {
                n,
                sup_error: of(|r| r.sup_error),
                frechet: of(|r| r.frechet),
                l2_error: of(|r| r.l2_error),
            }
        })
        .collect();
    let hash = config.hash();
    Ok(SweepReport {
        rows,
        sup_monotone: strictly_decreasing(&medians.iter().map(|m| m.sup_error).collect::<Vec<_>>()),
        frechet_monotone: strictly_decreasing(&medians.iter().map(|m| m.frechet).collect::<Vec<_>>()),
        medians,
        provenance: format!("vortex-core {} config-sha256 {hash}", env!("CARGO_PKG_VERSION")),
        config_hash: hash,
    })
}
