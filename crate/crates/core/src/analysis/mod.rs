//! Monte Carlo diagnostics for the particle system and particle-versus-PDE
//! convergence sweeps.

mod martingale;
mod moments;
mod scaling;
mod sweep;

pub use martingale::{martingale_checks, martingale_variance_probe, MartingaleRow, TestFunction};
pub use moments::{moment_bound_probe, moment_trend_slope, time_regularity_probe, HolderReport, MomentReport};
pub use scaling::{mollifier_bessel_norm_sq, stochastic_term_scaling_probe, ScalingReport};
pub use sweep::{convergence_sweep, reference_solution, score_trajectory, ReferenceRun, SweepMedian, SweepReport, SweepRow};

use crate::{Error, Result};

/// Fails on repeated entries, which would make report rows ambiguous.
fn distinct<T: PartialEq + std::fmt::Debug>(items: &[T], what: &str) -> Result<()> {
    for (i, a) in items.iter().enumerate() {
        if items[..i].contains(a) {
            return Err(Error::InvalidParameter(format!("{what} lists {a:?} twice")));
        }
    }
    Ok(())
}
