use super::{PdeConfig, VorticitySolver};
use crate::grid::{GridField, GridGeometry};
use crate::kernels::CutoffParams;
use crate::{Error, Result, Vec2};

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementConfig {
    pub half_width: f64,
    pub nu: f64,
    pub t_final: f64,
    /// Step on the coarsest grid; halved at each refinement.
    pub dt0: f64,
    pub cutoff: Option<CutoffParams>,
    pub levels: Vec<usize>,
}

impl RefinementConfig {
    pub fn new(half_width: f64, nu: f64, t_final: f64, dt0: f64) -> Self {
        Self {
            half_width,
            nu,
            t_final,
            dt0,
            cutoff: None,
            levels: vec![128, 256, 512],
        }
    }
}

/// Difference between consecutive levels, on the coarser level's nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefinementRow {
    pub n: usize,
    pub dt: f64,
    pub linf_diff: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementTable {
    pub rows: Vec<RefinementRow>,
    /// `max |ξ(T)|` on the finest level.
    pub peak: f64,
    /// Differences shrink from row to row, or all sit at round-off level.
    pub monotone: bool,
}

/// Solves to `T` on each level, grid and step refined together, and compares
/// consecutive levels.
pub fn uniqueness_refinement_check(xi_ini: &dyn Fn(Vec2) -> f64, config: &RefinementConfig) -> Result<RefinementTable> {
    if config.levels.len() < 2 {
        return Err(Error::InvalidParameter("refinement needs at least two levels".into()));
    }
    let mut finals: Vec<GridField> = Vec::new();
    let mut dts = Vec::new();
    let mut dt = config.dt0;
    for &n in &config.levels {
        let g = GridGeometry::new(n, config.half_width)?;
        let pde = PdeConfig::new(g, config.nu, dt)?.with_cutoff(config.cutoff);
        let mut solver = VorticitySolver::new(&GridField::from_fn(g, xi_ini), pde)?;
        solver.advance_to(config.t_final)?;
        finals.push(solver.vorticity());
        dts.push(dt);
        dt /= 2.0;
    }
    let mut rows = Vec::new();
    for (i, pair) in finals.windows(2).enumerate() {
        let fine = pair[1].restrict_to(pair[0].geometry())?;
        rows.push(RefinementRow {
            n: config.levels[i],
            dt: dts[i],
            linf_diff: fine.sub(&pair[0]).sup_norm(),
        });
    }
    let peak = finals.last().map(|f| f.sup_norm()).unwrap_or(0.0);
    let floor = 1e-13 * peak.max(f64::MIN_POSITIVE);
    let monotone = rows
        .windows(2)
        .all(|w| w[1].linf_diff < w[0].linf_diff || w[0].linf_diff.max(w[1].linf_diff) <= floor);
    Ok(RefinementTable { rows, peak, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(c: Vec2, s2: f64, gamma: f64) -> impl Fn(Vec2) -> f64 {
        move |x| gamma / (2.0 * std::f64::consts::PI * s2) * (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (2.0 * s2)).exp()
    }

    #[test]
    fn zero_data_gives_zero_differences() {
        let mut c = RefinementConfig::new(4.0, 0.1, 0.1, 0.05);
        c.levels = vec![32, 64, 128];
        let t = uniqueness_refinement_check(&|_| 0.0, &c).unwrap();
        assert!(t.rows.iter().all(|r| r.linf_diff == 0.0));
        assert!(t.monotone);
    }

    #[test]
    fn gaussian_refinement_agrees() {
        let c = RefinementConfig::new(4.0, 0.1, 0.5, 0.5 / 16.0);
        let t = uniqueness_refinement_check(&gauss([0.0, 0.0], 0.25, 1.0), &c).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows[1].linf_diff < 1e-5 * t.peak, "{t:?}");
        assert!(t.monotone);
    }

    #[test]
    fn dipole_refinement_is_monotone() {
        let plus = gauss([0.5, 0.0], 0.09, 1.0);
        let minus = gauss([-0.5, 0.0], 0.09, 1.0);
        let c = RefinementConfig::new(4.0, 0.1, 0.5, 0.5 / 16.0);
        let t = uniqueness_refinement_check(&|x| plus(x) - minus(x), &c).unwrap();
        assert!(t.monotone, "{t:?}");
        assert!(t.rows[1].linf_diff < 0.7 * t.rows[0].linf_diff);
    }
}
