use super::noise::normal_pair;
use super::{ParticleEnsemble, Species};
use crate::grid::{bessel_norm, deposit_mollified, GridField, GridGeometry};
use crate::kernels::MollifierSpec;
use crate::{Error, Result, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Shape of the initial vorticity. Densities are normalised per species and
/// scaled by `Γ±`.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialKind {
    /// Isotropic Gaussian of standard deviation `sigma` per coordinate.
    GaussianVortex { center: Vec2, sigma: f64 },
    /// Positive Gaussian at `plus_center`, negative one at `minus_center`.
    Dipole {
        plus_center: Vec2,
        minus_center: Vec2,
        sigma: f64,
    },
    /// All mass at one point; a deliberately irregular datum.
    PointMass { center: Vec2 },
    /// Nonnegative grid densities, piecewise constant on the node cells.
    CustomGrid {
        plus: GridField,
        minus: Option<GridField>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialDataSpec {
    pub kind: InitialKind,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
}

impl InitialDataSpec {
    /// Unit-circulation Gaussian vortex.
    pub fn gaussian(center: Vec2, sigma: f64) -> Self {
        Self {
            kind: InitialKind::GaussianVortex { center, sigma },
            gamma_plus: 1.0,
            gamma_minus: 0.0,
        }
    }

    pub fn dipole(plus_center: Vec2, minus_center: Vec2, sigma: f64, gamma: f64) -> Self {
        Self {
            kind: InitialKind::Dipole {
                plus_center,
                minus_center,
                sigma,
            },
            gamma_plus: gamma,
            gamma_minus: gamma,
        }
    }

    pub fn is_signed(&self) -> bool {
        self.gamma_minus > 0.0
    }

    fn check(&self) -> Result<()> {
        let ok = |g: f64| g >= 0.0 && g.is_finite();
        if !(ok(self.gamma_plus) && ok(self.gamma_minus) && self.gamma_plus + self.gamma_minus > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "circulations must be nonnegative with a positive sum, got ({}, {})",
                self.gamma_plus, self.gamma_minus
            )));
        }
        match &self.kind {
            InitialKind::GaussianVortex { sigma, .. } | InitialKind::Dipole { sigma, .. } if !(*sigma > 0.0) => {
                Err(Error::InvalidParameter(format!("sigma = {sigma} must be positive")))
            }
            InitialKind::CustomGrid { plus, minus } => {
                for f in std::iter::once(plus).chain(minus.iter()) {
                    if f.values().iter().any(|v| *v < 0.0) {
                        return Err(Error::InvalidParameter("custom densities must be nonnegative".into()));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `ξ^ini_±` sampled on a grid: the normalised density times `Γ±`.
    pub fn density(&self, species: Species, geometry: &GridGeometry) -> Result<GridField> {
        let gamma = match species {
            Species::Plus => self.gamma_plus,
            Species::Minus => self.gamma_minus,
        };
        let gauss = |c: Vec2, sigma: f64| {
            let s2 = sigma * sigma;
            GridField::from_fn(*geometry, move |x| {
                gamma / (2.0 * PI * s2) * (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (2.0 * s2)).exp()
            })
        };
        match (&self.kind, species) {
            (_, _) if gamma == 0.0 => Ok(GridField::zeros(*geometry)),
            (InitialKind::GaussianVortex { center, sigma }, Species::Plus) => Ok(gauss(*center, *sigma)),
            (InitialKind::Dipole { plus_center, sigma, .. }, Species::Plus) => Ok(gauss(*plus_center, *sigma)),
            (InitialKind::Dipole { minus_center, sigma, .. }, Species::Minus) => Ok(gauss(*minus_center, *sigma)),
            (InitialKind::CustomGrid { plus, minus }, _) => {
                let source = match species {
                    Species::Plus => Some(plus),
                    Species::Minus => minus.as_ref(),
                };
                let source = source.ok_or(Error::UnnormalizableDensity { species: species_name(species) })?;
                let mass = source.integral();
                if !(mass > 0.0) {
                    return Err(Error::UnnormalizableDensity { species: species_name(species) });
                }
                let resampled = GridField::from_fn(*geometry, |x| source.interpolate(x));
                Ok(resampled.scaled(gamma / mass))
            }
            (InitialKind::PointMass { .. }, _) => Err(Error::InvalidParameter(
                "a point mass has no grid density".into(),
            )),
            _ => Err(Error::UnnormalizableDensity { species: species_name(species) }),
        }
    }

    /// Signed vorticity `ξ^ini_+ - ξ^ini_-` on a grid.
    pub fn vorticity(&self, geometry: &GridGeometry) -> Result<GridField> {
        let plus = self.density(Species::Plus, geometry)?;
        if !self.is_signed() {
            return Ok(plus);
        }
        Ok(plus.sub(&self.density(Species::Minus, geometry)?))
    }

    /// `‖ξ^ini‖_∞`, closed form for Gaussian data and the grid maximum
    /// otherwise.
    pub fn sup_norm(&self, geometry: &GridGeometry) -> Result<f64> {
        match &self.kind {
            InitialKind::GaussianVortex { sigma, .. } if !self.is_signed() => {
                Ok(self.gamma_plus / (2.0 * PI * sigma * sigma))
            }
            InitialKind::PointMass { .. } => Ok(f64::INFINITY),
            _ => Ok(self.vorticity(geometry)?.sup_norm()),
        }
    }
}

fn species_name(s: Species) -> &'static str {
    match s {
        Species::Plus => "plus",
        Species::Minus => "minus",
    }
}

/// Stream tags for sampling, disjoint from the noise streams of each species.
const SAMPLE_TAG: u64 = 2;

/// Draws `N` i.i.d. positions per species with positive circulation, each
/// carrying weight `±Γ/N`.
pub fn sample_initial(spec: &InitialDataSpec, n: usize, seed: u64) -> Result<ParticleEnsemble> {
    if n == 0 {
        return Err(Error::InvalidParameter("particle count must be at least 1".into()));
    }
    spec.check()?;
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = Vec::new();
    let mut weights = Vec::new();
    let mut species = Vec::new();
    for (s, gamma) in [(Species::Plus, spec.gamma_plus), (Species::Minus, spec.gamma_minus)] {
        if gamma == 0.0 {
            continue;
        }
        let gaussian = |c: Vec2, sigma: f64| -> Vec<Vec2> {
            (0..n as u64)
                .map(|i| {
                    let g = normal_pair(&base, SAMPLE_TAG | s.tag(), i, 0);
                    [c[0] + sigma * g[0], c[1] + sigma * g[1]]
                })
                .collect()
        };
        let drawn = match (&spec.kind, s) {
            (InitialKind::GaussianVortex { center, sigma }, Species::Plus) => gaussian(*center, *sigma),
            (InitialKind::Dipole { plus_center, sigma, .. }, Species::Plus) => gaussian(*plus_center, *sigma),
            (InitialKind::Dipole { minus_center, sigma, .. }, Species::Minus) => gaussian(*minus_center, *sigma),
            (InitialKind::PointMass { center }, Species::Plus) => vec![*center; n],
            (InitialKind::CustomGrid { plus, minus }, _) => {
                let field = match s {
                    Species::Plus => Some(plus),
                    Species::Minus => minus.as_ref(),
                }
                .ok_or(Error::UnnormalizableDensity { species: species_name(s) })?;
                let mut rng = base.clone();
                rng.set_stream(u64::MAX - s.tag());
                sample_grid_density(field, n, &mut rng).ok_or(Error::UnnormalizableDensity {
                    species: species_name(s),
                })?
            }
            _ => return Err(Error::UnnormalizableDensity { species: species_name(s) }),
        };
        positions.extend(drawn);
        weights.extend(std::iter::repeat_n(s.sign() * gamma / n as f64, n));
        species.extend(std::iter::repeat_n(s, n));
    }
    ParticleEnsemble::new(positions, weights, species, seed)
}

/// Picks a node cell by inverse CDF, then a uniform point inside it.
fn sample_grid_density(field: &GridField, n: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Vec2>> {
    let g = field.geometry();
    let mut cdf = Vec::with_capacity(g.len());
    let mut acc = 0.0;
    for &v in field.values() {
        acc += v;
        cdf.push(acc);
    }
    if !(acc > 0.0) {
        return None;
    }
    let h = g.spacing();
    Some(
        (0..n)
            .map(|_| {
                let u = rng.gen::<f64>() * acc;
                let idx = cdf.partition_point(|&c| c <= u).min(g.len() - 1);
                let p = g.point(idx);
                [
                    p[0] + h * (rng.gen::<f64>() - 0.5),
                    p[1] + h * (rng.gen::<f64>() - 0.5),
                ]
            })
            .collect(),
    )
}

/// Seed-averaged `‖V^N ∗ S_0^N‖_{alpha,p}^q` for each `N`.
#[allow(clippy::too_many_arguments)]
pub fn initial_regularity_probe(
    spec: &InitialDataSpec,
    n_list: &[usize],
    beta: f64,
    alpha: f64,
    p: f64,
    q: f64,
    seeds: &[u64],
    geometry: &GridGeometry,
) -> Result<Vec<(usize, f64)>> {
    if !(2.0 / p < alpha && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} must lie in (2/p, 1) for p = {p}"
        )));
    }
    let mollifier = MollifierSpec::bump();
    n_list
        .iter()
        .map(|&n| {
            let mut total = 0.0;
            for &seed in seeds {
                let ensemble = sample_initial(spec, n, seed)?;
                let g = deposit_mollified(&ensemble, &mollifier, n, beta, geometry)?;
                total += bessel_norm(&g, alpha, p).powf(q);
            }
            Ok((n, total / seeds.len() as f64))
        })
        .collect()
}
