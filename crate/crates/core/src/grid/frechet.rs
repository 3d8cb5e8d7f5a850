use super::{bessel_norm, GridField, GridGeometry};
use crate::{Error, Result};

/// Smooth cutoff equal to one on `|x| ≤ radius/2` and vanishing for
/// `|x| ≥ radius`.
pub fn ball_window(geometry: &GridGeometry, radius: f64) -> GridField {
    let g = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let half = 0.5 * radius;
    GridField::from_fn(*geometry, |x| {
        let r = x[0].hypot(x[1]);
        if r <= half {
            1.0
        } else if r >= radius {
            0.0
        } else {
            let s = (r - half) / half;
            g(1.0 - s) / (g(1.0 - s) + g(s))
        }
    })
}

/// `‖w f‖_{eta,p}`, the spectral stand-in for `W^{eta,p}` on the window's
/// support.
pub fn windowed_bessel_norm(field: &GridField, window: &GridField, eta: f64, p: f64) -> f64 {
    let g = field.geometry();
    let product = GridField::from_values(
        *g,
        field
            .values()
            .iter()
            .zip(window.values())
            .map(|(a, b)| a * b)
            .collect(),
    )
    .expect("window and field share a geometry");
    bessel_norm(&product, eta, p)
}

/// `Σ_{n=1}^{⌊L⌋} 2^{-n} (1 ∧ sup_t ‖w_n (f - g)(t)‖²_{eta,p})` with `w_n` the
/// window of the ball of radius `n`.
pub fn frechet_distance(f: &[GridField], g: &[GridField], eta: f64, p: f64) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::MismatchedTrajectories("snapshot count"));
    }
    if f.is_empty() {
        return Ok(0.0);
    }
    let geometry = *f[0].geometry();
    for (a, b) in f.iter().zip(g) {
        if a.geometry() != &geometry || b.geometry() != &geometry {
            return Err(Error::MismatchedTrajectories("geometry"));
        }
        if (a.time() - b.time()).abs() > 1e-12 * (1.0 + a.time().abs()) {
            return Err(Error::MismatchedTrajectories("time stamps"));
        }
    }
    if !(eta > 2.0 / p && eta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Fréchet exponent eta = {eta} must lie in (2/p, 1) for p = {p}"
        )));
    }
    let diffs: Vec<GridField> = f.iter().zip(g).map(|(a, b)| a.sub(b)).collect();
    let balls = geometry.half_width().floor() as usize;
    let mut total = 0.0;
    for n in 1..=balls {
        let window = ball_window(&geometry, n as f64);
        let worst = diffs
            .iter()
            .map(|d| windowed_bessel_norm(d, &window, eta, p).powi(2))
            .fold(0.0, f64::max);
        total += 0.5f64.powi(n as i32) * worst.min(1.0);
    }
    Ok(total)
}

/// `‖f‖_{L^p(B)} + (∬_{B×B} |f(x)-f(y)|^p / |x-y|^{2+εp})^{1/p}` for
/// `0 < ε < 1`, by direct node quadrature over the ball `B` of the given
/// radius. Quadratic in the number of nodes; meant for validation only.
pub fn slobodeckij_norm(field: &GridField, eps: f64, p: f64, radius: f64) -> f64 {
    let g = field.geometry();
    let nodes: Vec<(f64, f64, f64)> = (0..g.len())
        .filter_map(|i| {
            let x = g.point(i);
            (x[0].hypot(x[1]) < radius).then(|| (x[0], x[1], field.values()[i]))
        })
        .collect();
    let h2 = g.cell_area();
    let lp: f64 = nodes.iter().map(|n| n.2.abs().powf(p)).sum::<f64>() * h2;
    let expo = 0.5 * (2.0 + eps * p);
    let mut semi = 0.0;
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let d2 = (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);
            semi += 2.0 * (a.2 - b.2).abs().powf(p) / d2.powf(expo);
        }
    }
    lp.powf(1.0 / p) + (semi * h2 * h2).powf(1.0 / p)
}
