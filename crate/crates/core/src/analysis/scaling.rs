use crate::grid::{bessel_norm, GridGeometry};
use crate::kernels::MollifierSpec;
use crate::stats::log_log_slope;
use crate::{Error, Result};

/// `‖V^N‖²_{s,2}` for the bump mollifier, evaluated on `geometry`.
pub fn mollifier_bessel_norm_sq(n: usize, beta: f64, s: f64, geometry: &GridGeometry) -> Result<f64> {
    let mollifier = MollifierSpec::bump().scaled(n, beta);
    mollifier.check_resolution(geometry)?;
    let profile = crate::grid::deposit::footprint_field(&mollifier, geometry, [0.0, 0.0], 1.0);
    Ok(bessel_norm(&profile, s, 2.0).powi(2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    /// Smoothness index `1 + α - 2/p + δ`.
    pub s: f64,
    /// `(N, t ‖V^N‖²_{s,2} / N)`.
    pub points: Vec<(usize, f64)>,
    pub slope: f64,
    /// `β(4 + 2δ + 2α - 4/p) - 1`.
    pub predicted: f64,
}

impl ScalingReport {
    pub fn within(&self, tolerance: f64) -> bool {
        (self.slope - self.predicted).abs() <= tolerance
    }
}

/// Fits the `N`-exponent of the quadratic-variation surrogate
/// `t ‖V^N‖²_{1+α-2/p+δ,2} / N`.
pub fn stochastic_term_scaling_probe(
    n_list: &[usize],
    beta: f64,
    alpha: f64,
    p: f64,
    delta: f64,
    t: f64,
    geometry: &GridGeometry,
) -> Result<ScalingReport> {
    if !(delta > 0.0 && delta <= 0.2) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must lie in (0, 0.2]")));
    }
    if n_list.len() < 2 {
        return Err(Error::InvalidParameter("a slope needs at least two particle counts".into()));
    }
    let s = 1.0 + alpha - 2.0 / p + delta;
    let points = n_list
        .iter()
        .map(|&n| Ok((n, t * mollifier_bessel_norm_sq(n, beta, s, geometry)? / n as f64)))
        .collect::<Result<Vec<_>>>()?;
    let slope = log_log_slope(&points.iter().map(|&(n, v)| (n as f64, v)).collect::<Vec<_>>());
    Ok(ScalingReport {
        s,
        points,
        slope,
        predicted: beta * (4.0 + 2.0 * delta + 2.0 * alpha - 4.0 / p) - 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridField;
    use crate::kernels::eval_mollifier;

    #[test]
    fn unscaled_mollifier_gives_inverse_n() {
        let g = GridGeometry::new(64, 2.0).unwrap();
        let r = stochastic_term_scaling_probe(&[10, 100, 1000], 0.0, 0.6, 4.0, 0.05, 1.0, &g).unwrap();
        assert!((r.slope + 1.0).abs() < 1e-12);
        assert!((r.predicted + 1.0).abs() < 1e-15);
    }

    #[test]
    fn printed_exponent() {
        let g = GridGeometry::new(256, 2.0).unwrap();
        let r = stochastic_term_scaling_probe(&[1000, 4000, 16_000], 0.1, 0.6, 4.0, 0.05, 1.0, &g).unwrap();
        assert!((r.predicted + 0.57).abs() < 1e-12);
        assert!(r.within(0.1), "{r:?}");
    }

    #[test]
    fn norm_follows_dilation() {
        // ‖V^N‖²_{s,2} = N^{2β} ∫ (1+|k|²)^s |V̂(k/N^β)|² dk, which tends to
        // N^{2β(s+1)} ‖V‖²_{Ḣ^s} once N^β |k| dominates
        let g = GridGeometry::new(256, 2.0).unwrap();
        let s = 1.15;
        let ns = [1000, 4000, 16_000, 64_000];
        let beta = 0.2;
        let pts: Vec<(f64, f64)> = ns
            .iter()
            .map(|&n| (n as f64, mollifier_bessel_norm_sq(n, beta, s, &g).unwrap()))
            .collect();
        let slope = log_log_slope(&pts);
        assert!((slope - 2.0 * beta * (s + 1.0)).abs() < 0.05, "{slope}");
        // cross-check one value against the directly sampled bump on a finer grid
        let fine = GridGeometry::new(512, 2.0).unwrap();
        let scale = 1000f64.powf(beta);
        let direct = GridField::from_fn(fine, |x| {
            scale * scale * eval_mollifier(&MollifierSpec::bump(), [scale * x[0], scale * x[1]])
        });
        let expect = bessel_norm(&direct, s, 2.0).powi(2);
        let got = mollifier_bessel_norm_sq(1000, beta, s, &g).unwrap();
        assert!((got / expect - 1.0).abs() < 0.01, "{got} {expect}");
    }
}
