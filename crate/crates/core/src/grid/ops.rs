use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use super::{GridField, GridGeometry, SpectralField, VectorGridField};

/// `(I - Δ)^{eps/2} f`, the Fourier multiplier `(1 + |k|²)^{eps/2}`.
pub fn bessel_apply(field: &GridField, eps: f64) -> GridField {
    let half = 0.5 * eps;
    field
        .spectral()
        .multiply(|kx, ky| (1.0 + kx * kx + ky * ky).powf(half))
        .to_real()
        .with_time(field.time())
}

/// `‖(I - Δ)^{eps/2} f‖_{L^p}` on the grid.
pub fn bessel_norm(field: &GridField, eps: f64, p: f64) -> f64 {
    bessel_apply(field, eps).lp_norm(p)
}

/// Heat flow `e^{tνΔ} f`, exact on the periodic grid.
pub fn heat_semigroup(field: &GridField, t: f64, nu: f64) -> GridField {
    assert!(t >= 0.0, "heat semigroup needs t >= 0");
    field
        .spectral()
        .multiply(|kx, ky| (-nu * (kx * kx + ky * ky) * t).exp())
        .to_real()
        .with_time(field.time() + t)
}

fn odd_multiplier(
    spectrum: &SpectralField,
    m: impl Fn(f64, f64) -> Complex64,
) -> SpectralField {
    let mut out = spectrum.map_modes(|kx, ky, c| c * m(kx, ky));
    for i in 0..out.geometry().len() {
        if out.on_nyquist(i) {
            out.coeffs_mut()[i] = Complex64::default();
        }
    }
    out
}

/// Periodic convolution `f ∗ k` with `k` sampled relative to the node at the
/// origin, so that `k` centred there acts as a kernel centred at zero.
pub fn convolve_centered(field: &GridField, kernel: &GridField) -> GridField {
    let g = *field.geometry();
    assert_eq!(&g, kernel.geometry(), "convolution operands share a grid");
    let (a, b) = SpectralField::from_real_pair(field, kernel);
    let mut out = a;
    let n = g.n();
    let h2 = g.cell_area();
    for (i, (c, k)) in out.coeffs_mut().iter_mut().zip(b.coeffs()).enumerate() {
        let shift = if (i % n + i / n).is_multiple_of(2) { h2 } else { -h2 };
        *c *= *k * shift;
    }
    out.to_real().with_time(field.time())
}

/// Spectral gradient; Nyquist modes are dropped so the result stays real.
pub fn spectral_gradient(field: &GridField) -> VectorGridField {
    let s = field.spectral();
    let dx = odd_multiplier(&s, |kx, _| Complex64::new(0.0, kx));
    let dy = odd_multiplier(&s, |_, ky| Complex64::new(0.0, ky));
    let (gx, gy) = SpectralField::to_real_pair(&dx, &dy);
    VectorGridField::new(gx.with_time(field.time()), gy)
}

/// Periodic `K ∗ ξ`: `û = -i k^⊥ ξ̂ / |k|²` for `k ≠ 0` and `û(0) = 0`.
pub fn biot_savart_velocity(xi: &GridField) -> VectorGridField {
    let (ux, uy) = biot_savart_spectra(&xi.spectral());
    let (ux, uy) = SpectralField::to_real_pair(&ux, &uy);
    VectorGridField::new(ux.with_time(xi.time()), uy)
}

pub(crate) fn biot_savart_spectra(xi: &SpectralField) -> (SpectralField, SpectralField) {
    let inv = |kx: f64, ky: f64| {
        let k2 = kx * kx + ky * ky;
        if k2 == 0.0 {
            0.0
        } else {
            1.0 / k2
        }
    };
    // ψ̂ = -ξ̂/|k|², u = (-∂₂ψ, ∂₁ψ)
    let ux = odd_multiplier(xi, |kx, ky| Complex64::new(0.0, ky * inv(kx, ky)));
    let uy = odd_multiplier(xi, |kx, ky| Complex64::new(0.0, -kx * inv(kx, ky)));
    (ux, uy)
}

/// `‖∇(e^{tA} f) - e^{tA}(∇f)‖_{L²}`, summed over both components.
pub fn grad_semigroup_commute_check(field: &GridField, t: f64, nu: f64) -> f64 {
    let a = spectral_gradient(&heat_semigroup(field, t, nu));
    let g = spectral_gradient(field);
    let bx = heat_semigroup(&g.component(0), t, nu);
    let by = heat_semigroup(&g.component(1), t, nu);
    let ex = a.component(0).sub(&bx.with_time(a.time())).l2_norm();
    let ey = a.component(1).sub(&by.with_time(a.time())).l2_norm();
    ex.hypot(ey)
}

/// Maximum of `|f|` over nodes with `‖x‖_∞ ≤ radius`.
pub fn sup_norm_on_box(field: &GridField, radius: f64) -> f64 {
    let g = field.geometry();
    field
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let x = g.point(*i);
            x[0].abs() <= radius && x[1].abs() <= radius
        })
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}

/// Empirical operator norm of `(I - A)^{eps} e^{tA}` on `L^p`.
///
/// The probe set holds white-noise fields, the constant field and single
/// cosine modes on a dyadic ladder of wavenumbers; for each `t` the largest ratio
/// `‖(I - Δ)^{eps} e^{tνΔ} f‖_p / ‖f‖_p` over the set is returned.
pub fn semigroup_smoothing_probe(
    geometry: &GridGeometry,
    eps: f64,
    nu: f64,
    p: f64,
    t_list: &[f64],
    seed: u64,
) -> Vec<(f64, f64)> {
    let probes = smoothing_probe_set(geometry, seed);
    let spectra: Vec<(SpectralField, f64)> = probes
        .iter()
        .map(|f| (f.spectral(), f.lp_norm(p)))
        .collect();
    t_list
        .iter()
        .map(|&t| {
            let ratio = spectra
                .iter()
                .map(|(s, norm)| {
                    let out = s
                        .multiply(|kx, ky| {
                            let k2 = kx * kx + ky * ky;
                            (1.0 + k2).powf(eps) * (-nu * k2 * t).exp()
                        })
                        .to_real();
                    out.lp_norm(p) / norm
                })
                .fold(0.0, f64::max);
            (t, ratio)
        })
        .collect()
}

fn smoothing_probe_set(geometry: &GridGeometry, seed: u64) -> Vec<GridField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes: Vec<GridField> = (0..4)
        .map(|_| {
            let values = (0..geometry.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            GridField::from_values(*geometry, values).expect("finite samples")
        })
        .collect();
    probes.push(GridField::from_fn(*geometry, |_| 1.0));
    let l = geometry.half_width();
    let mut m = 1usize;
    while m < geometry.n() / 2 {
        let k = std::f64::consts::PI * m as f64 / l;
        probes.push(GridField::from_fn(*geometry, |x| (k * x[0]).cos()));
        probes.push(GridField::from_fn(*geometry, |x| (k * (x[0] + x[1])).cos()));
        m *= 2;
    }
    probes
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn random_field(g: GridGeometry, seed: u64) -> GridField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GridField::from_values(g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn round_trip_is_accurate() {
        let g = GridGeometry::new(64, 2.0).unwrap();
        let f = random_field(g, 1);
        let back = f.spectral().to_real();
        let err = back.sub(&f).sup_norm();
        assert!(err <= 1e-12 * f.sup_norm());
    }

    #[test]
    fn bessel_examples() {
        let g = GridGeometry::new(64, PI).unwrap();
        let f = random_field(g, 2);
        assert!(bessel_apply(&f, 0.0).sub(&f).sup_norm() < 1e-12);
        let c = GridField::from_fn(g, |_| 2.5);
        assert!(bessel_apply(&c, 1.7).sub(&c).sup_norm() < 1e-12);
        // L = π puts integer wavenumbers on the grid
        let s = GridField::from_fn(g, |x| (3.0 * x[0] + 2.0 * x[1]).sin());
        let out = bessel_apply(&s, 2.0);
        assert!(out.sub(&s.scaled(14.0)).sup_norm() < 1e-10);
        for (eps, p) in [(0.0, 2.0), (-1.0, 3.0), (0.5, 4.0)] {
            assert_eq!(bessel_norm(&GridField::zeros(g), eps, p), 0.0);
        }
    }

    #[test]
    fn heat_examples() {
        let g = GridGeometry::new(64, 2.0).unwrap();
        let f = random_field(g, 3);
        assert!(heat_semigroup(&f, 0.0, 0.3).sub(&f).sup_norm() < 1e-12);
        for t in [0.01, 0.1, 1.0] {
            let m = heat_semigroup(&f, t, 0.3).integral();
            assert!((m - f.integral()).abs() < 1e-12 * f.lp_norm(1.0));
        }
        let once = heat_semigroup(&f, 0.15, 0.3);
        let twice = heat_semigroup(&heat_semigroup(&f, 0.05, 0.3), 0.1, 0.3);
        assert!(once.sub(&twice).sup_norm() < 1e-12);
    }

    #[test]
    fn heat_flow_spreads_gaussian() {
        // closed form: variance σ² ↦ σ² + 2νt
        let g = GridGeometry::new(256, 5.0).unwrap();
        let (nu, t, s2) = (0.2, 0.75, 0.25f64);
        let gauss = |v: f64| {
            move |x: [f64; 2]| (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * v)).exp() / (2.0 * PI * v)
        };
        let f = GridField::from_fn(g, gauss(s2));
        let out = heat_semigroup(&f, t, nu);
        let exact = GridField::from_fn(g, gauss(s2 + 2.0 * nu * t));
        assert!(out.sub(&exact).sup_norm() < 1e-6);
    }

    #[test]
    fn gradient_commutes_with_heat_flow() {
        let g = GridGeometry::new(64, 2.0).unwrap();
        let f = random_field(g, 4);
        assert!(grad_semigroup_commute_check(&f, 0.1, 1.0) <= 1e-10 * f.l2_norm());
        assert_eq!(grad_semigroup_commute_check(&GridField::zeros(g), 0.1, 1.0), 0.0);
        let k = PI / 2.0 * 3.0;
        let mode = GridField::from_fn(g, |x| (k * x[1]).sin());
        assert!(grad_semigroup_commute_check(&mode, 0.3, 0.5) < 1e-13);
    }

    #[test]
    fn sup_norm_on_box_examples() {
        let g = GridGeometry::new(64, 2.0).unwrap();
        assert_eq!(sup_norm_on_box(&GridField::zeros(g), 1.0), 0.0);
        let bump = GridField::from_fn(g, |x| 3.0 * (-(x[0] * x[0] + x[1] * x[1]) * 10.0).exp());
        assert_eq!(sup_norm_on_box(&bump, 1.0), 3.0);
        let shifted = GridField::from_fn(g, |x| 1.0 + x[0] + 2.0 * x[1]);
        assert_eq!(sup_norm_on_box(&shifted, 0.0), 1.0);
    }

    #[test]
    fn smoothing_probe_single_mode_oracle() {
        // a lone mode |k|² = q has ratio (1+q)^ε e^{-νqt}; over q this peaks
        // where ε/(1+q) = νt
        let g = GridGeometry::new(32, PI).unwrap();
        let k2: f64 = 25.0;
        let mode = GridField::from_fn(g, |x| (5.0 * x[0]).cos());
        let (eps, nu) = (0.5, 0.2);
        let oracle = |q: f64, t: f64| (1.0 + q).powf(eps) * (-nu * q * t).exp();
        for t in [0.01, 0.1, 0.5] {
            let out = mode
                .spectral()
                .multiply(|kx, ky| oracle(kx * kx + ky * ky, t))
                .to_real();
            let ratio = out.l2_norm() / mode.l2_norm();
            assert!((ratio - oracle(k2, t)).abs() < 1e-12 * oracle(k2, t));
        }
        let t_star = eps / (nu * (1.0 + k2));
        for q in [16.0, 20.0, 30.0, 36.0] {
            assert!(oracle(q, t_star) < oracle(k2, t_star));
        }
        // the probe holds the ladder modes |k|² = m², 2m² for m = 1, 2, 4, 8,
        // and on L² no field beats the peak multiplier
        let probe = semigroup_smoothing_probe(&g, eps, nu, 2.0, &[t_star], 1)[0].1;
        let ladder = [1.0f64, 2.0, 4.0, 8.0]
            .iter()
            .flat_map(|m| [m * m, 2.0 * m * m])
            .map(|q| oracle(q, t_star))
            .fold(1.0, f64::max);
        assert!(probe >= ladder * (1.0 - 1e-12));
        assert!(probe <= oracle(k2, t_star) * (1.0 + 1e-12));
    }

    #[test]
    fn smoothing_probe_limits() {
        let g = GridGeometry::new(32, 4.0).unwrap();
        let small = semigroup_smoothing_probe(&g, 1e-9, 0.5, 2.0, &[0.01, 0.1, 1.0], 7);
        // the constant field is left alone and every other mode contracts
        for (_, r) in small {
            assert!((r - 1.0).abs() < 1e-6);
        }
        let late = semigroup_smoothing_probe(&g, 0.5, 0.5, 2.0, &[50.0], 7);
        assert!(late[0].1 <= 1.0 + 1e-6);
    }

    #[test]
    fn centred_convolution() {
        let g = GridGeometry::new(32, 2.0).unwrap();
        let f = GridField::from_fn(g, |x| (x[0] * PI / 2.0).sin() + 0.3 * (x[1] * PI).cos());
        let mut delta = GridField::zeros(g);
        delta.values_mut()[g.origin_index()] = 1.0 / g.cell_area();
        let same = convolve_centered(&f, &delta);
        assert!(same.sub(&f).sup_norm() < 1e-13);
        // a unit-mass kernel displaced by one node shifts the field by h
        let mut shifted = GridField::zeros(g);
        shifted.values_mut()[g.origin_index() + 1] = 1.0 / g.cell_area();
        let moved = convolve_centered(&f, &shifted);
        let h = g.spacing();
        let expect = GridField::from_fn(g, |x| ((x[0] - h) * PI / 2.0).sin() + 0.3 * (x[1] * PI).cos());
        assert!(moved.sub(&expect).sup_norm() < 1e-13);
    }
}
