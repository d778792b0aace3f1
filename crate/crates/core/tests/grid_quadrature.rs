//! Radial quadrature and weighted-norm verification against brute-force
//! summation oracles.

mod common;

use gyrofp_core::fft::Fft2;
use gyrofp_core::{GyroDistribution, SpectralField2D, VelocityGrid, WeightKind, TORUS_AREA};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

#[test]
fn gaussian_integral_hits_closed_form() {
    for &t in &[0.5f64, 1.0, 2.0] {
        let u_max = 8.0 * t.sqrt();
        let grid = VelocityGrid::new(4096, u_max).unwrap();
        let samples: Vec<f64> = grid.nodes().iter().map(|&u| (-u * u / t).exp()).collect();
        let got = grid.integrate_u(&samples, WeightKind::U).unwrap();
        assert!(
            (got - PI * t).abs() < 1e-8,
            "T = {t}: got {got}, want {}",
            PI * t
        );
    }
}

#[test]
fn quadrature_convergence_is_fourth_order() {
    // halving the spacing must cut the error by about 2^4
    let exact = PI * (1.0 - (-36.0f64).exp());
    let err = |n: usize| -> f64 {
        let grid = VelocityGrid::new(n, 6.0).unwrap();
        let samples: Vec<f64> = grid.nodes().iter().map(|&u| (-u * u).exp()).collect();
        (grid.integrate_u(&samples, WeightKind::U).unwrap() - exact).abs()
    };
    let e32 = err(32);
    let e64 = err(64);
    let e128 = err(128);
    let order1 = (e32 / e64).log2();
    let order2 = (e64 / e128).log2();
    assert!(
        order1 > 3.4 && order2 > 3.4,
        "observed orders {order1:.2}, {order2:.2} (errors {e32:e}, {e64:e}, {e128:e})"
    );
}

#[test]
fn weighted_l2_norm_matches_nodal_oracle() {
    let grid = Arc::new(VelocityGrid::new(24, 4.0).unwrap());
    let f = common::random_distribution(5, grid.clone(), 17);
    let m = 32;
    let fft = Fft2::new(m);
    let cell = TORUS_AREA / (m * m) as f64;

    for kind in [WeightKind::U, WeightKind::M, WeightKind::MTilde, WeightKind::InverseU] {
        let weights = grid.weights_for(kind);
        let mut total = 0.0;
        for (j, &w) in weights.iter().enumerate() {
            let phys = f.slice_field(j).to_physical(&fft);
            let slice_sq: f64 = phys.iter().map(|v| v * v * cell).sum();
            total += w * slice_sq;
        }
        let oracle = total.sqrt();
        let got = f.weighted_l2_norm(kind);
        assert!(
            (got - oracle).abs() <= 1e-12 * oracle.max(1.0),
            "{kind:?}: {got} vs {oracle}"
        );
    }
}

#[test]
fn l4_norm_matches_brute_force_mode_summation() {
    // evaluate the field by direct mode summation at every grid point, then
    // assemble the norm by hand
    let grid = Arc::new(VelocityGrid::new(12, 3.0).unwrap());
    let f = common::random_distribution(3, grid.clone(), 23);
    let m = 16;
    let fft = Fft2::new(m);

    let mweights = grid.weights_for(WeightKind::M);
    let cell = TORUS_AREA / (m * m) as f64;
    let mut total = 0.0;
    for (j, &w) in mweights.iter().enumerate() {
        let slice = f.slice_field(j);
        let mut l4_sq = 0.0_f64;
        for a in 0..m {
            for b in 0..m {
                let x1 = 2.0 * PI * a as f64 / m as f64;
                let x2 = 2.0 * PI * b as f64 / m as f64;
                let mut v = Complex64::default();
                for (k1, k2, c) in slice.iter_modes() {
                    let arg = k1 as f64 * x1 + k2 as f64 * x2;
                    v += c * Complex64::new(arg.cos(), arg.sin());
                }
                l4_sq += v.re.powi(4) * cell;
            }
        }
        total += w * l4_sq.sqrt();
    }
    let oracle = total.sqrt();
    let got = f.l2m_l4_norm(&fft);
    assert!(
        (got - oracle).abs() < 1e-10 * oracle.max(1.0),
        "{got} vs {oracle}"
    );
}

#[test]
fn sobolev_norm_matches_direct_sum() {
    let mut r = common::rng(31);
    let f = SpectralField2D::random_zero_mean(6, &mut r);
    let mut sum = 0.0;
    for (k1, k2, c) in f.iter_modes() {
        if (k1, k2) == (0, 0) {
            continue;
        }
        sum += (1.0 + (k1 * k1 + k2 * k2) as f64).sqrt() * c.norm_sqr();
    }
    assert!((f.sobolev_norm(0.5) - sum.sqrt()).abs() < 1e-13);
}

#[test]
fn m_norm_dominates_u_norm() {
    for seed in 0..5 {
        let grid = Arc::new(VelocityGrid::new(20, 5.0).unwrap());
        let f = common::random_distribution(4, grid, seed);
        assert!(f.weighted_l2_norm(WeightKind::M) >= f.weighted_l2_norm(WeightKind::U));
    }
}

#[test]
fn separable_gaussian_mode_norm_matches_quadrature() {
    // f(x, u) = e^{-u^2} cos(x1): ||f||_{2,u}^2 = (A/2) int e^{-2u^2} 2 pi u du
    let grid = Arc::new(VelocityGrid::new(512, 6.0).unwrap());
    let mut field = SpectralField2D::zeros(3);
    field.set_coeff(1, 0, Complex64::new(0.5, 0.0));
    field.set_coeff(-1, 0, Complex64::new(0.5, 0.0));
    let profile: Vec<f64> = grid.nodes().iter().map(|&u| (-u * u).exp()).collect();
    let f = GyroDistribution::separable(&field, &profile, grid).unwrap();
    let exact = (TORUS_AREA * 0.5 * (PI / 2.0)).sqrt();
    let got = f.weighted_l2_norm(WeightKind::U);
    assert!((got - exact).abs() < 1e-9 * exact, "{got} vs {exact}");
}
