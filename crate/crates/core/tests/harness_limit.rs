//! 4D harness verification: rotation exactness, conservation, angular
//! analysis, radial equivalence against the radial solver, and the sweep.

mod common;

use gyrofp_core::config::phi_from_modes;
use gyrofp_core::harness::{
    plane_harmonics, Harness4D, HarnessParams, SweepInitial, SweepSpec,
};
use gyrofp_core::{
    angular_average, epsilon_sweep, Gyro4DState, GyroDistribution, PhysicalParams, PotentialMode,
    Solver, SpectralField2D, VelocityGrid, WeightKind,
};
use num_complex::Complex64;
use std::sync::Arc;

fn small_params() -> HarnessParams {
    HarnessParams {
        nx: 8,
        nv: 32,
        u_span: 5.0,
        nu: 0.0,
        beta: 0.0,
    }
}

#[test]
fn free_rotation_returns_after_full_turn() {
    // nu = beta = 0, epsilon rotation only: after time 2 pi eps the state is
    // back to the initial one, up to shear interpolation error
    let eps = 0.05;
    let mut state = Gyro4DState::new(small_params(), Some(eps)).unwrap();
    state.fill(|_x1, _x2, v1, v2| (-(v1 * v1 + v2 * v2)).exp() * (1.0 + 0.5 * v1 + 0.3 * v2 * v2));
    let initial = state.f.clone();
    let mut h = Harness4D::new(state).unwrap();
    let period = 2.0 * std::f64::consts::PI * eps;
    let steps = 63;
    let dt = period / steps as f64;
    assert!(dt <= 0.1 * eps);
    for _ in 0..steps {
        h.step(dt).unwrap();
    }
    let mut worst = 0.0_f64;
    for (a, b) in h.state.f.iter().zip(initial.iter()) {
        worst = worst.max((a - b).abs());
    }
    assert!(worst < 1e-9, "rotation period error {worst}");
}

#[test]
fn rotation_fixes_radial_data() {
    let mut state = Gyro4DState::new(small_params(), Some(0.1)).unwrap();
    state.fill(|_x1, _x2, v1, v2| (-(v1 * v1 + v2 * v2)).exp());
    let initial = state.f.clone();
    let mut h = Harness4D::new(state).unwrap();
    h.rotate(0.37);
    let mut worst = 0.0_f64;
    for (a, b) in h.state.f.iter().zip(initial.iter()) {
        worst = worst.max((a - b).abs());
    }
    assert!(worst < 1e-12, "radial data moved by {worst}");
}

#[test]
fn quarter_turn_is_exact_index_rotation() {
    let mut state = Gyro4DState::new(small_params(), Some(0.1)).unwrap();
    state.fill(|_x1, _x2, v1, v2| (-(v1 * v1 + v2 * v2)).exp() * (1.0 + 0.4 * v1));
    let p = state.params;
    let expected = {
        let mut s = Gyro4DState::new(p, Some(0.1)).unwrap();
        // rotating the pattern by +90 degrees maps v1 -> v2
        s.fill(|_x1, _x2, v1, v2| {
            let _ = v1;
            (-(v1 * v1 + v2 * v2)).exp() * (1.0 + 0.4 * v2)
        });
        s.f
    };
    let mut h = Harness4D::new(state).unwrap();
    h.rotate(std::f64::consts::FRAC_PI_2);
    let mut worst = 0.0_f64;
    for (a, b) in h.state.f.iter().zip(expected.iter()) {
        worst = worst.max((a - b).abs());
    }
    assert!(worst < 1e-12, "quarter turn error {worst}");
}

#[test]
fn mass_conserved_over_many_steps() {
    let params = HarnessParams {
        nx: 4,
        nv: 32,
        u_span: 5.0,
        nu: 0.02,
        beta: 0.15,
    };
    let eps = 0.2;
    let mut state = Gyro4DState::new(params, Some(eps)).unwrap();
    state.fill(|x1, _x2, v1, v2| {
        (-(v1 * v1 + v2 * v2)).exp() * (1.0 + 0.3 * v1) * (1.0 + 0.4 * x1.cos())
    });
    let mut h = Harness4D::new(state).unwrap();
    let m0 = h.state.mass();
    let dt = 0.1 * eps;
    for _ in 0..1000 {
        h.step(dt).unwrap();
    }
    let m1 = h.state.mass();
    assert!(
        ((m1 - m0) / m0).abs() < 1e-8,
        "mass drift {} over 1000 steps",
        (m1 - m0) / m0
    );
}

#[test]
fn angular_average_of_radial_state_recovers_profile() {
    let params = small_params();
    let mut state = Gyro4DState::new(params, None).unwrap();
    state.fill(|_x1, _x2, v1, v2| (-(v1 * v1 + v2 * v2)).exp());
    let grid = Arc::new(VelocityGrid::new(16, 4.0).unwrap());
    let avg = angular_average(&state, grid.clone(), 2, 128).unwrap();
    for (j, &u) in grid.nodes().iter().enumerate() {
        let got = avg.coeff(0, 0, j).re;
        let want = (-u * u).exp();
        assert!((got - want).abs() < 1e-6, "node {j}: {got} vs {want}");
        for (k1, k2) in [(1i64, 0i64), (0, 1), (2, 2)] {
            assert!(avg.coeff(k1, k2, j).norm() < 1e-12);
        }
    }
}

#[test]
fn angular_average_kills_odd_harmonic() {
    let params = small_params();
    let mut state = Gyro4DState::new(params, None).unwrap();
    // cos(phi) g(u) = v1/u g(u): use v1 * gaussian (= u cos(phi) e^{-u^2})
    state.fill(|_x1, _x2, v1, v2| v1 * (-(v1 * v1 + v2 * v2)).exp());
    let grid = Arc::new(VelocityGrid::new(12, 4.0).unwrap());
    let avg = angular_average(&state, grid, 1, 256).unwrap();
    let worst: f64 = avg.modal().iter().map(|c| c.norm()).fold(0.0, f64::max);
    assert!(worst < 1e-10, "odd harmonic survived the average: {worst}");
}

#[test]
fn plane_harmonics_match_dense_quadrature() {
    // random smooth plane: modest angle count vs a 4096-angle reference
    let params = small_params();
    let mut plane = ndarray::Array2::<f64>::zeros((params.nv, params.nv));
    for i in 0..params.nv {
        for j in 0..params.nv {
            let v1 = params.v_node(i);
            let v2 = params.v_node(j);
            plane[[i, j]] = (-(v1 * v1 + v2 * v2) / 2.0).exp()
                * (1.0 + 0.3 * v1 + 0.2 * v1 * v2 + 0.1 * (v2 * v2 - v1 * v1));
        }
    }
    let radii = [0.5, 1.0, 2.0];
    let ells = [0i64, 1, 2];
    let coarse = plane_harmonics(&plane.view(), &params, &radii, &ells, 256);
    let dense = plane_harmonics(&plane.view(), &params, &radii, &ells, 4096);
    for h in 0..ells.len() {
        for j in 0..radii.len() {
            assert!(
                (coarse[[h, j]] - dense[[h, j]]).norm() < 1e-8,
                "harmonic {h}, radius {j}"
            );
        }
    }
}

/// Radial equivalence at one resolution: returns the measurement error.
fn radial_equivalence_error(nx: usize, nv: usize, n_u: usize, dt: f64) -> f64 {
    let nu = 0.02;
    let beta = 0.1;
    let t_end = 0.5;
    let u_span = 5.0;
    let k_phi = 1usize;

    // common fixed smooth potential
    let phi = phi_from_modes(k_phi, &vec![(1, 0, 0.15, 0.0), (0, 1, 0.0, 0.1)]).unwrap();

    // 4D limit-form run
    let params = HarnessParams {
        nx,
        nv,
        u_span,
        nu,
        beta,
    };
    let mut state = Gyro4DState::new(params, None).unwrap();
    state.fill(|x1, _x2, v1, v2| (-(v1 * v1 + v2 * v2)).exp() * (1.0 + 0.3 * x1.cos()));
    let mut h = Harness4D::new(state).unwrap();
    h.set_potential(&phi).unwrap();
    let steps = (t_end / dt).round() as usize;
    for _ in 0..steps {
        h.step(t_end / steps as f64).unwrap();
    }

    // radial solver with the same fixed potential
    let k_max = (nx - 2) / 3;
    let grid = Arc::new(VelocityGrid::new(n_u, 0.9 * u_span).unwrap());
    let mut field = SpectralField2D::zeros(k_max);
    field.set_coeff(0, 0, Complex64::new(1.0, 0.0));
    field.set_coeff(1, 0, Complex64::new(0.15, 0.0));
    field.set_coeff(-1, 0, Complex64::new(0.15, 0.0));
    let profile: Vec<f64> = grid.nodes().iter().map(|&u| (-u * u).exp()).collect();
    let f0 = GyroDistribution::separable(&field, &profile, grid.clone()).unwrap();
    let sparams = PhysicalParams {
        nu,
        beta,
        temperature: 1.0,
        k_max,
        n_u,
        u_max: 0.9 * u_span,
    };
    let mut wide = SpectralField2D::zeros(k_max);
    for (k1, k2, c) in phi.iter_modes() {
        if k1.unsigned_abs() as usize <= k_max && k2.unsigned_abs() as usize <= k_max {
            wide.set_coeff(k1, k2, c);
        }
    }
    wide.zero_mean = true;
    let mut solver = Solver::new(f0, sparams, PotentialMode::Frozen(wide)).unwrap();
    solver.dt_max = dt;
    for _ in 0..steps {
        solver.step(t_end / steps as f64).unwrap();
    }

    let avg = angular_average(&h.state, grid, k_max, 512).unwrap();
    let diff = gyrofp_core::distribution::dist_lincomb(1.0, &avg, -1.0, &solver.state().f);
    diff.weighted_l2_norm(WeightKind::U)
}

#[test]
fn radial_equivalence_improves_under_refinement() {
    let coarse = radial_equivalence_error(8, 24, 24, 0.005);
    let fine = radial_equivalence_error(16, 48, 48, 0.005);
    assert!(
        fine < coarse / 3.0,
        "refinement ratio {:.2} (coarse {coarse:e}, fine {fine:e})",
        coarse / fine
    );
}

#[test]
fn epsilon_sweep_smoke() {
    let params = HarnessParams {
        nx: 8,
        nv: 32,
        u_span: 5.0,
        nu: 0.02,
        beta: 0.2,
    };
    let mut spec = SweepSpec::desk(params, vec![0.2, 0.1]);
    spec.n_u = 64;
    spec.initial = SweepInitial::default();
    let report = epsilon_sweep(&spec).unwrap();
    assert_eq!(report.cases.len(), 2);
    for c in &report.cases {
        assert!(c.e_norm.is_finite() && c.ell1_norm.is_finite());
        assert!(c.e_norm > 0.0);
    }
    // the printed table renders
    let text = report.render();
    assert!(text.contains("epsilon"));
}
