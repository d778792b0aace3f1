//! Shared oracles for the integration suites: quadratures independent of the
//! library's evaluation paths, and seeded random field builders.

#![allow(dead_code)]

use gyrofp_core::{GyroDistribution, SpectralField2D, VelocityGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

/// 10-point Gauss-Legendre nodes/weights on [-1, 1] (reference values).
pub const GL10: [(f64, f64); 10] = [
    (-0.9739065285171717, 0.0666713443086881),
    (-0.8650633666889845, 0.1494513491505806),
    (-0.6794095682990244, 0.2190863625159820),
    (-0.4333953941292472, 0.2692667193099963),
    (-0.1488743389816312, 0.2955242247147529),
    (0.1488743389816312, 0.2955242247147529),
    (0.4333953941292472, 0.2692667193099963),
    (0.6794095682990244, 0.2190863625159820),
    (0.8650633666889845, 0.1494513491505806),
    (0.9739065285171717, 0.0666713443086881),
];

/// Composite GL-10 quadrature of f over [a, b] with n panels.
pub fn integrate_gl10(a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for &(x, w) in &GL10 {
            total += 0.5 * h * w * f(mid + 0.5 * h * x);
        }
    }
    total
}

/// Independent quadrature oracle for the circle average J0(k):
/// (1/pi) int_0^pi cos(k cos t) dt, panel count scaled to the oscillation.
pub fn j0_oracle(k: f64) -> f64 {
    let panels = 16 + k.abs().ceil() as usize;
    integrate_gl10(0.0, PI, panels, |t| (k * t.cos()).cos()) / PI
}

/// Oracle for (J0)'(k) = -(1/pi) int_0^pi cos t sin(k cos t) dt.
pub fn j0_prime_oracle(k: f64) -> f64 {
    let panels = 16 + k.abs().ceil() as usize;
    -integrate_gl10(0.0, PI, panels, |t| t.cos() * (k * t.cos()).sin()) / PI
}

/// Adaptive Simpson quadrature (oracle-grade, recursion-limited).
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(_f: &impl Fn(f64) -> f64, a: f64, _m: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(f, a, lm, m, fa, flm, fm);
        let right = simpson(f, m, rm, b, fm, frm, fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(&f, a, m, b, fa, fm, fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 40)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real distribution with smooth spectrum and Gaussian radial profile.
pub fn random_distribution(
    k_max: usize,
    grid: Arc<VelocityGrid>,
    seed: u64,
) -> GyroDistribution {
    let mut r = rng(seed);
    let mut f = GyroDistribution::zeros(k_max, grid.clone());
    let n = grid.len();
    for j in 0..n {
        let u = grid.nodes()[j];
        let env = (-0.5 * u * u).exp();
        let field = SpectralField2D::random_zero_mean(k_max, &mut r);
        for (k1, k2, c) in field.iter_modes() {
            f.set_coeff(k1, k2, j, c * env * r.gen_range(0.5..1.0));
        }
        // keep it real: re-symmetrize after the random radial modulation
    }
    hermitianize(&mut f);
    f
}

fn hermitianize(f: &mut GyroDistribution) {
    let k = f.k_max() as i64;
    let n_u = f.grid().len();
    for j in 0..n_u {
        for k1 in -k..=k {
            for k2 in -k..=k {
                if (k1, k2) < (-k1, -k2) {
                    let a = f.coeff(k1, k2, j);
                    let b = f.coeff(-k1, -k2, j);
                    let avg = 0.5 * (a + b.conj());
                    f.set_coeff(k1, k2, j, avg);
                    f.set_coeff(-k1, -k2, j, avg.conj());
                } else if (k1, k2) == (-k1, -k2) {
                    let a = f.coeff(k1, k2, j);
                    f.set_coeff(k1, k2, j, Complex64::new(a.re, 0.0));
                }
            }
        }
    }
}

/// Mass-normalized positive random distribution (Maxwellian plus smooth noise).
pub fn random_mass_normalized(k_max: usize, grid: Arc<VelocityGrid>, seed: u64) -> GyroDistribution {
    let mut r = rng(seed);
    let mut field = SpectralField2D::random_zero_mean(k_max, &mut r);
    // small perturbation on top of 1
    let scale = 0.2
        / field
            .coeffs()
            .iter()
            .map(|c| c.norm())
            .sum::<f64>()
            .max(1e-300);
    for c in field.coeffs_mut().iter_mut() {
        *c *= scale;
    }
    field.set_coeff(0, 0, Complex64::new(1.0, 0.0));
    let profile: Vec<f64> = grid.nodes().iter().map(|&u| (-u * u).exp()).collect();
    let mut f = GyroDistribution::separable(&field, &profile, grid).unwrap();
    let m = f.quadrature_mass();
    f.scale(1.0 / m);
    f
}
