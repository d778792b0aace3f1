//! Radial (Larmor-axis) operator: beta u d_u + 2 beta + nu (1/u) d_u(u d_u .),
//! discretized in flux form on the cell-centered grid, with zero-flux closure
//! at both ends. The geometric factor u vanishes at the inner cell face, so
//! the coordinate singularity never enters a stencil.

use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::solver::PhysicalParams;
use num_complex::Complex64;

/// Tridiagonal radial operator, with the diffusive part kept separately so its
/// symmetry and sign can be verified in the u du inner product.
#[derive(Debug, Clone)]
pub struct UOperator {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub nu_lower: Vec<f64>,
    pub nu_diag: Vec<f64>,
    pub nu_upper: Vec<f64>,
    n: usize,
}

/// Build the radial operator for the given grid and parameters.
///
/// Diffusion: nu (1/u_j) [u_{j+1/2} (f_{j+1}-f_j) - u_{j-1/2} (f_j-f_{j-1})] / du^2.
/// Drift: beta u d_u + 2 beta written as the flux difference of u^2 f with
/// centered face averages, so the discrete u du mass is conserved exactly.
pub fn build_u_operator(grid: &VelocityGrid, params: &PhysicalParams) -> Result<UOperator> {
    let n = grid.len();
    if n < 3 {
        return Err(Error::Config(format!("radial operator needs at least 3 nodes, got {n}")));
    }
    let du = grid.spacing();
    let nu = params.nu;
    let beta = params.beta;
    let nodes = grid.nodes();

    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut nu_lower = vec![0.0; n];
    let mut nu_diag = vec![0.0; n];
    let mut nu_upper = vec![0.0; n];

    for j in 0..n {
        let u_j = nodes[j];
        let face_lo = j as f64 * du; // zero at the axis
        let face_hi = if j + 1 == n { 0.0 } else { (j + 1) as f64 * du }; // zero flux at u_max

        let dcoef = nu / (u_j * du * du);
        nu_lower[j] = dcoef * face_lo;
        nu_upper[j] = dcoef * face_hi;
        nu_diag[j] = -(nu_lower[j] + nu_upper[j]);

        let bcoef = beta / (2.0 * u_j * du);
        let b_lower = -bcoef * face_lo * face_lo;
        let b_upper = bcoef * face_hi * face_hi;
        let b_diag = bcoef * (face_hi * face_hi - face_lo * face_lo);

        lower[j] = nu_lower[j] + b_lower;
        diag[j] = nu_diag[j] + b_diag;
        upper[j] = nu_upper[j] + b_upper;
    }

    Ok(UOperator {
        lower,
        diag,
        upper,
        nu_lower,
        nu_diag,
        nu_upper,
        n,
    })
}

impl UOperator {
    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.apply_bands(&self.lower, &self.diag, &self.upper, f)
    }

    /// The diffusive part alone.
    pub fn apply_nu(&self, f: &[f64]) -> Vec<f64> {
        self.apply_bands(&self.nu_lower, &self.nu_diag, &self.nu_upper, f)
    }

    fn apply_bands(&self, lower: &[f64], diag: &[f64], upper: &[f64], f: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(f.len(), n);
        let mut out = vec![0.0; n];
        for j in 0..n {
            let mut v = diag[j] * f[j];
            if j > 0 {
                v += lower[j] * f[j - 1];
            }
            if j + 1 < n {
                v += upper[j] * f[j + 1];
            }
            out[j] = v;
        }
        out
    }

    /// Factor the trapezoidal step over time h: solves
    /// (I - h/2 D) f_next = (I + h/2 D) f.
    pub fn trapezoidal(&self, h: f64) -> Result<TrapezoidalStep> {
        let n = self.n;
        let s = 0.5 * h;
        let a: Vec<f64> = self.lower.iter().map(|&v| -s * v).collect();
        let b: Vec<f64> = self.diag.iter().map(|&v| 1.0 - s * v).collect();
        let c: Vec<f64> = self.upper.iter().map(|&v| -s * v).collect();

        // Thomas factorization of the implicit matrix
        let mut cp = vec![0.0; n];
        let mut inv_denom = vec![0.0; n];
        let mut denom = b[0];
        if denom.abs() < 1e-300 {
            return Err(Error::Numerical("tridiagonal pivot underflow".into()));
        }
        inv_denom[0] = 1.0 / denom;
        cp[0] = c[0] * inv_denom[0];
        for j in 1..n {
            denom = b[j] - a[j] * cp[j - 1];
            if denom.abs() < 1e-300 {
                return Err(Error::Numerical("tridiagonal pivot underflow".into()));
            }
            inv_denom[j] = 1.0 / denom;
            if j + 1 < n {
                cp[j] = c[j] * inv_denom[j];
            }
        }

        Ok(TrapezoidalStep {
            h_half: s,
            exp_lower: self.lower.clone(),
            exp_diag: self.diag.clone(),
            exp_upper: self.upper.clone(),
            imp_lower: a,
            cp,
            inv_denom,
            n,
        })
    }
}

/// Reusable factorization of one trapezoidal radial step.
pub struct TrapezoidalStep {
    h_half: f64,
    exp_lower: Vec<f64>,
    exp_diag: Vec<f64>,
    exp_upper: Vec<f64>,
    imp_lower: Vec<f64>,
    cp: Vec<f64>,
    inv_denom: Vec<f64>,
    n: usize,
}

impl TrapezoidalStep {
    /// Advance one radial column in place (complex amplitudes, real operator).
    pub fn advance(&self, col: &mut [Complex64], rhs: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(col.len(), n);
        debug_assert_eq!(rhs.len(), n);
        let s = self.h_half;
        // explicit half: rhs = (I + s D) col
        for j in 0..n {
            let mut v = (1.0 + s * self.exp_diag[j]) * col[j];
            if j > 0 {
                v += s * self.exp_lower[j] * col[j - 1];
            }
            if j + 1 < n {
                v += s * self.exp_upper[j] * col[j + 1];
            }
            rhs[j] = v;
        }
        // implicit half: Thomas forward/backward
        rhs[0] *= self.inv_denom[0];
        for j in 1..n {
            let t = rhs[j] - self.imp_lower[j] * rhs[j - 1];
            rhs[j] = t * self.inv_denom[j];
        }
        col[n - 1] = rhs[n - 1];
        for j in (0..n - 1).rev() {
            col[j] = rhs[j] - self.cp[j] * col[j + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::PhysicalParams;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(nu: f64, beta: f64) -> PhysicalParams {
        PhysicalParams {
            nu,
            beta,
            temperature: 1.0,
            k_max: 4,
            n_u: 32,
            u_max: 6.0,
        }
    }

    #[test]
    fn constant_maps_to_two_beta() {
        let grid = VelocityGrid::new(32, 6.0).unwrap();
        let op = build_u_operator(&grid, &params(0.3, 0.7)).unwrap();
        let out = op.apply(&vec![1.0; 32]);
        for j in 0..31 {
            assert_relative_eq!(out[j], 1.4, max_relative = 1e-13);
        }
        // last row carries the zero-flux closure, not 2 beta
        assert!(out[31] < 0.0);
    }

    #[test]
    fn quadratic_profile_interior_values() {
        // f = u^2: exact operator value is 4 nu + 4 beta u^2.
        let grid = VelocityGrid::new(256, 4.0).unwrap();
        let nu = 0.05;
        let beta = 0.2;
        let op = build_u_operator(&grid, &params(nu, beta)).unwrap();
        let f: Vec<f64> = grid.nodes().iter().map(|&u| u * u).collect();
        let out = op.apply(&f);
        let du = grid.spacing();
        for (j, &u) in grid.nodes().iter().enumerate().skip(2).take(200) {
            let exact = 4.0 * nu + 4.0 * beta * u * u;
            assert!(
                (out[j] - exact).abs() <= 20.0 * du * du * (1.0 + u * u),
                "node {j}: got {} want {exact}",
                out[j]
            );
        }
    }

    #[test]
    fn diffusive_part_self_adjoint_and_nonpositive() {
        let grid = VelocityGrid::new(48, 5.0).unwrap();
        let op = build_u_operator(&grid, &params(0.8, 0.3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a: Vec<f64> = (0..48).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..48).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let da = op.apply_nu(&a);
            let db = op.apply_nu(&b);
            let lhs = grid.inner_u(&da, &b);
            let rhs = grid.inner_u(&a, &db);
            let na = grid.inner_u(&a, &a).sqrt();
            let nb = grid.inner_u(&b, &b).sqrt();
            assert!((lhs - rhs).abs() <= 1e-12 * na * nb, "adjointness residual {}", lhs - rhs);
            let ray = grid.inner_u(&da, &a);
            assert!(ray <= 1e-12 * na * na, "positive Rayleigh quotient {ray}");
        }
    }

    #[test]
    fn mass_functional_in_kernel_of_adjoint() {
        // The full operator conserves sum_j u_j du f_j exactly under zero flux.
        let grid = VelocityGrid::new(32, 6.0).unwrap();
        let op = build_u_operator(&grid, &params(0.4, 0.9)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let df = op.apply(&f);
        let ones = vec![1.0; 32];
        let change = grid.inner_u(&df, &ones);
        let scale = grid.inner_u(&f, &f).sqrt();
        assert!(change.abs() < 1e-13 * scale.max(1.0), "mass leak {change}");
    }

    #[test]
    fn too_few_nodes_rejected() {
        let grid = VelocityGrid::new(2, 1.0).unwrap();
        assert!(matches!(
            build_u_operator(&grid, &params(0.1, 0.1)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn trapezoidal_matches_dense_reference() {
        // One implicit step against an explicit sub-stepped reference.
        let grid = VelocityGrid::new(24, 3.0).unwrap();
        let op = build_u_operator(&grid, &params(0.05, 0.1)).unwrap();
        let h = 1e-3;
        let steps = op.trapezoidal(h).unwrap();
        let f0: Vec<f64> = grid.nodes().iter().map(|&u| (-u * u).exp()).collect();
        let mut col: Vec<Complex64> = f0.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut rhs = vec![Complex64::default(); 24];
        steps.advance(&mut col, &mut rhs);

        // explicit RK4 with tiny sub-steps as reference
        let mut g = f0.clone();
        let sub = 200;
        let dt = h / sub as f64;
        for _ in 0..sub {
            let k1 = op.apply(&g);
            let g2: Vec<f64> = g.iter().zip(&k1).map(|(&x, &k)| x + 0.5 * dt * k).collect();
            let k2 = op.apply(&g2);
            let g3: Vec<f64> = g.iter().zip(&k2).map(|(&x, &k)| x + 0.5 * dt * k).collect();
            let k3 = op.apply(&g3);
            let g4: Vec<f64> = g.iter().zip(&k3).map(|(&x, &k)| x + dt * k).collect();
            let k4 = op.apply(&g4);
            for j in 0..24 {
                g[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        for j in 0..24 {
            assert!((col[j].re - g[j]).abs() < 1e-9, "node {j}");
            assert_eq!(col[j].im, 0.0);
        }
    }

    #[test]
    fn trapezoidal_conserves_mass_exactly() {
        let grid = VelocityGrid::new(40, 6.0).unwrap();
        let op = build_u_operator(&grid, &params(0.02, 0.15)).unwrap();
        let steps = op.trapezoidal(0.05).unwrap();
        let mut col: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&u| Complex64::new((-u * u).exp(), 0.0))
            .collect();
        let mut rhs = vec![Complex64::default(); 40];
        let re: Vec<f64> = col.iter().map(|c| c.re).collect();
        let before = grid.inner_u(&re, &vec![1.0; 40]);
        for _ in 0..200 {
            steps.advance(&mut col, &mut rhs);
        }
        let re: Vec<f64> = col.iter().map(|c| c.re).collect();
        let after = grid.inner_u(&re, &vec![1.0; 40]);
        assert_relative_eq!(after, before, max_relative = 1e-12);
    }
}
