//! Fourier-multiplier operators of the model: gyro-average, electroneutrality
//! multiplier H_T, its inversion, the gyro-density, and the drift field.

use crate::bessel::{j0_prime_raw, j0_raw};
use crate::distribution::GyroDistribution;
use crate::error::{Error, Result};
use crate::field::{SpectralField2D, TORUS_AREA};
use crate::grid::{VelocityGrid, WeightKind};
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

/// Floor under 1 - H_T(k) below which the inversion is refused.
const SINGULAR_FLOOR: f64 = 1e-14;
/// Relative tolerance on the density mean before the potential solve warns.
const MASS_WARN_TOL: f64 = 1e-2;

/// Gyro-average J0_u: mode k scaled by J0(|k| u). Preserves the mean and
/// Hermitian symmetry.
pub fn gyroaverage(field: &SpectralField2D, u: f64) -> Result<SpectralField2D> {
    if !(u.is_finite() && u >= 0.0) {
        return Err(Error::Domain(format!("gyroaverage radius must be nonnegative, got {u}")));
    }
    let mut out = field.apply_radial_multiplier(|k_mag| j0_raw(k_mag * u));
    out.zero_mean = field.zero_mean;
    Ok(out)
}

/// Radial derivative of the gyro-average: mode k scaled by |k| J0'(|k| u).
pub fn gyroaverage_du(field: &SpectralField2D, u: f64) -> Result<SpectralField2D> {
    if !(u.is_finite() && u >= 0.0) {
        return Err(Error::Domain(format!("gyroaverage radius must be nonnegative, got {u}")));
    }
    let mut out = field.apply_radial_multiplier(|k_mag| k_mag * j0_prime_raw(k_mag * u));
    out.zero_mean = field.zero_mean;
    Ok(out)
}

/// Electroneutrality multiplier H_T(k) = (2/T) int_0^inf J0(k u)^2 e^{-u^2/T} u du,
/// evaluated with the supplied grid's quadrature. The grid should extend to
/// u_max >= 6 sqrt(T) so the truncated tail is below roundoff.
pub fn ht_hat(k_mag: f64, temperature: f64, grid: &VelocityGrid) -> Result<f64> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::Domain(format!("temperature must be positive, got {temperature}")));
    }
    if !(k_mag.is_finite() && k_mag >= 0.0) {
        return Err(Error::Domain(format!("|k| must be nonnegative, got {k_mag}")));
    }
    let samples: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&u| {
            let j = j0_raw(k_mag * u);
            j * j * (-u * u / temperature).exp()
        })
        .collect();
    // (2/T) int J0^2 e^{-u^2/T} u du = (1/(pi T)) int J0^2 e^{-u^2/T} (2 pi u) du
    Ok(grid.integrate_u(&samples, WeightKind::U)? / (PI * temperature))
}

/// Quadrature grid for the multiplier integral: u_max = 6 sqrt(T), with the
/// node count scaled to resolve the J0(k u)^2 oscillation at high |k|.
pub fn ht_quadrature_grid(k_mag: f64, temperature: f64) -> VelocityGrid {
    let u_max = 6.0 * temperature.sqrt();
    let n = (48.0 * k_mag * u_max).ceil() as usize;
    let n = n.clamp(2048, 400_000);
    VelocityGrid::new(n, u_max).expect("valid quadrature grid")
}

/// Precomputed mode-wise tables for a fixed (K, T, radial grid):
/// J0(|k| u_j) per mode and node, H_T(|k|) and T / (1 - H_T(|k|)) per mode.
/// Distinct |k| magnitudes are evaluated once and shared.
pub struct MultiplierTable {
    k_max: usize,
    temperature: f64,
    grid: Arc<VelocityGrid>,
    /// row index into the dedup tables per storage mode (i1, i2)
    row_of_mode: Vec<usize>,
    /// j0 values per distinct |k|, per radial node: rows[r * n_u + j]
    j0_rows: Vec<f64>,
    /// H_T per distinct |k|
    ht: Vec<f64>,
    /// T / (1 - H_T) per distinct |k| (unused entry for |k| = 0)
    lt_inv: Vec<f64>,
    /// smallest 1 - H_T over nonzero modes
    min_one_minus_ht: f64,
}

impl MultiplierTable {
    pub fn build(k_max: usize, temperature: f64, grid: Arc<VelocityGrid>) -> Result<Self> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::Domain(format!("temperature must be positive, got {temperature}")));
        }
        let n = 2 * k_max + 1;
        let n_u = grid.len();
        let kc = k_max as i64;

        // collect distinct squared magnitudes
        let mut index_of_ksq: HashMap<i64, usize> = HashMap::new();
        let mut row_of_mode = vec![0usize; n * n];
        let mut ksq_list: Vec<i64> = Vec::new();
        for i1 in 0..n {
            for i2 in 0..n {
                let k1 = i1 as i64 - kc;
                let k2 = i2 as i64 - kc;
                let ksq = k1 * k1 + k2 * k2;
                let next = ksq_list.len();
                let r = *index_of_ksq.entry(ksq).or_insert_with(|| {
                    ksq_list.push(ksq);
                    next
                });
                row_of_mode[i1 * n + i2] = r;
            }
        }

        let n_rows = ksq_list.len();
        let mut j0_rows = vec![0.0; n_rows * n_u];
        let mut ht = vec![0.0; n_rows];
        let mut lt_inv = vec![0.0; n_rows];
        let mut min_one_minus_ht = f64::INFINITY;
        for (r, &ksq) in ksq_list.iter().enumerate() {
            let k_mag = (ksq as f64).sqrt();
            for (j, &u) in grid.nodes().iter().enumerate() {
                j0_rows[r * n_u + j] = j0_raw(k_mag * u);
            }
            if ksq == 0 {
                ht[r] = 1.0;
                lt_inv[r] = 0.0;
                continue;
            }
            let quad = ht_quadrature_grid(k_mag, temperature);
            let h = ht_hat(k_mag, temperature, &quad)?;
            let one_minus = 1.0 - h;
            if one_minus < SINGULAR_FLOOR {
                // find a representative mode for the message
                return Err(Error::SingularMultiplier(k_mag.round() as i64, 0, one_minus));
            }
            ht[r] = h;
            lt_inv[r] = temperature / one_minus;
            min_one_minus_ht = min_one_minus_ht.min(one_minus);
        }

        Ok(Self {
            k_max,
            temperature,
            grid,
            row_of_mode,
            j0_rows,
            ht,
            lt_inv,
            min_one_minus_ht,
        })
    }

    #[inline]
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    #[inline]
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    #[inline]
    pub fn grid(&self) -> &Arc<VelocityGrid> {
        &self.grid
    }

    #[inline]
    pub fn min_one_minus_ht(&self) -> f64 {
        self.min_one_minus_ht
    }

    /// J0(|k| u_j) for the storage mode (i1, i2) at node j.
    #[inline]
    pub fn j0_at(&self, i1: usize, i2: usize, j: usize) -> f64 {
        let n = 2 * self.k_max + 1;
        let n_u = self.grid.len();
        self.j0_rows[self.row_of_mode[i1 * n + i2] * n_u + j]
    }

    /// H_T at the storage mode (i1, i2).
    #[inline]
    pub fn ht_at(&self, i1: usize, i2: usize) -> f64 {
        let n = 2 * self.k_max + 1;
        self.ht[self.row_of_mode[i1 * n + i2]]
    }

    /// T / (1 - H_T) at the storage mode (i1, i2); zero at k = 0 by convention.
    #[inline]
    pub fn lt_inv_at(&self, i1: usize, i2: usize) -> f64 {
        let n = 2 * self.k_max + 1;
        self.lt_inv[self.row_of_mode[i1 * n + i2]]
    }

    /// Gyro-density rho^(k) = sum_j w_j J0(|k| u_j) f^(k, u_j).
    pub fn density(&self, f: &GyroDistribution) -> SpectralField2D {
        assert_eq!(f.k_max(), self.k_max);
        let n = 2 * self.k_max + 1;
        let n_u = self.grid.len();
        let w = self.grid.weights();
        let mut rho = SpectralField2D::zeros(self.k_max);
        let modal = f.modal();
        for i1 in 0..n {
            for i2 in 0..n {
                let row = self.row_of_mode[i1 * n + i2];
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n_u {
                    acc += w[j] * self.j0_rows[row * n_u + j] * modal[[i1, i2, j]];
                }
                rho.coeffs_mut()[[i1, i2]] = acc;
            }
        }
        rho
    }

    /// Invert the electroneutrality relation: Phi^(k) = T rho^(k) / (1 - H_T(k))
    /// on nonzero modes, zero-mean gauge at k = 0. Warns when the density mean
    /// strays from the unit-mass normalization.
    pub fn solve_potential(&self, rho: &SpectralField2D) -> Result<SpectralField2D> {
        assert_eq!(rho.k_max(), self.k_max);
        if self.min_one_minus_ht < SINGULAR_FLOOR {
            return Err(Error::SingularMultiplier(0, 0, self.min_one_minus_ht));
        }
        let mean_mass = rho.mean().re * TORUS_AREA;
        if (mean_mass - 1.0).abs() > MASS_WARN_TOL {
            log::warn!("density mean {mean_mass:.6} deviates from unit mass before potential solve");
        }
        let n = 2 * self.k_max + 1;
        let mut phi = SpectralField2D::zeros(self.k_max);
        for i1 in 0..n {
            for i2 in 0..n {
                phi.coeffs_mut()[[i1, i2]] = rho.coeffs()[[i1, i2]] * self.lt_inv[self.row_of_mode[i1 * n + i2]];
            }
        }
        phi.set_coeff(0, 0, Complex64::new(0.0, 0.0));
        phi.zero_mean = true;
        Ok(phi)
    }
}

/// Gyro-density via direct Bessel evaluation (no table).
pub fn compute_density(f: &GyroDistribution) -> SpectralField2D {
    let k_max = f.k_max();
    let kc = k_max as i64;
    let n = 2 * k_max + 1;
    let grid = f.grid();
    let w = grid.weights();
    let mut rho = SpectralField2D::zeros(k_max);
    for i1 in 0..n {
        for i2 in 0..n {
            let k1 = i1 as i64 - kc;
            let k2 = i2 as i64 - kc;
            let k_mag = ((k1 * k1 + k2 * k2) as f64).sqrt();
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &u) in grid.nodes().iter().enumerate() {
                acc += w[j] * j0_raw(k_mag * u) * f.modal()[[i1, i2, j]];
            }
            rho.coeffs_mut()[[i1, i2]] = acc;
        }
    }
    rho
}

/// Perpendicular drift (J0_u grad Phi)^perp as two spectral components:
/// component 1 = -d/dx2 (J0_u Phi), component 2 = +d/dx1 (J0_u Phi).
/// The pair is divergence-free identically in modal form.
pub fn drift_velocity(phi: &SpectralField2D, u: f64) -> Result<(SpectralField2D, SpectralField2D)> {
    let avg = gyroaverage(phi, u)?;
    let mut v1 = avg.derivative(1);
    v1.coeffs_mut().mapv_inplace(|c| -c);
    let v2 = avg.derivative(0);
    Ok((v1, v2))
}
