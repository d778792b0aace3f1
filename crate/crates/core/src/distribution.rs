//! The evolved state: modal in x, nodal in u.

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::field::{SpectralField2D, TORUS_AREA};
use crate::grid::{VelocityGrid, WeightKind};
use ndarray::{Array2, Array3, ArrayView2, ArrayViewMut2, Axis};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Gyro-center distribution f(x, u): Fourier coefficients in x per radial node.
#[derive(Debug, Clone)]
pub struct GyroDistribution {
    /// Index (i1, i2, j): mode k = (i1 - K, i2 - K) at radial node u_j.
    modal: Array3<Complex64>,
    k_max: usize,
    grid: Arc<VelocityGrid>,
}

impl GyroDistribution {
    pub fn zeros(k_max: usize, grid: Arc<VelocityGrid>) -> Self {
        let n = 2 * k_max + 1;
        let n_u = grid.len();
        Self {
            modal: Array3::zeros((n, n, n_u)),
            k_max,
            grid,
        }
    }

    /// Build from a separable profile: f(x, u) = field(x) * profile(u).
    pub fn separable(field: &SpectralField2D, profile: &[f64], grid: Arc<VelocityGrid>) -> Result<Self> {
        if profile.len() != grid.len() {
            return Err(Error::Shape("profile length must match grid".into()));
        }
        let mut f = Self::zeros(field.k_max(), grid);
        for ((i1, i2), &c) in field.coeffs().indexed_iter() {
            for (j, &p) in profile.iter().enumerate() {
                f.modal[[i1, i2, j]] = c * p;
            }
        }
        Ok(f)
    }

    #[inline]
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    #[inline]
    pub fn grid(&self) -> &Arc<VelocityGrid> {
        &self.grid
    }

    #[inline]
    pub fn modal(&self) -> &Array3<Complex64> {
        &self.modal
    }

    #[inline]
    pub fn modal_mut(&mut self) -> &mut Array3<Complex64> {
        &mut self.modal
    }

    /// Coefficient of mode k at radial node j.
    #[inline]
    pub fn coeff(&self, k1: i64, k2: i64, j: usize) -> Complex64 {
        let k = self.k_max as i64;
        self.modal[[(k1 + k) as usize, (k2 + k) as usize, j]]
    }

    #[inline]
    pub fn set_coeff(&mut self, k1: i64, k2: i64, j: usize, value: Complex64) {
        let k = self.k_max as i64;
        self.modal[[(k1 + k) as usize, (k2 + k) as usize, j]] = value;
    }

    /// The x-slice at radial node j as a spectral field.
    pub fn slice_field(&self, j: usize) -> SpectralField2D {
        let n = 2 * self.k_max + 1;
        let mut coeffs = Array2::zeros((n, n));
        coeffs.assign(&self.modal.index_axis(Axis(2), j));
        SpectralField2D::from_coeffs(coeffs, self.k_max).expect("consistent shape")
    }

    /// View of the radial profile of mode k (all u nodes).
    pub fn mode_profile(&self, k1: i64, k2: i64) -> Vec<Complex64> {
        let k = self.k_max as i64;
        let i1 = (k1 + k) as usize;
        let i2 = (k2 + k) as usize;
        (0..self.grid.len()).map(|j| self.modal[[i1, i2, j]]).collect()
    }

    /// Mass functional A 2 pi sum_j u_j du Re f^(0, u_j): the x-mean integrated
    /// against the plain midpoint u du rule, which the radial stencils conserve
    /// exactly.
    pub fn mass(&self) -> f64 {
        let k = self.k_max;
        let du = self.grid.spacing();
        let sum: f64 = self
            .grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(j, &u)| u * du * self.modal[[k, k, j]].re)
            .sum();
        TORUS_AREA * 2.0 * PI * sum
    }

    /// Mass computed with the end-corrected quadrature weights (used for
    /// normalization and the density mean; agrees with `mass` to quadrature
    /// accuracy for smooth profiles).
    pub fn quadrature_mass(&self) -> f64 {
        let k = self.k_max;
        let sum: f64 = self
            .grid
            .weights()
            .iter()
            .enumerate()
            .map(|(j, &w)| w * self.modal[[k, k, j]].re)
            .sum();
        TORUS_AREA * sum
    }

    /// Weighted L2 norm (sum_j w_j ||f(., u_j)||^2_{L2(x)})^{1/2} with the
    /// physical (Parseval) slice norm.
    pub fn weighted_l2_norm(&self, kind: WeightKind) -> f64 {
        let w = self.grid.weights_for(kind);
        let mut total = 0.0;
        for (j, &wj) in w.iter().enumerate() {
            let slice_sq: f64 = self
                .modal
                .index_axis(Axis(2), j)
                .iter()
                .map(|c| c.norm_sqr())
                .sum();
            total += wj * TORUS_AREA * slice_sq;
        }
        total.sqrt()
    }

    /// Weighted modal Sobolev norm (sum_j m_j sum_k (1+|k|^2)^s |f^(k,u_j)|^2)^{1/2}
    /// in the coefficient normalization (no area factor).
    pub fn l2m_hs_norm(&self, s: f64) -> f64 {
        let w = self.grid.weights_for(WeightKind::M);
        let k = self.k_max as i64;
        let mut total = 0.0;
        for (j, &wj) in w.iter().enumerate() {
            let mut slice = 0.0;
            for ((i1, i2), c) in self.modal.index_axis(Axis(2), j).indexed_iter() {
                let k1 = i1 as i64 - k;
                let k2 = i2 as i64 - k;
                let ksq = (k1 * k1 + k2 * k2) as f64;
                slice += (1.0 + ksq).powf(s) * c.norm_sqr();
            }
            total += wj * slice;
        }
        total.sqrt()
    }

    /// Norm of the x-gradient, (sum_j w_j ||grad_x f(., u_j)||^2_{L2})^{1/2}.
    pub fn grad_weighted_l2_norm(&self, kind: WeightKind) -> f64 {
        let w = self.grid.weights_for(kind);
        let k = self.k_max as i64;
        let mut total = 0.0;
        for (j, &wj) in w.iter().enumerate() {
            let mut slice = 0.0;
            for ((i1, i2), c) in self.modal.index_axis(Axis(2), j).indexed_iter() {
                let k1 = i1 as i64 - k;
                let k2 = i2 as i64 - k;
                slice += ((k1 * k1 + k2 * k2) as f64) * c.norm_sqr();
            }
            total += wj * TORUS_AREA * slice;
        }
        total.sqrt()
    }

    /// L2_m(L4) norm: m-weighted quadrature of squared slice L4 norms, the L4
    /// norm evaluated on the dealiased physical grid.
    pub fn l2m_l4_norm(&self, fft: &Fft2) -> f64 {
        let w = self.grid.weights_for(WeightKind::M);
        let m = fft.size();
        let cell = TORUS_AREA / (m * m) as f64;
        let mut total = 0.0;
        for (j, &wj) in w.iter().enumerate() {
            let phys = self.slice_field(j).to_physical(fft);
            let l4_sq: f64 = phys.iter().map(|v| v.powi(4) * cell).sum::<f64>().sqrt();
            total += wj * l4_sq;
        }
        total.sqrt()
    }

    /// Minimum nodal value over the physical grid and all u slices.
    pub fn min_physical(&self, fft: &Fft2) -> f64 {
        let mut min = f64::INFINITY;
        for j in 0..self.grid.len() {
            let phys = self.slice_field(j).to_physical(fft);
            for &v in phys.iter() {
                min = min.min(v);
            }
        }
        min
    }

    /// Fraction of the mass functional carried by the outermost radial cell.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let k = self.k_max;
        let j = self.grid.len() - 1;
        let du = self.grid.spacing();
        let u = self.grid.nodes()[j];
        let boundary = TORUS_AREA * 2.0 * PI * u * du * self.modal[[k, k, j]].re;
        let m = self.mass();
        if m.abs() < f64::MIN_POSITIVE {
            boundary.abs()
        } else {
            (boundary / m).abs()
        }
    }

    /// Largest Hermitian-symmetry defect across all u slices.
    pub fn hermitian_defect(&self) -> f64 {
        let n = 2 * self.k_max + 1;
        let mut worst = 0.0_f64;
        for j in 0..self.grid.len() {
            let s = self.modal.index_axis(Axis(2), j);
            for i1 in 0..n {
                for i2 in 0..n {
                    let d = (s[[n - 1 - i1, n - 1 - i2]] - s[[i1, i2]].conj()).norm();
                    worst = worst.max(d);
                }
            }
        }
        worst
    }

    /// Project each slice onto the Hermitian subspace.
    pub fn enforce_hermitian(&mut self) {
        let n = 2 * self.k_max + 1;
        for j in 0..self.grid.len() {
            for i1 in 0..n {
                for i2 in 0..n {
                    let j1 = n - 1 - i1;
                    let j2 = n - 1 - i2;
                    if (i1, i2) <= (j1, j2) {
                        let a = self.modal[[i1, i2, j]];
                        let b = self.modal[[j1, j2, j]];
                        let avg = 0.5 * (a + b.conj());
                        self.modal[[i1, i2, j]] = avg;
                        self.modal[[j1, j2, j]] = avg.conj();
                    }
                }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.modal.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Scale the whole distribution in place.
    pub fn scale(&mut self, s: f64) {
        self.modal.mapv_inplace(|c| c * s);
    }

    pub fn slice_view(&self, j: usize) -> ArrayView2<'_, Complex64> {
        self.modal.index_axis(Axis(2), j)
    }

    pub fn slice_view_mut(&mut self, j: usize) -> ArrayViewMut2<'_, Complex64> {
        self.modal.index_axis_mut(Axis(2), j)
    }
}

/// a * x + b * y over matching layouts.
pub fn dist_lincomb(a: f64, x: &GyroDistribution, b: f64, y: &GyroDistribution) -> GyroDistribution {
    assert_eq!(x.k_max, y.k_max);
    let mut out = x.clone();
    out.modal.zip_mut_with(&y.modal, |cx, &cy| {
        *cx = a * *cx + b * cy;
    });
    out
}
