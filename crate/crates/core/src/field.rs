//! Truncated Fourier representation of a real scalar field on the torus.

use crate::error::{Error, Result};
use crate::fft::Fft2;
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// Torus side length (x in [0, 2 pi)^2).
pub const TORUS_LENGTH: f64 = 2.0 * PI;
/// Torus area A = (2 pi)^2.
pub const TORUS_AREA: f64 = TORUS_LENGTH * TORUS_LENGTH;

/// Complex Fourier coefficients c(k) for integer wavevectors |k_i| <= K,
/// representing f(x) = sum_k c(k) e^{i k . x}. Real fields satisfy the
/// Hermitian symmetry c(-k) = conj(c(k)).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField2D {
    /// Storage index (i1, i2) maps to k = (i1 - K, i2 - K).
    coeffs: Array2<Complex64>,
    k_max: usize,
    /// When set, the k = 0 coefficient is pinned to zero (zero-mean gauge).
    pub zero_mean: bool,
}

impl SpectralField2D {
    pub fn zeros(k_max: usize) -> Self {
        let n = 2 * k_max + 1;
        Self {
            coeffs: Array2::zeros((n, n)),
            k_max,
            zero_mean: false,
        }
    }

    pub fn from_coeffs(coeffs: Array2<Complex64>, k_max: usize) -> Result<Self> {
        let n = 2 * k_max + 1;
        if coeffs.dim() != (n, n) {
            return Err(Error::Shape(format!(
                "expected ({n}, {n}) coefficient array, got {:?}",
                coeffs.dim()
            )));
        }
        Ok(Self { coeffs, k_max, zero_mean: false })
    }

    #[inline]
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    #[inline]
    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.coeffs
    }

    #[inline]
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        let k = self.k_max as i64;
        self.coeffs[[(k1 + k) as usize, (k2 + k) as usize]]
    }

    #[inline]
    pub fn set_coeff(&mut self, k1: i64, k2: i64, value: Complex64) {
        let k = self.k_max as i64;
        self.coeffs[[(k1 + k) as usize, (k2 + k) as usize]] = value;
    }

    /// Mean value of the field (the k = 0 coefficient).
    #[inline]
    pub fn mean(&self) -> Complex64 {
        self.coeffs[[self.k_max, self.k_max]]
    }

    /// Iterate (k1, k2, coeff) over all stored modes.
    pub fn iter_modes(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        let k = self.k_max as i64;
        self.coeffs
            .indexed_iter()
            .map(move |((i1, i2), &c)| (i1 as i64 - k, i2 as i64 - k, c))
    }

    /// Apply an isotropic real multiplier m(|k|) mode-wise.
    pub fn apply_radial_multiplier(&self, m: impl Fn(f64) -> f64) -> Self {
        let k = self.k_max as i64;
        let mut out = self.clone();
        for ((i1, i2), c) in out.coeffs.indexed_iter_mut() {
            let k1 = i1 as i64 - k;
            let k2 = i2 as i64 - k;
            let mag = ((k1 * k1 + k2 * k2) as f64).sqrt();
            *c *= m(mag);
        }
        out
    }

    /// Partial derivative along axis (0 or 1): multiply by i k_axis.
    pub fn derivative(&self, axis: usize) -> Self {
        let k = self.k_max as i64;
        let mut out = self.clone();
        out.zero_mean = self.zero_mean;
        for ((i1, i2), c) in out.coeffs.indexed_iter_mut() {
            let ka = if axis == 0 { i1 as i64 - k } else { i2 as i64 - k };
            *c *= Complex64::new(0.0, ka as f64);
        }
        out
    }

    /// Sobolev norm (sum_k (1 + |k|^2)^s |c(k)|^2)^{1/2} in the Fourier-series
    /// coefficient normalization. The k = 0 term is skipped for zero-mean fields.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let k = self.k_max as i64;
        let mut total = 0.0;
        for ((i1, i2), c) in self.coeffs.indexed_iter() {
            let k1 = i1 as i64 - k;
            let k2 = i2 as i64 - k;
            if self.zero_mean && k1 == 0 && k2 == 0 {
                continue;
            }
            let ksq = (k1 * k1 + k2 * k2) as f64;
            total += (1.0 + ksq).powf(s) * c.norm_sqr();
        }
        total.sqrt()
    }

    /// Squared physical L2 norm over the torus, A * sum_k |c(k)|^2 (Parseval).
    pub fn l2_norm_sq(&self) -> f64 {
        TORUS_AREA * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Largest asymmetry |c(-k) - conj(c(k))| over all modes.
    pub fn hermitian_defect(&self) -> f64 {
        let n = 2 * self.k_max + 1;
        let mut worst = 0.0_f64;
        for i1 in 0..n {
            for i2 in 0..n {
                let d = (self.coeffs[[n - 1 - i1, n - 1 - i2]] - self.coeffs[[i1, i2]].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Project onto the Hermitian (real-field) subspace by pair averaging.
    pub fn enforce_hermitian(&mut self) {
        let n = 2 * self.k_max + 1;
        for i1 in 0..n {
            for i2 in 0..n {
                let j1 = n - 1 - i1;
                let j2 = n - 1 - i2;
                if (i1, i2) <= (j1, j2) {
                    let a = self.coeffs[[i1, i2]];
                    let b = self.coeffs[[j1, j2]];
                    let avg = 0.5 * (a + b.conj());
                    self.coeffs[[i1, i2]] = avg;
                    self.coeffs[[j1, j2]] = avg.conj();
                }
            }
        }
    }

    /// Evaluate on the M x M physical grid (x_m = 2 pi m / M) via zero-padded
    /// inverse FFT. Requires fft.size() >= 2 k_max + 1.
    pub fn to_physical(&self, fft: &Fft2) -> Array2<f64> {
        let m = fft.size();
        assert!(m >= 2 * self.k_max + 1, "physical grid too small for truncation");
        let mut buf: Array2<Complex64> = Array2::zeros((m, m));
        let k = self.k_max as i64;
        for ((i1, i2), &c) in self.coeffs.indexed_iter() {
            let k1 = i1 as i64 - k;
            let k2 = i2 as i64 - k;
            let w1 = k1.rem_euclid(m as i64) as usize;
            let w2 = k2.rem_euclid(m as i64) as usize;
            buf[[w1, w2]] = c;
        }
        fft.inverse(&mut buf);
        buf.mapv(|z| z.re)
    }

    /// Truncated Fourier coefficients of physical samples on the M x M grid.
    pub fn from_physical(phys: &Array2<f64>, fft: &Fft2, k_max: usize) -> Self {
        let m = fft.size();
        assert_eq!(phys.dim(), (m, m));
        assert!(m >= 2 * k_max + 1);
        let mut buf: Array2<Complex64> = phys.mapv(|v| Complex64::new(v, 0.0));
        fft.forward(&mut buf);
        let scale = 1.0 / (m * m) as f64;
        let mut out = Self::zeros(k_max);
        let k = k_max as i64;
        for i1 in 0..(2 * k_max + 1) {
            for i2 in 0..(2 * k_max + 1) {
                let k1 = i1 as i64 - k;
                let k2 = i2 as i64 - k;
                let w1 = k1.rem_euclid(m as i64) as usize;
                let w2 = k2.rem_euclid(m as i64) as usize;
                out.coeffs[[i1, i2]] = buf[[w1, w2]] * scale;
            }
        }
        out
    }

    /// Random real field with smooth spectrum, zero mean, unit-scale coefficients.
    pub fn random_zero_mean(k_max: usize, rng: &mut impl Rng) -> Self {
        let mut f = Self::zeros(k_max);
        let k = k_max as i64;
        for i1 in 0..(2 * k_max + 1) {
            for i2 in 0..(2 * k_max + 1) {
                let k1 = i1 as i64 - k;
                let k2 = i2 as i64 - k;
                if k1 == 0 && k2 == 0 {
                    continue;
                }
                let ksq = (k1 * k1 + k2 * k2) as f64;
                let amp = (-ksq / (0.25 * (k_max * k_max) as f64 + 1.0)).exp();
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = rng.gen_range(-1.0..1.0);
                f.coeffs[[i1, i2]] = Complex64::new(re, im) * amp;
            }
        }
        f.enforce_hermitian();
        f.zero_mean = true;
        f
    }
}

/// Elementwise linear combination a * x + b * y.
pub fn lincomb(a: f64, x: &SpectralField2D, b: f64, y: &SpectralField2D) -> SpectralField2D {
    assert_eq!(x.k_max, y.k_max);
    let mut out = x.clone();
    out.coeffs.zip_mut_with(&y.coeffs, |cx, &cy| {
        *cx = a * *cx + b * cy;
    });
    out.zero_mean = x.zero_mean && y.zero_mean;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cosine_roundtrip() {
        // cos(x1) = (e^{i x1} + e^{-i x1}) / 2
        let mut f = SpectralField2D::zeros(4);
        f.set_coeff(1, 0, Complex64::new(0.5, 0.0));
        f.set_coeff(-1, 0, Complex64::new(0.5, 0.0));
        let fft = Fft2::new(16);
        let phys = f.to_physical(&fft);
        for i in 0..16 {
            let x = 2.0 * PI * i as f64 / 16.0;
            assert_relative_eq!(phys[[i, 5]], x.cos(), epsilon = 1e-12);
        }
        let back = SpectralField2D::from_physical(&phys, &fft, 4);
        assert!((back.coeff(1, 0) - f.coeff(1, 0)).norm() < 1e-13);
        assert!(back.coeff(2, 2).norm() < 1e-13);
    }

    #[test]
    fn sobolev_single_mode() {
        let mut f = SpectralField2D::zeros(3);
        f.set_coeff(1, 0, Complex64::new(1.0, 0.0));
        assert_relative_eq!(f.sobolev_norm(1.0), 2.0f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(f.sobolev_norm(0.0), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn random_field_is_hermitian_and_zero_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = SpectralField2D::random_zero_mean(6, &mut rng);
        assert!(f.hermitian_defect() < 1e-15);
        assert_eq!(f.mean(), Complex64::new(0.0, 0.0));
        // physical values should be essentially real
        let fft = Fft2::new(32);
        let phys = f.to_physical(&fft);
        assert!(phys.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn derivative_of_cosine() {
        let mut f = SpectralField2D::zeros(2);
        f.set_coeff(1, 0, Complex64::new(0.5, 0.0));
        f.set_coeff(-1, 0, Complex64::new(0.5, 0.0));
        let d = f.derivative(0);
        // d/dx1 cos(x1) = -sin(x1): coefficients -/+ i/2
        assert!((d.coeff(1, 0) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((d.coeff(-1, 0) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn parseval_matches_grid_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = SpectralField2D::random_zero_mean(5, &mut rng);
        let fft = Fft2::new(24);
        let phys = f.to_physical(&fft);
        let cell = TORUS_AREA / (24.0 * 24.0);
        let grid_l2: f64 = phys.iter().map(|v| v * v * cell).sum();
        assert_relative_eq!(grid_l2, f.l2_norm_sq(), max_relative = 1e-12);
    }
}
