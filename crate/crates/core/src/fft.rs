//! Thin 2D FFT layer over rustfft plus the dealiased grid-size rule.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Smallest 7-smooth integer >= 3 K + 1. A quadratic product of fields
/// truncated at |k|_inf <= K is alias-free on a grid of this size (the top
/// third of the spectrum stays empty).
pub fn dealias_size(k_max: usize) -> usize {
    let mut n = 3 * k_max + 1;
    loop {
        let mut m = n;
        for p in [2usize, 3, 5, 7] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

/// Planned complex 2D FFT of a fixed square size.
pub struct Fft2 {
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            size,
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
        }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    /// Unnormalized forward 2D DFT (kernel e^{-i k x}), in place.
    pub fn forward(&self, data: &mut Array2<Complex64>) {
        self.transform(data, &self.fwd);
    }

    /// Unnormalized inverse 2D DFT (kernel e^{+i k x}), in place.
    pub fn inverse(&self, data: &mut Array2<Complex64>) {
        self.transform(data, &self.inv);
    }

    fn transform(&self, data: &mut Array2<Complex64>, plan: &Arc<dyn Fft<f64>>) {
        let n = self.size;
        assert_eq!(data.dim(), (n, n), "Fft2 size mismatch");
        // rows are contiguous in standard layout
        let slice = data.as_slice_mut().expect("contiguous array");
        for row in slice.chunks_exact_mut(n) {
            plan.process(row);
        }
        // columns via gather/scatter
        let mut col = vec![Complex64::default(); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[[i, j]];
            }
            plan.process(&mut col);
            for i in 0..n {
                data[[i, j]] = col[i];
            }
        }
    }
}

/// Planned 1D FFT used by the 4D harness shear rotations.
pub struct Fft1 {
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft1 {
    pub fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            size,
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
        }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.size);
        self.fwd.process(buf);
    }

    #[inline]
    pub fn inverse(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.size);
        self.inv.process(buf);
    }
}
