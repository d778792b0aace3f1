//! 4D gyro-coordinate harness: the two-dimensional velocity counterpart of
//! the radial solver, used for the rotation-limit sweep and the radial
//! equivalence check.
//!
//! State is nodal on a 2D x-torus grid times a 2D Cartesian velocity grid.
//! Two stepping modes share the machinery:
//!   - rotation mode: (1/eps) angular transport split exactly (FFT shears),
//!     x-part applied as an exact modal factor (diffusion + the velocity-
//!     dependent drift phase), velocity terms with 4th-order stencils;
//!   - limit mode: no rotation, fixed potential advecting each velocity
//!     point's x-plane pseudo-spectrally.
//!
//! Rotation error budget: quarter turns are exact index permutations; the
//! residual angle uses three FFT shears, spectrally accurate for data that
//! decays below roundoff at the velocity boundary (the Gaussian envelopes
//! used here reach ~1e-15 at |u| = 6). Shear wrap-around and the Nyquist
//! phase contribute only at that boundary amplitude.

use crate::bessel::j0_raw;
use crate::distribution::GyroDistribution;
use crate::error::{Error, Result};
use crate::fft::{Fft1, Fft2};
use crate::field::{SpectralField2D, TORUS_AREA, TORUS_LENGTH};
use crate::grid::VelocityGrid;
use ndarray::{Array2, Array4, ArrayView2, ArrayViewMut2};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Scalar that can live on a velocity plane (real nodal or complex modal).
pub trait PlaneScalar:
    Copy
    + Default
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::AddAssign
    + std::ops::Mul<f64, Output = Self>
{
    fn to_complex(self) -> Complex64;
    fn from_complex(c: Complex64) -> Self;
}

impl PlaneScalar for f64 {
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_complex(c: Complex64) -> Self {
        c.re
    }
}

impl PlaneScalar for Complex64 {
    fn to_complex(self) -> Complex64 {
        self
    }
    fn from_complex(c: Complex64) -> Self {
        c
    }
}

/// Parameters of the 4D harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnessParams {
    /// x grid points per side.
    pub nx: usize,
    /// velocity grid points per side.
    pub nv: usize,
    /// velocity domain [-u_span, u_span]^2.
    pub u_span: f64,
    pub nu: f64,
    pub beta: f64,
}

impl HarnessParams {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 4 || self.nv < 12 {
            return Err(Error::Config("harness grid too small (nx >= 4, nv >= 12)".into()));
        }
        if !(self.u_span.is_finite() && self.u_span > 0.0) {
            return Err(Error::Config("u_span must be positive".into()));
        }
        if !(self.nu.is_finite() && self.nu >= 0.0 && self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::Config("nu and beta must be nonnegative".into()));
        }
        Ok(())
    }

    /// Velocity node coordinate (cell-centered, symmetric about 0).
    #[inline]
    pub fn v_node(&self, i: usize) -> f64 {
        let dv = self.dv();
        -self.u_span + (i as f64 + 0.5) * dv
    }

    #[inline]
    pub fn dv(&self) -> f64 {
        2.0 * self.u_span / self.nv as f64
    }

    /// Phase-space cell volume (x cell times velocity cell).
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        let dx = TORUS_LENGTH / self.nx as f64;
        dx * dx * self.dv() * self.dv()
    }
}

/// Nodal 4D state f(x1, x2, v1, v2).
#[derive(Debug, Clone)]
pub struct Gyro4DState {
    pub f: Array4<f64>,
    pub time: f64,
    /// Rotation parameter; None disables the angular transport (limit form).
    pub epsilon: Option<f64>,
    pub params: HarnessParams,
}

impl Gyro4DState {
    pub fn new(params: HarnessParams, epsilon: Option<f64>) -> Result<Self> {
        params.validate()?;
        if let Some(e) = epsilon {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::Config(format!("epsilon must be positive, got {e}")));
            }
        }
        Ok(Self {
            f: Array4::zeros((params.nx, params.nx, params.nv, params.nv)),
            time: 0.0,
            epsilon,
            params,
        })
    }

    /// Fill from a separable shape: f = xfun(x1, x2) * vfun(v1, v2).
    pub fn fill(&mut self, mut value: impl FnMut(f64, f64, f64, f64) -> f64) {
        let p = self.params;
        let dx = TORUS_LENGTH / p.nx as f64;
        for m1 in 0..p.nx {
            for m2 in 0..p.nx {
                let x1 = m1 as f64 * dx;
                let x2 = m2 as f64 * dx;
                for i in 0..p.nv {
                    for j in 0..p.nv {
                        self.f[[m1, m2, i, j]] = value(x1, x2, p.v_node(i), p.v_node(j));
                    }
                }
            }
        }
    }

    /// Total phase-space integral of f.
    pub fn mass(&self) -> f64 {
        self.f.sum() * self.params.cell_volume()
    }
}

// ---------------------------------------------------------------------------
// rotation by FFT shears
// ---------------------------------------------------------------------------

/// Precomputed shear phases for one rotation angle on an nv x nv plane.
pub struct RotationPlan {
    quarter_turns: usize,
    /// phase1[[row j, mode m]] for the v1-shear (per v2 row)
    phase1: Array2<Complex64>,
    /// phase2[[row i, mode m]] for the v2-shear (per v1 row)
    phase2: Array2<Complex64>,
    nv: usize,
}

impl RotationPlan {
    pub fn new(params: &HarnessParams, theta: f64) -> Self {
        let nv = params.nv;
        let tau = 2.0 * PI;
        // reduce to a quarter-turn count and a residual in [-pi/4, pi/4]
        let wrapped = theta.rem_euclid(tau);
        let q = (wrapped / (0.5 * PI)).round() as i64;
        let residual = wrapped - q as f64 * 0.5 * PI;
        let quarter_turns = q.rem_euclid(4) as usize;

        let l = 2.0 * params.u_span;
        let a = -(0.5 * residual).tan();
        let b = residual.sin();
        let phase_row = |shift: f64| -> Vec<Complex64> {
            (0..nv)
                .map(|m| {
                    let m_signed = if m <= nv / 2 { m as i64 } else { m as i64 - nv as i64 };
                    let arg = -tau * m_signed as f64 * shift / l;
                    Complex64::new(arg.cos(), arg.sin())
                })
                .collect()
        };
        let mut phase1 = Array2::default((nv, nv));
        let mut phase2 = Array2::default((nv, nv));
        for r in 0..nv {
            let v = params.v_node(r);
            for (m, &p) in phase_row(a * v).iter().enumerate() {
                phase1[[r, m]] = p;
            }
            for (m, &p) in phase_row(b * v).iter().enumerate() {
                phase2[[r, m]] = p;
            }
        }
        Self {
            quarter_turns,
            phase1,
            phase2,
            nv,
        }
    }

    /// Rotate one velocity plane counterclockwise by the planned angle.
    pub fn rotate_plane(&self, plane: &mut Array2<Complex64>, fft: &Fft1, scratch: &mut Vec<Complex64>) {
        let nv = self.nv;
        debug_assert_eq!(plane.dim(), (nv, nv));
        for _ in 0..self.quarter_turns {
            quarter_turn(plane, scratch);
        }
        // shear1: shift along v1 (columns) per v2 row j
        self.shear_axis0(plane, fft, scratch);
        // shear2: shift along v2 (contiguous rows) per v1 row i
        self.shear_axis1(plane, fft, scratch);
        // shear1 again
        self.shear_axis0(plane, fft, scratch);
    }

    fn shear_axis0(&self, plane: &mut Array2<Complex64>, fft: &Fft1, scratch: &mut Vec<Complex64>) {
        let nv = self.nv;
        scratch.resize(nv, Complex64::default());
        let inv = 1.0 / nv as f64;
        for j in 0..nv {
            for i in 0..nv {
                scratch[i] = plane[[i, j]];
            }
            fft.forward(scratch);
            for (m, s) in scratch.iter_mut().enumerate() {
                *s *= self.phase1[[j, m]];
            }
            fft.inverse(scratch);
            for i in 0..nv {
                plane[[i, j]] = scratch[i] * inv;
            }
        }
    }

    fn shear_axis1(&self, plane: &mut Array2<Complex64>, fft: &Fft1, scratch: &mut Vec<Complex64>) {
        let nv = self.nv;
        scratch.resize(nv, Complex64::default());
        let inv = 1.0 / nv as f64;
        for i in 0..nv {
            for j in 0..nv {
                scratch[j] = plane[[i, j]];
            }
            fft.forward(scratch);
            for (m, s) in scratch.iter_mut().enumerate() {
                *s *= self.phase2[[i, m]];
            }
            fft.inverse(scratch);
            for (j, s) in scratch.iter().enumerate() {
                plane[[i, j]] = *s * inv;
            }
        }
    }
}

/// Exact +90 degree rotation: new[i][j] = old[j][nv-1-i].
fn quarter_turn(plane: &mut Array2<Complex64>, scratch: &mut Vec<Complex64>) {
    let nv = plane.dim().0;
    scratch.clear();
    scratch.extend(plane.iter().copied());
    for i in 0..nv {
        for j in 0..nv {
            plane[[i, j]] = scratch[j * nv + (nv - 1 - i)];
        }
    }
}

// ---------------------------------------------------------------------------
// velocity-space stencils (4th order, zero beyond the boundary)
// ---------------------------------------------------------------------------

/// rhs = nu * Laplacian(f) + beta * div(u f), 4th-order central differences.
/// Values outside the plane are treated as zero; the stencil coefficient sums
/// make the interior exactly conservative, so mass leaks only through the
/// (negligible) boundary amplitudes.
pub fn velocity_rhs_plane<T: PlaneScalar>(
    src: &ArrayView2<T>,
    dst: &mut ArrayViewMut2<T>,
    params: &HarnessParams,
) {
    let nv = params.nv;
    let dv = params.dv();
    let c_lap = params.nu / (12.0 * dv * dv);
    let c_div = params.beta / (12.0 * dv);
    let at = |i: i64, j: i64| -> T {
        if i < 0 || j < 0 || i >= nv as i64 || j >= nv as i64 {
            T::default()
        } else {
            src[[i as usize, j as usize]]
        }
    };
    let vat = |i: i64| -> f64 {
        if i < 0 || i >= nv as i64 {
            // consistent with zero-padded samples; value is irrelevant there
            0.0
        } else {
            params.v_node(i as usize)
        }
    };
    for i in 0..nv as i64 {
        let v1 = params.v_node(i as usize);
        for j in 0..nv as i64 {
            let v2 = params.v_node(j as usize);
            let center = at(i, j);
            // Laplacian, both axes
            let lap = (at(i - 2, j) + at(i + 2, j) + at(i, j - 2) + at(i, j + 2)) * (-1.0)
                + (at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1)) * 16.0
                + center * (-60.0);
            // div(u f) = d1(v1 f) + d2(v2 f)
            let d1 = at(i - 2, j) * vat(i - 2) - at(i - 1, j) * (8.0 * vat(i - 1))
                + at(i + 1, j) * (8.0 * vat(i + 1))
                - at(i + 2, j) * vat(i + 2);
            let d2 = at(i, j - 2) * vat(j - 2) - at(i, j - 1) * (8.0 * vat(j - 1))
                + at(i, j + 1) * (8.0 * vat(j + 1))
                - at(i, j + 2) * vat(j + 2);
            let _ = (v1, v2);
            dst[[i as usize, j as usize]] = lap * c_lap + (d1 + d2) * c_div;
        }
    }
}

// ---------------------------------------------------------------------------
// polar sampling
// ---------------------------------------------------------------------------

fn lagrange6(frac: f64) -> [f64; 6] {
    // nodes at offsets 0..5, evaluation point at 2 + frac
    let x = 2.0 + frac;
    let mut w = [0.0; 6];
    for (m, wm) in w.iter_mut().enumerate() {
        let mut p = 1.0;
        for nn in 0..6 {
            if nn != m {
                p *= (x - nn as f64) / (m as f64 - nn as f64);
            }
        }
        *wm = p;
    }
    w
}

/// Interpolate a plane at velocity-space point (p1, p2) with a separable
/// 6-point Lagrange stencil; out-of-range samples count as zero.
pub fn sample_plane<T: PlaneScalar>(plane: &ArrayView2<T>, params: &HarnessParams, p1: f64, p2: f64) -> T {
    let nv = params.nv as i64;
    let dv = params.dv();
    let s1 = (p1 + params.u_span) / dv - 0.5;
    let s2 = (p2 + params.u_span) / dv - 0.5;
    let base1 = s1.floor() as i64 - 2;
    let base2 = s2.floor() as i64 - 2;
    let w1 = lagrange6(s1 - (base1 + 2) as f64);
    let w2 = lagrange6(s2 - (base2 + 2) as f64);
    let mut acc = T::default();
    for (m, &wa) in w1.iter().enumerate() {
        let i = base1 + m as i64;
        if i < 0 || i >= nv {
            continue;
        }
        for (nn, &wb) in w2.iter().enumerate() {
            let j = base2 + nn as i64;
            if j < 0 || j >= nv {
                continue;
            }
            acc += plane[[i as usize, j as usize]] * (wa * wb);
        }
    }
    acc
}

/// Angular harmonics of one plane at the requested radii:
/// out[[h, j]] = (1/2pi) int f(u_j e^{i phi}) e^{-i ell_h phi} d phi,
/// trapezoid over n_angles uniform angles.
pub fn plane_harmonics<T: PlaneScalar>(
    plane: &ArrayView2<T>,
    params: &HarnessParams,
    radii: &[f64],
    ells: &[i64],
    n_angles: usize,
) -> Array2<Complex64> {
    let mut out = Array2::default((ells.len(), radii.len()));
    for (jr, &r) in radii.iter().enumerate() {
        for a in 0..n_angles {
            let phi = 2.0 * PI * a as f64 / n_angles as f64;
            let v = sample_plane(plane, params, r * phi.cos(), r * phi.sin()).to_complex();
            for (h, &ell) in ells.iter().enumerate() {
                let arg = -(ell as f64) * phi;
                out[[h, jr]] += v * Complex64::new(arg.cos(), arg.sin());
            }
        }
    }
    out.mapv_inplace(|c| c / n_angles as f64);
    out
}

// ---------------------------------------------------------------------------
// integrator
// ---------------------------------------------------------------------------

/// Fixed-potential advection data for the limit-form run.
pub struct FrozenDrift {
    /// nodal (v1_index * nv + v2_index) -> (v_x1 field, v_x2 field) on the x grid
    fields: Vec<(Array2<f64>, Array2<f64>)>,
}

/// Time stepper wrapping a 4D state.
pub struct Harness4D {
    pub state: Gyro4DState,
    fft_x: Fft2,
    fft_v: Fft1,
    rotation: Option<(f64, RotationPlan)>,
    drift: Option<FrozenDrift>,
    scratch_v: Vec<Complex64>,
    plane_c: Array2<Complex64>,
    xbuf: Array2<Complex64>,
    xbuf2: Array2<Complex64>,
    xbuf3: Array2<Complex64>,
}

impl Harness4D {
    pub fn new(state: Gyro4DState) -> Result<Self> {
        state.params.validate()?;
        let nx = state.params.nx;
        let nv = state.params.nv;
        Ok(Self {
            state,
            fft_x: Fft2::new(nx),
            fft_v: Fft1::new(nv),
            rotation: None,
            drift: None,
            scratch_v: Vec::new(),
            plane_c: Array2::default((nv, nv)),
            xbuf: Array2::default((nx, nx)),
            xbuf2: Array2::default((nx, nx)),
            xbuf3: Array2::default((nx, nx)),
        })
    }

    /// Install a fixed potential for the limit-form run: the advecting field
    /// per velocity node is (J0_{|u|} grad Phi)^perp, evaluated once.
    pub fn set_potential(&mut self, phi: &SpectralField2D) -> Result<()> {
        let p = self.state.params;
        if 2 * phi.k_max() + 1 > p.nx {
            return Err(Error::Shape("potential truncation exceeds harness x grid".into()));
        }
        let mut fields = Vec::with_capacity(p.nv * p.nv);
        for i in 0..p.nv {
            for j in 0..p.nv {
                let u = (p.v_node(i).powi(2) + p.v_node(j).powi(2)).sqrt();
                let mut c1: Array2<Complex64> = Array2::default((p.nx, p.nx));
                let mut c2: Array2<Complex64> = Array2::default((p.nx, p.nx));
                for (k1, k2, c) in phi.iter_modes() {
                    if c == Complex64::default() {
                        continue;
                    }
                    let jv = j0_raw(((k1 * k1 + k2 * k2) as f64).sqrt() * u);
                    let w1 = k1.rem_euclid(p.nx as i64) as usize;
                    let w2 = k2.rem_euclid(p.nx as i64) as usize;
                    c1[[w1, w2]] = c * Complex64::new(0.0, -(k2 as f64)) * jv;
                    c2[[w1, w2]] = c * Complex64::new(0.0, k1 as f64) * jv;
                }
                self.fft_x.inverse(&mut c1);
                self.fft_x.inverse(&mut c2);
                fields.push((c1.mapv(|z| z.re), c2.mapv(|z| z.re)));
            }
        }
        self.drift = Some(FrozenDrift { fields });
        Ok(())
    }

    fn rotation_plan(&mut self, theta: f64) {
        let rebuild = match &self.rotation {
            Some((t, _)) => *t != theta,
            None => true,
        };
        if rebuild {
            self.rotation = Some((theta, RotationPlan::new(&self.state.params, theta)));
        }
    }

    /// Rotate every velocity plane by theta (counterclockwise).
    pub fn rotate(&mut self, theta: f64) {
        self.rotation_plan(theta);
        let (_, plan) = self.rotation.as_ref().expect("plan built");
        let p = self.state.params;
        for m1 in 0..p.nx {
            for m2 in 0..p.nx {
                for i in 0..p.nv {
                    for j in 0..p.nv {
                        self.plane_c[[i, j]] = Complex64::new(self.state.f[[m1, m2, i, j]], 0.0);
                    }
                }
                plan.rotate_plane(&mut self.plane_c, &self.fft_v, &mut self.scratch_v);
                for i in 0..p.nv {
                    for j in 0..p.nv {
                        self.state.f[[m1, m2, i, j]] = self.plane_c[[i, j]].re;
                    }
                }
            }
        }
    }

    /// Exact x-space factor over time tau: diffusion e^{-nu |k|^2 tau} and,
    /// in rotation mode, the velocity-dependent drift phase
    /// e^{i beta (v1 k2 - v2 k1) tau}.
    fn x_factor(&mut self, tau: f64, with_drift_phase: bool) {
        let p = self.state.params;
        let nx = p.nx as i64;
        let scale = 1.0 / (p.nx * p.nx) as f64;
        for i in 0..p.nv {
            for j in 0..p.nv {
                let v1 = p.v_node(i);
                let v2 = p.v_node(j);
                for m1 in 0..p.nx {
                    for m2 in 0..p.nx {
                        self.xbuf[[m1, m2]] = Complex64::new(self.state.f[[m1, m2, i, j]], 0.0);
                    }
                }
                self.fft_x.forward(&mut self.xbuf);
                for q1 in 0..p.nx {
                    let k1 = if q1 as i64 <= nx / 2 { q1 as i64 } else { q1 as i64 - nx };
                    for q2 in 0..p.nx {
                        let k2 = if q2 as i64 <= nx / 2 { q2 as i64 } else { q2 as i64 - nx };
                        let decay = (-p.nu * ((k1 * k1 + k2 * k2) as f64) * tau).exp();
                        let mut f = Complex64::new(decay, 0.0);
                        if with_drift_phase {
                            let arg = p.beta * (v1 * k2 as f64 - v2 * k1 as f64) * tau;
                            f *= Complex64::new(arg.cos(), arg.sin());
                        }
                        self.xbuf[[q1, q2]] *= f;
                    }
                }
                self.fft_x.inverse(&mut self.xbuf);
                for m1 in 0..p.nx {
                    for m2 in 0..p.nx {
                        self.state.f[[m1, m2, i, j]] = self.xbuf[[m1, m2]].re * scale;
                    }
                }
            }
        }
    }

    /// Velocity-space rhs over the whole state (4th-order stencils) plus,
    /// in limit mode, the frozen-potential x-advection.
    fn full_rhs(&mut self, src: &Array4<f64>, dst: &mut Array4<f64>) {
        let p = self.state.params;
        // velocity terms per x point
        for m1 in 0..p.nx {
            for m2 in 0..p.nx {
                let sview = src.index_axis(ndarray::Axis(0), m1);
                let sview = sview.index_axis(ndarray::Axis(0), m2);
                let mut dview = dst.index_axis_mut(ndarray::Axis(0), m1);
                let mut dview = dview.index_axis_mut(ndarray::Axis(0), m2);
                velocity_rhs_plane(&sview, &mut dview, &p);
            }
        }
        // advection per velocity point
        if let Some(drift) = &self.drift {
            let nx = p.nx as i64;
            let scale = 1.0 / (p.nx * p.nx) as f64;
            for i in 0..p.nv {
                for j in 0..p.nv {
                    for m1 in 0..p.nx {
                        for m2 in 0..p.nx {
                            self.xbuf[[m1, m2]] = Complex64::new(src[[m1, m2, i, j]], 0.0);
                        }
                    }
                    self.fft_x.forward(&mut self.xbuf);
                    for q1 in 0..p.nx {
                        let k1 = if q1 as i64 <= nx / 2 { q1 as i64 } else { q1 as i64 - nx };
                        for q2 in 0..p.nx {
                            let k2 = if q2 as i64 <= nx / 2 { q2 as i64 } else { q2 as i64 - nx };
                            let c = self.xbuf[[q1, q2]];
                            self.xbuf2[[q1, q2]] = c * Complex64::new(0.0, k1 as f64);
                            self.xbuf3[[q1, q2]] = c * Complex64::new(0.0, k2 as f64);
                        }
                    }
                    self.fft_x.inverse(&mut self.xbuf2);
                    self.fft_x.inverse(&mut self.xbuf3);
                    let (v1f, v2f) = &drift.fields[i * p.nv + j];
                    for m1 in 0..p.nx {
                        for m2 in 0..p.nx {
                            let adv = -(v1f[[m1, m2]] * self.xbuf2[[m1, m2]].re
                                + v2f[[m1, m2]] * self.xbuf3[[m1, m2]].re)
                                * scale;
                            dst[[m1, m2, i, j]] += adv;
                        }
                    }
                }
            }
        }
    }

    fn rk2_velocity(&mut self, dt: f64) {
        let f0 = self.state.f.clone();
        let mut k1 = Array4::zeros(f0.raw_dim());
        self.full_rhs(&f0, &mut k1);
        let mid = &f0 + &(&k1 * (0.5 * dt));
        let mut k2 = Array4::zeros(f0.raw_dim());
        self.full_rhs(&mid, &mut k2);
        self.state.f = &f0 + &(&k2 * dt);
    }

    /// One Strang step. In rotation mode dt should satisfy dt <= 0.1 eps so
    /// the split commutator stays small (the rotation itself is exact).
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        match self.state.epsilon {
            Some(eps) => {
                if dt > 0.1 * eps * (1.0 + 1e-12) {
                    return Err(Error::StepRejected { dt, limit: 0.1 * eps });
                }
                let theta = 0.5 * dt / eps;
                self.rotate(theta);
                self.x_factor(0.5 * dt, true);
                self.rk2_velocity(dt);
                self.x_factor(0.5 * dt, true);
                self.rotate(theta);
            }
            None => {
                self.x_factor(0.5 * dt, false);
                self.rk2_velocity(dt);
                self.x_factor(0.5 * dt, false);
            }
        }
        if !self.state.f.iter().all(|v| v.is_finite()) {
            return Err(Error::BlowUp { t: self.state.time });
        }
        self.state.time += dt;
        Ok(())
    }
}

/// One explicit 4D step (constructs a fresh stepper; tests and small drivers).
pub fn step_4d(state: Gyro4DState, dt: f64) -> Result<Gyro4DState> {
    let mut h = Harness4D::new(state)?;
    h.step(dt)?;
    Ok(h.state)
}

/// Gyro-average of the 4D state onto a radial grid, as a distribution that is
/// modal in x: out(k, u_j) = x-FFT of the per-x angular mean.
pub fn angular_average(
    state: &Gyro4DState,
    grid: Arc<VelocityGrid>,
    k_max: usize,
    n_angles: usize,
) -> Result<GyroDistribution> {
    let p = state.params;
    if 2 * k_max + 1 > p.nx {
        return Err(Error::Shape("target truncation exceeds harness x grid".into()));
    }
    if grid.u_max() > p.u_span {
        return Err(Error::Config("radial grid extends beyond the harness velocity box".into()));
    }
    let fft = Fft2::new(p.nx);
    let radii: Vec<f64> = grid.nodes().to_vec();
    let n_u = grid.len();
    let mut out = GyroDistribution::zeros(k_max, grid);
    // nodal angular means per radius
    let mut nodal = vec![Array2::<f64>::zeros((p.nx, p.nx)); n_u];
    for m1 in 0..p.nx {
        for m2 in 0..p.nx {
            let plane = state.f.index_axis(ndarray::Axis(0), m1);
            let plane = plane.index_axis(ndarray::Axis(0), m2);
            let h = plane_harmonics(&plane, &p, &radii, &[0], n_angles);
            for j in 0..n_u {
                nodal[j][[m1, m2]] = h[[0, j]].re;
            }
        }
    }
    let kc = k_max as i64;
    for (j, field) in nodal.iter().enumerate() {
        let mut buf = field.mapv(|v| Complex64::new(v, 0.0));
        fft.forward(&mut buf);
        let scale = 1.0 / (p.nx * p.nx) as f64;
        for i1 in 0..(2 * k_max + 1) {
            let k1 = i1 as i64 - kc;
            let w1 = k1.rem_euclid(p.nx as i64) as usize;
            for i2 in 0..(2 * k_max + 1) {
                let k2 = i2 as i64 - kc;
                let w2 = k2.rem_euclid(p.nx as i64) as usize;
                out.set_coeff(k1, k2, j, buf[[w1, w2]] * scale);
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// field-free sweep on active x-modes
// ---------------------------------------------------------------------------

/// Initial data for the sweep, built from smooth Cartesian polynomials times
/// a Gaussian envelope so every angular harmonic is grid-smooth:
///   f = e^{-|u|^2 / width^2} [1 + a1 v1 + a2 (v1^2 - v2^2)] [1 + ax cos x1].
#[derive(Debug, Clone, Copy)]
pub struct SweepInitial {
    pub width: f64,
    /// ell = 1 content (coefficient of v1).
    pub a1: f64,
    /// ell = 2 content (coefficient of v1^2 - v2^2).
    pub a2: f64,
    /// x-mode content (coefficient of cos x1).
    pub ax: f64,
}

impl Default for SweepInitial {
    fn default() -> Self {
        // ell = 2 gyro-content plus an x mode: the angular transport then
        // generates the ell = 1 harmonic at O(eps) with no O(1) background,
        // which is what the sweep measures.
        Self {
            width: 1.0,
            a1: 0.0,
            a2: 0.3,
            ax: 0.5,
        }
    }
}

impl SweepInitial {
    fn envelope(&self, v1: f64, v2: f64) -> f64 {
        let r2 = (v1 * v1 + v2 * v2) / (self.width * self.width);
        (-r2).exp() * (1.0 + self.a1 * v1 + self.a2 * (v1 * v1 - v2 * v2))
    }

    /// Nodal 4D state with this shape.
    pub fn build_state(&self, params: HarnessParams, epsilon: Option<f64>) -> Result<Gyro4DState> {
        let mut state = Gyro4DState::new(params, epsilon)?;
        let ax = self.ax;
        state.fill(|x1, _x2, v1, v2| self.envelope(v1, v2) * (1.0 + ax * x1.cos()));
        Ok(state)
    }

    /// Radial angular mean of the initial shape (the ell = 0 part).
    pub fn radial_mean(&self, u: f64) -> f64 {
        (-(u * u) / (self.width * self.width)).exp()
    }
}

/// Per-epsilon sweep measurements.
#[derive(Debug, Clone)]
pub struct SweepCase {
    pub epsilon: f64,
    pub steps: usize,
    /// || angular mean - limit solution ||_{2,u} at t_end.
    pub e_norm: f64,
    /// Norm of the ell = 1 angular harmonic at t_end.
    pub ell1_norm: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub t_end: f64,
    pub cases: Vec<SweepCase>,
    pub e_monotone: bool,
    pub ell1_monotone: bool,
}

impl SweepReport {
    pub fn render(&self) -> String {
        let mut out = format!("epsilon sweep to t = {}\n", self.t_end);
        out.push_str("epsilon     steps    e(eps)          ell1(eps)\n");
        for c in &self.cases {
            out.push_str(&format!(
                "{:<11.4} {:<8} {:<15.8e} {:<15.8e}\n",
                c.epsilon, c.steps, c.e_norm, c.ell1_norm
            ));
        }
        out.push_str(&format!(
            "e(eps) non-increasing (10% slack): {}\nell=1 harmonic decreasing: {}\n",
            if self.e_monotone { "yes" } else { "NO" },
            if self.ell1_monotone { "yes" } else { "NO" }
        ));
        out
    }
}

/// Specification of a sweep run.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub epsilons: Vec<f64>,
    pub params: HarnessParams,
    pub t_end: f64,
    pub initial: SweepInitial,
    /// Radial grid for measurements and the limit run.
    pub n_u: usize,
    pub u_max: f64,
    pub k_max_1d: usize,
    pub limit_dt: f64,
    pub n_angles: usize,
}

impl SweepSpec {
    /// Desk-scale defaults on the given harness grid. t_end is two rotation
    /// periods of the largest epsilon in the canonical {0.2, 0.1, 0.05} set,
    /// which is a whole number of turns for all three so the measured
    /// harmonics are phase-aligned across the sweep.
    pub fn desk(params: HarnessParams, epsilons: Vec<f64>) -> Self {
        Self {
            epsilons,
            params,
            t_end: 0.8 * PI,
            initial: SweepInitial::default(),
            n_u: 768,
            u_max: 0.9 * params.u_span,
            k_max_1d: (params.nx - 2) / 3,
            limit_dt: 0.01,
            n_angles: 512,
        }
    }
}

/// Internal modal-plane runner for the field-free rotation mode. The x modes
/// never couple (the equation has constant-in-x coefficients), so only planes
/// that are nonzero at t = 0 are stepped; this is bit-identical to stepping
/// the dense state.
struct ModalPlaneRunner {
    params: HarnessParams,
    epsilon: f64,
    /// active x-modes: (k1, k2) and their velocity plane
    planes: Vec<((i64, i64), Array2<Complex64>)>,
    fft_v: Fft1,
}

impl ModalPlaneRunner {
    fn new(params: HarnessParams, epsilon: f64, initial: &SweepInitial) -> Self {
        let nv = params.nv;
        let mut base = Array2::default((nv, nv));
        for i in 0..nv {
            for j in 0..nv {
                base[[i, j]] = Complex64::new(initial.envelope(params.v_node(i), params.v_node(j)), 0.0);
            }
        }
        let mut planes = vec![((0i64, 0i64), base.clone())];
        if initial.ax != 0.0 {
            let half = base.mapv(|c| c * (0.5 * initial.ax));
            planes.push(((1, 0), half.clone()));
            planes.push(((-1, 0), half));
        }
        Self {
            params,
            epsilon,
            planes,
            fft_v: Fft1::new(nv),
        }
    }

    fn run(&mut self, t_end: f64) -> usize {
        let dt_cap = 0.1 * self.epsilon;
        let steps = (t_end / dt_cap).ceil() as usize;
        let dt = t_end / steps as f64;
        let theta = 0.5 * dt / self.epsilon;
        let plan = RotationPlan::new(&self.params, theta);
        let p = self.params;
        let mut scratch = Vec::new();
        let mut rhs1: Array2<Complex64> = Array2::default((p.nv, p.nv));
        let mut rhs2: Array2<Complex64> = Array2::default((p.nv, p.nv));

        // per-plane x factor over dt/2
        let factors: Vec<Array2<Complex64>> = self
            .planes
            .iter()
            .map(|((k1, k2), _)| {
                let tau = 0.5 * dt;
                let ksq = (k1 * k1 + k2 * k2) as f64;
                let decay = (-p.nu * ksq * tau).exp();
                Array2::from_shape_fn((p.nv, p.nv), |(i, j)| {
                    let arg = p.beta * (p.v_node(i) * *k2 as f64 - p.v_node(j) * *k1 as f64) * tau;
                    Complex64::new(arg.cos(), arg.sin()) * decay
                })
            })
            .collect();

        for _ in 0..steps {
            for (idx, (_, plane)) in self.planes.iter_mut().enumerate() {
                plan.rotate_plane(plane, &self.fft_v, &mut scratch);
                plane.zip_mut_with(&factors[idx], |c, &f| *c *= f);
                // RK2 velocity terms
                {
                    let src = plane.view();
                    velocity_rhs_plane(&src, &mut rhs1.view_mut(), &p);
                }
                let mid = &*plane + &(&rhs1 * (0.5 * dt));
                velocity_rhs_plane(&mid.view(), &mut rhs2.view_mut(), &p);
                plane.zip_mut_with(&rhs2, |c, &r| *c += r * dt);
                plane.zip_mut_with(&factors[idx], |c, &f| *c *= f);
                plan.rotate_plane(plane, &self.fft_v, &mut scratch);
            }
        }
        steps
    }
}

/// Run the sweep: for each epsilon, evolve the rotation-form harness, then
/// compare the angular mean against the limit-model solution from the radial
/// solver with the potential forced to zero, and record the ell = 1 harmonic.
pub fn epsilon_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    use crate::solver::{PhysicalParams, PotentialMode, Solver};

    spec.params.validate()?;
    if spec.epsilons.is_empty() {
        return Err(Error::Config("epsilon list is empty".into()));
    }
    let grid = Arc::new(VelocityGrid::new(spec.n_u, spec.u_max)?);

    // limit solution from the radial solver, zero potential
    let limit_params = PhysicalParams {
        nu: spec.params.nu,
        beta: spec.params.beta,
        temperature: 1.0,
        k_max: spec.k_max_1d,
        n_u: spec.n_u,
        u_max: spec.u_max,
    };
    let mut field = SpectralField2D::zeros(spec.k_max_1d);
    field.set_coeff(0, 0, Complex64::new(1.0, 0.0));
    if spec.initial.ax != 0.0 {
        field.set_coeff(1, 0, Complex64::new(0.5 * spec.initial.ax, 0.0));
        field.set_coeff(-1, 0, Complex64::new(0.5 * spec.initial.ax, 0.0));
    }
    let profile: Vec<f64> = grid.nodes().iter().map(|&u| spec.initial.radial_mean(u)).collect();
    let f0 = GyroDistribution::separable(&field, &profile, grid.clone())?;
    let mut limit = Solver::new(f0, limit_params, PotentialMode::Zero)?;
    limit.dt_max = spec.limit_dt;
    let n_steps = (spec.t_end / spec.limit_dt).ceil() as usize;
    let dt = spec.t_end / n_steps as f64;
    for _ in 0..n_steps {
        limit.step(dt)?;
    }
    let f_limit = limit.state().f.clone();

    let ells = [0i64, 1];
    let mut cases = Vec::new();
    for &eps in &spec.epsilons {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {eps}")));
        }
        let mut runner = ModalPlaneRunner::new(spec.params, eps, &spec.initial);
        let steps = runner.run(spec.t_end);

        // harmonics per active plane
        let mut avg = GyroDistribution::zeros(spec.k_max_1d, grid.clone());
        let mut ell1_sq = 0.0;
        for ((k1, k2), plane) in &runner.planes {
            let h = plane_harmonics(&plane.view(), &spec.params, grid.nodes(), &ells, spec.n_angles);
            for j in 0..spec.n_u {
                avg.set_coeff(*k1, *k2, j, h[[0, j]]);
            }
            let w = grid.weights();
            for j in 0..spec.n_u {
                ell1_sq += w[j] * TORUS_AREA * h[[1, j]].norm_sqr();
            }
        }
        let diff = crate::distribution::dist_lincomb(1.0, &avg, -1.0, &f_limit);
        let e_norm = diff.weighted_l2_norm(crate::grid::WeightKind::U);
        cases.push(SweepCase {
            epsilon: eps,
            steps,
            e_norm,
            ell1_norm: ell1_sq.sqrt(),
        });
    }

    // order by decreasing epsilon for the monotonicity verdicts
    let mut ordered: Vec<&SweepCase> = cases.iter().collect();
    ordered.sort_by(|a, b| b.epsilon.partial_cmp(&a.epsilon).expect("finite"));
    let e_monotone = ordered.windows(2).all(|w| w[1].e_norm <= w[0].e_norm * 1.10);
    let ell1_monotone = ordered.windows(2).all(|w| w[1].ell1_norm < w[0].ell1_norm);

    Ok(SweepReport {
        t_end: spec.t_end,
        cases,
        e_monotone,
        ell1_monotone,
    })
}
