//! Time integration: Strang splitting of the stiff radial operator around an
//! integrating-factor SSP-RK2 step for dealiased pseudo-spectral advection
//! with exact modal x-diffusion.

use crate::distribution::{dist_lincomb, GyroDistribution};
use crate::error::{Error, Result};
use crate::fft::{dealias_size, Fft2};
use crate::field::{SpectralField2D, TORUS_LENGTH};
use crate::grid::VelocityGrid;
use crate::multiplier::MultiplierTable;
use crate::operator::{build_u_operator, TrapezoidalStep, UOperator};
use ndarray::Array2;
use num_complex::Complex64;
use std::sync::Arc;

/// Physical and truncation parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Collisional diffusivity.
    pub nu: f64,
    /// Drift coefficient.
    pub beta: f64,
    /// Ion temperature entering the electroneutrality closure.
    pub temperature: f64,
    /// Fourier truncation: modes |k_i| <= k_max.
    pub k_max: usize,
    /// Radial node count.
    pub n_u: usize,
    /// Radial domain cutoff.
    pub u_max: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return Err(Error::Config(format!("nu must be nonnegative, got {}", self.nu)));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::Config(format!("beta must be nonnegative, got {}", self.beta)));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::Config(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if self.k_max == 0 {
            return Err(Error::Config("k_max must be at least 1".into()));
        }
        if self.n_u < 3 {
            return Err(Error::Config("n_u must be at least 3".into()));
        }
        if !(self.u_max.is_finite() && self.u_max > 0.0) {
            return Err(Error::Config(format!("u_max must be positive, got {}", self.u_max)));
        }
        Ok(())
    }
}

/// How the potential entering the drift is obtained.
#[derive(Debug, Clone)]
pub enum PotentialMode {
    /// Recomputed from the evolving density through the electroneutrality inversion.
    SelfConsistent,
    /// Held fixed for the whole run.
    Frozen(SpectralField2D),
    /// Identically zero (advection off).
    Zero,
}

/// Evolving state.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub f: GyroDistribution,
    pub time: f64,
    pub step_count: u64,
}

struct Workspace {
    a: Array2<Complex64>,
    b: Array2<Complex64>,
    prod: Array2<f64>,
    rhs_col: Vec<Complex64>,
}

/// The integrator. Single-writer: one state advanced in place.
pub struct Solver {
    state: SolverState,
    params: PhysicalParams,
    mode: PotentialMode,
    table: MultiplierTable,
    fft: Fft2,
    u_op: UOperator,
    trap: Option<(f64, TrapezoidalStep)>,
    decay: Option<(f64, Array2<f64>)>,
    ws: Workspace,
    /// CFL safety factor for the advective step bound.
    pub cfl_safety: f64,
    /// Hard cap on the step size.
    pub dt_max: f64,
}

impl Solver {
    pub fn new(f: GyroDistribution, params: PhysicalParams, mode: PotentialMode) -> Result<Self> {
        params.validate()?;
        if f.k_max() != params.k_max || f.grid().len() != params.n_u {
            return Err(Error::Shape("initial state does not match parameters".into()));
        }
        let m = dealias_size(params.k_max);
        let fft = Fft2::new(m);
        let grid = f.grid().clone();
        let table = MultiplierTable::build(params.k_max, params.temperature, grid.clone())?;
        let u_op = build_u_operator(&grid, &params)?;
        if let PotentialMode::Frozen(phi) = &mode {
            if phi.k_max() != params.k_max {
                return Err(Error::Shape("frozen potential truncation mismatch".into()));
            }
        }
        let ws = Workspace {
            a: Array2::zeros((m, m)),
            b: Array2::zeros((m, m)),
            prod: Array2::zeros((m, m)),
            rhs_col: vec![Complex64::default(); params.n_u],
        };
        Ok(Self {
            state: SolverState { f, time: 0.0, step_count: 0 },
            params,
            mode,
            table,
            fft,
            u_op,
            trap: None,
            decay: None,
            ws,
            cfl_safety: 0.4,
            dt_max: 0.05,
        })
    }

    #[inline]
    pub fn state(&self) -> &SolverState {
        &self.state
    }

    #[inline]
    pub fn state_mut(&mut self) -> &mut SolverState {
        &mut self.state
    }

    #[inline]
    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    #[inline]
    pub fn table(&self) -> &MultiplierTable {
        &self.table
    }

    #[inline]
    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    #[inline]
    pub fn grid(&self) -> &Arc<VelocityGrid> {
        self.state.f.grid()
    }

    #[inline]
    pub fn u_operator(&self) -> &UOperator {
        &self.u_op
    }

    pub fn mode(&self) -> &PotentialMode {
        &self.mode
    }

    /// Potential for the given state under the configured mode.
    pub fn potential(&self, f: &GyroDistribution) -> Result<SpectralField2D> {
        match &self.mode {
            PotentialMode::SelfConsistent => {
                let rho = self.table.density(f);
                self.table.solve_potential(&rho)
            }
            PotentialMode::Frozen(phi) => Ok(phi.clone()),
            PotentialMode::Zero => {
                let mut phi = SpectralField2D::zeros(self.params.k_max);
                phi.zero_mean = true;
                Ok(phi)
            }
        }
    }

    /// Gyro-density of the current state.
    pub fn density(&self) -> SpectralField2D {
        self.table.density(&self.state.f)
    }

    /// Fill a dealiased buffer with the padded modes of a slice-dependent
    /// multiplier and transform to the physical grid.
    #[allow(clippy::too_many_arguments)]
    fn nodal_from_modes(
        buf: &mut Array2<Complex64>,
        fft: &Fft2,
        k_max: usize,
        mut mode_coeff: impl FnMut(usize, usize, i64, i64) -> Complex64,
    ) {
        let n = 2 * k_max + 1;
        let kc = k_max as i64;
        let m = fft.size();
        buf.fill(Complex64::default());
        for i1 in 0..n {
            let k1 = i1 as i64 - kc;
            let w1 = k1.rem_euclid(m as i64) as usize;
            for i2 in 0..n {
                let k2 = i2 as i64 - kc;
                let c = mode_coeff(i1, i2, k1, k2);
                if c != Complex64::default() {
                    let w2 = k2.rem_euclid(m as i64) as usize;
                    buf[[w1, w2]] = c;
                }
            }
        }
        fft.inverse(buf);
    }

    /// -(J0_u grad Phi)^perp . grad_x f per radial slice, dealiased. The mean
    /// mode of each slice is pinned to zero: divergence-free transport leaves
    /// the x-mean untouched at every u.
    pub fn advection_rhs(&mut self, f: &GyroDistribution, phi: &SpectralField2D) -> GyroDistribution {
        let k_max = self.params.k_max;
        let n = 2 * k_max + 1;
        let kc = k_max as i64;
        let m = self.fft.size();
        let mut out = GyroDistribution::zeros(k_max, f.grid().clone());

        let Self { ws, fft, table, params, .. } = self;
        for j in 0..params.n_u {
            let fslice = f.slice_view(j);

            // v1 = -d2(J0 Phi), then g1 = d1 f
            Self::nodal_from_modes(&mut ws.a, fft, k_max, |i1, i2, _k1, k2| {
                phi.coeffs()[[i1, i2]] * Complex64::new(0.0, -(k2 as f64)) * table.j0_at(i1, i2, j)
            });
            Self::nodal_from_modes(&mut ws.b, fft, k_max, |i1, i2, k1, _k2| {
                fslice[[i1, i2]] * Complex64::new(0.0, k1 as f64)
            });
            for ((p, a), b) in ws.prod.iter_mut().zip(ws.a.iter()).zip(ws.b.iter()) {
                *p = a.re * b.re;
            }

            // v2 = d1(J0 Phi), then g2 = d2 f
            Self::nodal_from_modes(&mut ws.a, fft, k_max, |i1, i2, k1, _k2| {
                phi.coeffs()[[i1, i2]] * Complex64::new(0.0, k1 as f64) * table.j0_at(i1, i2, j)
            });
            Self::nodal_from_modes(&mut ws.b, fft, k_max, |i1, i2, _k1, k2| {
                fslice[[i1, i2]] * Complex64::new(0.0, k2 as f64)
            });
            for ((p, a), b) in ws.prod.iter_mut().zip(ws.a.iter()).zip(ws.b.iter()) {
                *p += a.re * b.re;
            }

            // rhs = -(v . grad f): forward transform and truncate
            for (c, &p) in ws.a.iter_mut().zip(ws.prod.iter()) {
                *c = Complex64::new(-p, 0.0);
            }
            fft.forward(&mut ws.a);
            let scale = 1.0 / (m * m) as f64;
            let mut oslice = out.slice_view_mut(j);
            for i1 in 0..n {
                let w1 = (i1 as i64 - kc).rem_euclid(m as i64) as usize;
                for i2 in 0..n {
                    let w2 = (i2 as i64 - kc).rem_euclid(m as i64) as usize;
                    oslice[[i1, i2]] = ws.a[[w1, w2]] * scale;
                }
            }
            oslice[[k_max, k_max]] = Complex64::default();
        }
        out
    }

    /// Largest drift magnitude over the dealiased grid and all radial nodes.
    pub fn max_drift(&mut self, phi: &SpectralField2D) -> f64 {
        let k_max = self.params.k_max;
        let mut vmax = 0.0_f64;
        let Self { ws, fft, table, params, .. } = self;
        for j in 0..params.n_u {
            Self::nodal_from_modes(&mut ws.a, fft, k_max, |i1, i2, _k1, k2| {
                phi.coeffs()[[i1, i2]] * Complex64::new(0.0, -(k2 as f64)) * table.j0_at(i1, i2, j)
            });
            Self::nodal_from_modes(&mut ws.b, fft, k_max, |i1, i2, k1, _k2| {
                phi.coeffs()[[i1, i2]] * Complex64::new(0.0, k1 as f64) * table.j0_at(i1, i2, j)
            });
            for (a, b) in ws.a.iter().zip(ws.b.iter()) {
                let v = (a.re * a.re + b.re * b.re).sqrt();
                vmax = vmax.max(v);
            }
        }
        vmax
    }

    /// Advective step bound C_cfl dx / max |drift|, capped by dt_max.
    pub fn cfl_dt(&mut self) -> Result<f64> {
        let phi = self.potential(&self.state.f)?;
        let vmax = self.max_drift(&phi);
        let dx = TORUS_LENGTH / self.fft.size() as f64;
        if vmax <= 0.0 {
            return Ok(self.dt_max);
        }
        Ok((self.cfl_safety * dx / vmax).min(self.dt_max))
    }

    fn trapezoidal_for(&mut self, h: f64) -> Result<()> {
        let rebuild = match &self.trap {
            Some((hh, _)) => *hh != h,
            None => true,
        };
        if rebuild {
            self.trap = Some((h, self.u_op.trapezoidal(h)?));
        }
        Ok(())
    }

    fn half_radial(&mut self, dt: f64) -> Result<()> {
        let h = 0.5 * dt;
        self.trapezoidal_for(h)?;
        let Self { trap, state, ws, params, .. } = self;
        let (_, step) = trap.as_ref().expect("factorized");
        let n = 2 * params.k_max + 1;
        let n_u = params.n_u;
        let modal = state.f.modal_mut();
        let mut col = vec![Complex64::default(); n_u];
        for i1 in 0..n {
            for i2 in 0..n {
                for j in 0..n_u {
                    col[j] = modal[[i1, i2, j]];
                }
                step.advance(&mut col, &mut ws.rhs_col);
                for j in 0..n_u {
                    modal[[i1, i2, j]] = col[j];
                }
            }
        }
        Ok(())
    }

    fn decay_for(&mut self, dt: f64) {
        let rebuild = match &self.decay {
            Some((d, _)) => *d != dt,
            None => true,
        };
        if rebuild {
            let n = 2 * self.params.k_max + 1;
            let kc = self.params.k_max as i64;
            let nu = self.params.nu;
            let arr = Array2::from_shape_fn((n, n), |(i1, i2)| {
                let k1 = i1 as i64 - kc;
                let k2 = i2 as i64 - kc;
                (-nu * ((k1 * k1 + k2 * k2) as f64) * dt).exp()
            });
            self.decay = Some((dt, arr));
        }
    }

    fn apply_decay(&self, f: &mut GyroDistribution) {
        let (_, e) = self.decay.as_ref().expect("decay factor built");
        Self::apply_decay_to(e, f);
    }

    fn apply_decay_to(e: &Array2<f64>, f: &mut GyroDistribution) {
        let n_u = f.grid().len();
        let modal = f.modal_mut();
        for j in 0..n_u {
            let mut slice = modal.index_axis_mut(ndarray::Axis(2), j);
            slice.zip_mut_with(e, |c, &d| *c *= d);
        }
    }

    /// One Strang step: half radial solve, integrating-factor SSP-RK2 for
    /// advection with exact modal diffusion (potential refreshed at each
    /// stage), half radial solve.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        let limit = self.cfl_dt()?;
        if dt > limit * (1.0 + 1e-9) {
            return Err(Error::StepRejected { dt, limit });
        }
        self.decay_for(dt);

        self.half_radial(dt)?;

        if matches!(self.mode, PotentialMode::Zero) {
            // advection vanishes identically; the RK2 collapses to the factor
            let (_, e) = self.decay.as_ref().expect("decay factor built");
            Self::apply_decay_to(e, &mut self.state.f);
        } else {
            let f0 = self.state.f.clone();
            let phi0 = self.potential(&f0)?;
            let n0 = self.advection_rhs(&f0, &phi0);
            let mut f1 = dist_lincomb(1.0, &f0, dt, &n0);
            self.apply_decay(&mut f1);
            let phi1 = self.potential(&f1)?;
            let n1 = self.advection_rhs(&f1, &phi1);

            // f <- 0.5 E f + 0.5 (f1 + dt n1)
            let mut ef = f0;
            self.apply_decay(&mut ef);
            let mid = dist_lincomb(0.5, &ef, 0.5, &f1);
            let mut fnew = dist_lincomb(1.0, &mid, 0.5 * dt, &n1);
            fnew.enforce_hermitian();
            self.state.f = fnew;
        }

        self.half_radial(dt)?;

        if !self.state.f.is_finite() {
            return Err(Error::BlowUp { t: self.state.time });
        }
        self.state.time += dt;
        self.state.step_count += 1;
        Ok(())
    }
}
