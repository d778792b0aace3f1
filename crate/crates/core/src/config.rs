//! Run configuration: sectioned key = value text (TOML), initial data
//! construction, and normalization.

use crate::diagnostics::MonitorToggles;
use crate::distribution::GyroDistribution;
use crate::error::{Error, Result};
use crate::fft::{dealias_size, Fft2};
use crate::field::{SpectralField2D, TORUS_AREA};
use crate::grid::VelocityGrid;
use crate::snapshot;
use crate::solver::{PhysicalParams, PotentialMode};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_k")]
    pub k_truncation: usize,
    #[serde(default = "default_n_u")]
    pub n_u: usize,
    #[serde(default = "default_u_max")]
    pub u_max: f64,
}

fn default_nu() -> f64 {
    0.01
}
fn default_beta() -> f64 {
    0.1
}
fn default_temperature() -> f64 {
    1.0
}
fn default_k() -> usize {
    32
}
fn default_n_u() -> usize {
    32
}
fn default_u_max() -> f64 {
    6.0
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self {
            nu: default_nu(),
            beta: default_beta(),
            temperature: default_temperature(),
            k_truncation: default_k(),
            n_u: default_n_u(),
            u_max: default_u_max(),
        }
    }
}

impl ParamsSection {
    pub fn to_physical(&self) -> PhysicalParams {
        PhysicalParams {
            nu: self.nu,
            beta: self.beta,
            temperature: self.temperature,
            k_max: self.k_truncation,
            n_u: self.n_u,
            u_max: self.u_max,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_end: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    #[serde(default = "default_record_interval")]
    pub record_interval: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_cfl_safety")]
    pub cfl_safety: f64,
}

fn default_dt_max() -> f64 {
    0.02
}
fn default_record_interval() -> f64 {
    0.1
}
fn default_seed() -> u64 {
    42
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_cfl_safety() -> f64 {
    0.4
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            dt_max: default_dt_max(),
            record_interval: default_record_interval(),
            seed: default_seed(),
            output_dir: default_output_dir(),
            cfl_safety: default_cfl_safety(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    /// f_i = e^{-u^2/T0} / (A pi T0), unit mass.
    Maxwellian {
        #[serde(default = "default_temperature")]
        temperature: f64,
    },
    /// Maxwellian modulated by (1 + sum_m a_m cos(k_m . x)).
    PerturbedMaxwellian {
        #[serde(default = "default_temperature")]
        temperature: f64,
        modes: Vec<[i64; 2]>,
        amplitudes: Vec<f64>,
    },
    /// Resume from a snapshot.
    File { path: PathBuf },
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection::Maxwellian {
            temperature: default_temperature(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorsSection {
    #[serde(default = "default_true")]
    pub mass: bool,
    #[serde(default = "default_true")]
    pub u_norm: bool,
    #[serde(default = "default_true")]
    pub m_norm: bool,
    #[serde(default = "default_true")]
    pub l2m_l4: bool,
    #[serde(default = "default_true")]
    pub rho_regularity: bool,
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_mass_tol")]
    pub mass_tol: f64,
    /// Stop the run on the first violated inequality.
    #[serde(default = "default_true")]
    pub abort_on_violation: bool,
}

fn default_true() -> bool {
    true
}
fn default_slack() -> f64 {
    1e-6
}
fn default_mass_tol() -> f64 {
    1e-8
}

impl Default for MonitorsSection {
    fn default() -> Self {
        Self {
            mass: true,
            u_norm: true,
            m_norm: true,
            l2m_l4: true,
            rho_regularity: true,
            slack: default_slack(),
            mass_tol: default_mass_tol(),
            abort_on_violation: true,
        }
    }
}

impl MonitorsSection {
    pub fn toggles(&self) -> MonitorToggles {
        MonitorToggles {
            mass: self.mass,
            u_norm: self.u_norm,
            m_norm: self.m_norm,
            l2m_l4: self.l2m_l4,
            rho_regularity: self.rho_regularity,
            slack: self.slack,
            mass_tol: self.mass_tol,
        }
    }
}

/// Inline spectral modes for a frozen potential: (k1, k2, re, im).
pub type PhiModes = Vec<(i64, i64, f64, f64)>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeSection {
    /// Self-consistent potential.
    Nonlinear,
    /// Fixed potential: either zero or modes from a TOML file.
    FrozenPhi {
        #[serde(default)]
        phi_file: Option<PathBuf>,
    },
    /// 4D gyro-coordinate harness run.
    Harness4d {
        epsilon: f64,
        #[serde(default = "default_nx")]
        nx: usize,
        #[serde(default = "default_nv")]
        nv: usize,
        #[serde(default = "default_u_span")]
        u_span: f64,
    },
    /// Convergence sweep over the rotation parameter.
    EpsilonSweep {
        epsilons: Vec<f64>,
        #[serde(default = "default_nx")]
        nx: usize,
        #[serde(default = "default_nv")]
        nv: usize,
        #[serde(default = "default_u_span")]
        u_span: f64,
    },
    /// Twin-trajectory separation experiment.
    StabilityPair {
        #[serde(default = "default_deltas")]
        deltas: Vec<f64>,
    },
}

fn default_nx() -> usize {
    32
}
fn default_nv() -> usize {
    48
}
fn default_u_span() -> f64 {
    6.0
}
fn default_deltas() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}

impl Default for ModeSection {
    fn default() -> Self {
        ModeSection::Nonlinear
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: ParamsSection,
    pub run: RunSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub monitors: MonitorsSection,
    #[serde(default)]
    pub mode: ModeSection,
}

/// A frozen-potential file: a [phi] table with a list of modes.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PhiFile {
    modes: PhiModes,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.to_physical().validate()?;
        if !(self.run.t_end.is_finite() && self.run.t_end >= 0.0) {
            return Err(Error::Config(format!("t_end must be >= 0, got {}", self.run.t_end)));
        }
        if !(self.run.dt_max.is_finite() && self.run.dt_max > 0.0) {
            return Err(Error::Config("dt_max must be positive".into()));
        }
        if let InitialSection::PerturbedMaxwellian { modes, amplitudes, .. } = &self.initial {
            if modes.len() != amplitudes.len() {
                return Err(Error::Config("modes and amplitudes must have equal length".into()));
            }
        }
        if let ModeSection::EpsilonSweep { epsilons, .. } = &self.mode {
            if epsilons.is_empty() {
                return Err(Error::Config("epsilon sweep needs at least one value".into()));
            }
        }
        Ok(())
    }

    /// Build the initial distribution: checked nonnegative on the physical
    /// grid, then normalized so the quadrature mass is exactly one. Returns
    /// the distribution together with the applied normalization constant.
    pub fn build_initial(&self, grid: Arc<VelocityGrid>) -> Result<(GyroDistribution, f64)> {
        let params = self.params.to_physical();
        let k_max = params.k_max;
        let mut f = match &self.initial {
            InitialSection::Maxwellian { temperature } => {
                maxwellian(k_max, grid.clone(), *temperature, &[], &[])?
            }
            InitialSection::PerturbedMaxwellian {
                temperature,
                modes,
                amplitudes,
            } => maxwellian(k_max, grid.clone(), *temperature, modes, amplitudes)?,
            InitialSection::File { path } => {
                let snap = snapshot::read_snapshot(path)?;
                if snap.params.k_max != k_max || snap.params.n_u != grid.len() {
                    return Err(Error::Config(format!(
                        "snapshot dimensions (K = {}, N_u = {}) do not match config",
                        snap.params.k_max, snap.params.n_u
                    )));
                }
                snap.f
            }
        };
        // nonnegativity check on the dealiased grid
        let fft = Fft2::new(dealias_size(k_max));
        let min = f.min_physical(&fft);
        if min < -1e-12 {
            return Err(Error::Config(format!(
                "initial data is negative on the grid (min {min:e}); reduce perturbation amplitudes"
            )));
        }
        let mass = f.quadrature_mass();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Config(format!("initial data has invalid mass {mass}")));
        }
        let scale = 1.0 / mass;
        f.scale(scale);
        log::info!("initial data normalized to unit mass (scale factor {scale:.12e})");
        Ok((f, scale))
    }

    /// Resolve the potential mode for the solver.
    pub fn potential_mode(&self) -> Result<PotentialMode> {
        match &self.mode {
            ModeSection::FrozenPhi { phi_file } => match phi_file {
                None => Ok(PotentialMode::Zero),
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        Error::Config(format!("cannot read phi file {}: {e}", path.display()))
                    })?;
                    let parsed: PhiFile = toml::from_str(&text)
                        .map_err(|e| Error::Config(format!("phi file parse error: {e}")))?;
                    let phi = phi_from_modes(self.params.k_truncation, &parsed.modes)?;
                    Ok(PotentialMode::Frozen(phi))
                }
            },
            _ => Ok(PotentialMode::SelfConsistent),
        }
    }
}

/// Build a zero-mean potential from explicit modes, Hermitian completion
/// applied: each entry (k1, k2, re, im) contributes
/// 2 re cos(k . x) - 2 im sin(k . x) to the field.
pub fn phi_from_modes(k_max: usize, modes: &PhiModes) -> Result<SpectralField2D> {
    let mut phi = SpectralField2D::zeros(k_max);
    for &(k1, k2, re, im) in modes {
        if k1.unsigned_abs() as usize > k_max || k2.unsigned_abs() as usize > k_max {
            return Err(Error::Config(format!("phi mode ({k1}, {k2}) exceeds truncation {k_max}")));
        }
        if k1 == 0 && k2 == 0 {
            continue; // zero-mean gauge
        }
        let c = Complex64::new(re, im);
        phi.set_coeff(k1, k2, c);
        phi.set_coeff(-k1, -k2, c.conj());
    }
    phi.zero_mean = true;
    Ok(phi)
}

/// Maxwellian radial profile times (1 + sum a_m cos(k_m . x)), unnormalized.
pub fn maxwellian(
    k_max: usize,
    grid: Arc<VelocityGrid>,
    temperature: f64,
    modes: &[[i64; 2]],
    amplitudes: &[f64],
) -> Result<GyroDistribution> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::Config(format!("initial temperature must be positive, got {temperature}")));
    }
    let mut field = SpectralField2D::zeros(k_max);
    field.set_coeff(0, 0, Complex64::new(1.0, 0.0));
    for (m, &a) in modes.iter().zip(amplitudes) {
        let (k1, k2) = (m[0], m[1]);
        if k1.unsigned_abs() as usize > k_max || k2.unsigned_abs() as usize > k_max {
            return Err(Error::Config(format!("initial mode ({k1}, {k2}) exceeds truncation {k_max}")));
        }
        if k1 == 0 && k2 == 0 {
            return Err(Error::Config("perturbation modes must be nonzero".into()));
        }
        let c = Complex64::new(0.5 * a, 0.0);
        field.set_coeff(k1, k2, field.coeff(k1, k2) + c);
        field.set_coeff(-k1, -k2, field.coeff(-k1, -k2) + c);
    }
    let norm = 1.0 / (TORUS_AREA * PI * temperature);
    let profile: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&u| (-u * u / temperature).exp() * norm)
        .collect();
    GyroDistribution::separable(&field, &profile, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[run]
t_end = 0.5

[mode]
kind = "nonlinear"
"#;

    #[test]
    fn minimal_config_defaults() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.params.nu, 0.01);
        assert_eq!(cfg.params.beta, 0.1);
        assert_eq!(cfg.params.temperature, 1.0);
        assert_eq!(cfg.params.k_truncation, 32);
        assert_eq!(cfg.params.n_u, 32);
        assert_eq!(cfg.params.u_max, 6.0);
        assert!(matches!(cfg.mode, ModeSection::Nonlinear));
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = r#"
[run]
t_end = 1.0
typo_key = 3
"#;
        assert!(RunConfig::parse(bad).is_err());
    }

    #[test]
    fn negative_initial_data_rejected() {
        let text = r#"
[params]
k_truncation = 4
n_u = 16

[run]
t_end = 0.1

[initial]
kind = "perturbed_maxwellian"
modes = [[1, 0]]
amplitudes = [1.5]
"#;
        let cfg = RunConfig::parse(text).unwrap();
        let grid = Arc::new(VelocityGrid::new(16, 6.0).unwrap());
        assert!(cfg.build_initial(grid).is_err());
    }

    #[test]
    fn initial_mass_normalized() {
        let text = r#"
[params]
k_truncation = 4
n_u = 32

[run]
t_end = 0.1

[initial]
kind = "perturbed_maxwellian"
modes = [[1, 0], [0, 1]]
amplitudes = [0.05, 0.02]
"#;
        let cfg = RunConfig::parse(text).unwrap();
        let grid = Arc::new(VelocityGrid::new(32, 6.0).unwrap());
        let (f, _scale) = cfg.build_initial(grid).unwrap();
        assert!((f.quadrature_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_requires_epsilons() {
        let text = r#"
[run]
t_end = 1.0

[mode]
kind = "epsilon_sweep"
epsilons = []
"#;
        assert!(RunConfig::parse(text).is_err());
    }
}
