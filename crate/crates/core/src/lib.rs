//! Solver and verification library for a 2D gyro-kinetic Fokker-Planck model
//! on the torus, closed by an electroneutrality relation.
//!
//! The model evolves a gyro-center distribution f(t, x, u) with
//!
//!   df/dt + (J0_u grad Phi)^perp . grad_x f
//!       = beta u d_u f + 2 beta f + nu (Lap_x f + (1/u) d_u(u d_u f)),
//!
//! where the potential solves (Phi - Phi * H_T) = T (rho - 1) and the density
//! is the gyro-average moment rho = int J0_u f 2 pi u du. Everything is
//! spectral in x (integer wavevectors, |k_i| <= K) and nodal in u.
//!
//! Beyond the integrator the crate ships the verification surface: envelope
//! bounds for the Bessel kernel, multiplier bounds for the electroneutrality
//! inversion, weighted-norm growth monitors, a 4D rotation-limit harness, a
//! twin-trajectory stability experiment, and snapshot/series I/O.

pub mod bessel;
pub mod config;
pub mod diagnostics;
pub mod distribution;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod harness;
pub mod multiplier;
pub mod operator;
pub mod run;
pub mod snapshot;
pub mod solver;
pub mod stability;

pub use bessel::{j0, j0_prime, BesselEval};
pub use config::RunConfig;
pub use diagnostics::{check_apriori, DiagnosticsRecord, MonitorReport, MonitorToggles, CSV_HEADER};
pub use distribution::GyroDistribution;
pub use error::{Error, Result};
pub use field::{SpectralField2D, TORUS_AREA, TORUS_LENGTH};
pub use grid::{VelocityGrid, WeightKind};
pub use harness::{angular_average, epsilon_sweep, step_4d, Gyro4DState, HarnessParams, SweepReport, SweepSpec};
pub use multiplier::{compute_density, drift_velocity, gyroaverage, ht_hat, MultiplierTable};
pub use operator::{build_u_operator, UOperator};
pub use run::{execute, RunOutcome};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use solver::{PhysicalParams, PotentialMode, Solver, SolverState};
pub use stability::{stability_experiment, StabilityReport};
