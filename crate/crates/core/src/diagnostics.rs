//! Per-step diagnostics and the runtime inequality monitors.
//!
//! Each record stores every quantity the monitors need, so a saved series can
//! be re-checked offline and must produce identical verdicts.

use crate::error::{Error, Result};
use crate::field::TORUS_AREA;
use crate::grid::WeightKind;
use crate::multiplier::MultiplierTable;
use crate::solver::{PhysicalParams, Solver};
use std::f64::consts::PI;

pub const CSV_HEADER: &str =
    "t,mass,norm_2u,norm_2m,norm_l2m_l4,grad_norm_2m,rho_h_half,phi_h1,min_f,boundary_mass_fraction";

/// One row of the time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub norm_2u: f64,
    pub norm_2m: f64,
    pub norm_l2m_l4: f64,
    pub grad_norm_2m: f64,
    pub rho_h_half: f64,
    pub phi_h1: f64,
    pub min_f: f64,
    pub boundary_mass_fraction: f64,
}

impl DiagnosticsRecord {
    /// Measure the current solver state.
    pub fn measure(solver: &mut Solver) -> Result<Self> {
        let t = solver.state().time;
        let rho = solver.density();
        let phi = {
            let f = solver.state().f.clone();
            solver.potential(&f)?
        };
        let mut rho_dev = rho.clone();
        rho_dev.set_coeff(0, 0, num_complex::Complex64::default());
        rho_dev.zero_mean = true;

        let f = &solver.state().f;
        let fft = solver.fft();
        Ok(Self {
            t,
            mass: f.mass(),
            norm_2u: f.weighted_l2_norm(WeightKind::U),
            norm_2m: f.weighted_l2_norm(WeightKind::M),
            norm_l2m_l4: f.l2m_l4_norm(fft),
            grad_norm_2m: f.grad_weighted_l2_norm(WeightKind::M),
            rho_h_half: rho_dev.sobolev_norm(0.5),
            phi_h1: phi.sobolev_norm(1.0),
            min_f: f.min_physical(fft),
            boundary_mass_fraction: f.boundary_mass_fraction(),
        })
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.t,
            self.mass,
            self.norm_2u,
            self.norm_2m,
            self.norm_l2m_l4,
            self.grad_norm_2m,
            self.rho_h_half,
            self.phi_h1,
            self.min_f,
            self.boundary_mass_fraction
        )
    }

    pub fn from_csv_row(row: &str) -> Result<Self> {
        let cols: Vec<&str> = row.trim().split(',').collect();
        if cols.len() != 10 {
            return Err(Error::Format(format!("expected 10 columns, got {}", cols.len())));
        }
        let p = |i: usize| -> Result<f64> {
            cols[i]
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("column {i}: {e}")))
        };
        Ok(Self {
            t: p(0)?,
            mass: p(1)?,
            norm_2u: p(2)?,
            norm_2m: p(3)?,
            norm_l2m_l4: p(4)?,
            grad_norm_2m: p(5)?,
            rho_h_half: p(6)?,
            phi_h1: p(7)?,
            min_f: p(8)?,
            boundary_mass_fraction: p(9)?,
        })
    }
}

/// Parse a whole CSV series (header + rows).
pub fn parse_csv_series(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Format("missing or wrong CSV header".into())),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(DiagnosticsRecord::from_csv_row)
        .collect()
}

/// Which inequality monitors are active.
#[derive(Debug, Clone, Copy)]
pub struct MonitorToggles {
    pub mass: bool,
    pub u_norm: bool,
    pub m_norm: bool,
    pub l2m_l4: bool,
    pub rho_regularity: bool,
    /// Relative slack applied to every inequality.
    pub slack: f64,
    /// Allowed relative mass drift from the first record.
    pub mass_tol: f64,
}

impl Default for MonitorToggles {
    fn default() -> Self {
        Self {
            mass: true,
            u_norm: true,
            m_norm: true,
            l2m_l4: true,
            rho_regularity: true,
            slack: 1e-6,
            mass_tol: 1e-8,
        }
    }
}

/// Verdict for one inequality across a series.
#[derive(Debug, Clone)]
pub struct MonitorEntry {
    pub name: &'static str,
    pub passed: bool,
    /// Most negative relative margin (bound - value) / bound across records.
    pub worst_margin: f64,
    /// Time of the first violation, if any.
    pub first_failure_t: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct MonitorReport {
    pub entries: Vec<MonitorEntry>,
}

impl MonitorReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{:<16} {}  worst margin {:+.3e}{}\n",
                e.name,
                if e.passed { "PASS" } else { "FAIL" },
                e.worst_margin,
                e.first_failure_t
                    .map(|t| format!("  first failure at t = {t}"))
                    .unwrap_or_default()
            ));
        }
        out
    }
}

/// The growth factor (e^{2 beta t} - 1) / beta, with the beta -> 0 limit 2 t.
pub fn drift_growth_factor(beta: f64, t: f64) -> f64 {
    if beta == 0.0 {
        2.0 * t
    } else {
        ((2.0 * beta * t).exp() - 1.0) / beta
    }
}

fn check_inequality(
    name: &'static str,
    series: &[DiagnosticsRecord],
    slack: f64,
    mut bound_and_value: impl FnMut(&DiagnosticsRecord) -> (f64, f64),
) -> MonitorEntry {
    let mut worst = f64::INFINITY;
    let mut first_fail = None;
    for rec in series {
        let (bound, value) = bound_and_value(rec);
        let margin = if bound > 0.0 {
            (bound - value) / bound
        } else if value.abs() <= f64::EPSILON {
            0.0
        } else {
            f64::NEG_INFINITY
        };
        if margin < worst {
            worst = margin;
        }
        if margin < -slack && first_fail.is_none() {
            first_fail = Some(rec.t);
        }
    }
    MonitorEntry {
        name,
        passed: first_fail.is_none(),
        worst_margin: if worst == f64::INFINITY { 0.0 } else { worst },
        first_failure_t: first_fail,
    }
}

/// Evaluate the a-priori inequalities against a recorded series.
///
/// Checks (relative slack `toggles.slack` unless noted):
///   mass      |mass(t) - mass(0)| <= mass_tol * |mass(0)|
///   u_norm    ||f(t)||_{2,u} <= e^{beta t} ||f_0||_{2,u}
///   m_norm    ||f(t)||^2_{2,m} <= ||f_0||^2_{2,m}
///                + (2 nu + beta) (e^{2 beta t}-1)/beta ||f_0||^2_{2,2 pi u}
///   l2m_l4    ||f(t)||_{L2_m(L4)} <= e^{(beta + 2 nu) t} ||f_0||_{L2_m(L4)}
///   rho_reg   ||rho - 1||_{H^{1/2}} <= 2^{1/4} pi ||f||_{L2_m(L2)}
pub fn check_apriori(
    series: &[DiagnosticsRecord],
    params: &PhysicalParams,
    toggles: &MonitorToggles,
) -> Result<MonitorReport> {
    if series.is_empty() {
        return Err(Error::Config("empty diagnostics series".into()));
    }
    let first = &series[0];
    if first.t != 0.0 {
        log::warn!("monitor series does not start at t = 0; bounds anchored at t = {}", first.t);
    }
    let beta = params.beta;
    let nu = params.nu;
    let slack = toggles.slack;
    let mut report = MonitorReport::default();

    if toggles.mass {
        let m0 = first.mass;
        let tol = toggles.mass_tol;
        report.entries.push(check_inequality("mass", series, 0.0, |r| {
            let drift = if m0 != 0.0 { ((r.mass - m0) / m0).abs() } else { r.mass.abs() };
            (tol, drift)
        }));
    }
    if toggles.u_norm {
        let n0 = first.norm_2u;
        report.entries.push(check_inequality("u_norm", series, slack, |r| {
            ((beta * (r.t - first.t)).exp() * n0, r.norm_2u)
        }));
    }
    if toggles.m_norm {
        let m0_sq = first.norm_2m * first.norm_2m;
        let u0_sq = first.norm_2u * first.norm_2u;
        report.entries.push(check_inequality("m_norm", series, slack, |r| {
            let g = drift_growth_factor(beta, r.t - first.t);
            (m0_sq + (2.0 * nu + beta) * g * u0_sq, r.norm_2m * r.norm_2m)
        }));
    }
    if toggles.l2m_l4 {
        let l0 = first.norm_l2m_l4;
        report.entries.push(check_inequality("l2m_l4", series, slack, |r| {
            (((beta + 2.0 * nu) * (r.t - first.t)).exp() * l0, r.norm_l2m_l4)
        }));
    }
    if toggles.rho_regularity {
        let factor = 2.0f64.powf(0.25) * PI / TORUS_AREA.sqrt();
        report.entries.push(check_inequality("rho_regularity", series, slack, |r| {
            (factor * r.norm_2m, r.rho_h_half)
        }));
    }
    Ok(report)
}

/// Multiplier-table sanity summary used by startup logging and tests.
pub fn multiplier_bounds_hold(table: &MultiplierTable, slack: f64) -> bool {
    let k_max = table.k_max();
    let n = 2 * k_max + 1;
    let t = table.temperature();
    let c_t = 4.0 / (1.0 - (-1.0 / t).exp());
    for i1 in 0..n {
        for i2 in 0..n {
            let k1 = i1 as i64 - k_max as i64;
            let k2 = i2 as i64 - k_max as i64;
            let ksq = (k1 * k1 + k2 * k2) as f64;
            let h = table.ht_at(i1, i2);
            if !(0.0..=1.0).contains(&h) {
                return false;
            }
            if ksq > 0.0 {
                let lower = 0.25 * ksq * t * (1.0 - (-1.0 / (ksq * t)).exp());
                if 1.0 - h < lower - slack {
                    return false;
                }
                if table.lt_inv_at(i1, i2) > c_t + 1e-8 {
                    return false;
                }
            }
        }
    }
    true
}
