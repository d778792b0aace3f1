//! Run orchestration: step loop, record cadence, inline monitor enforcement.

use crate::config::RunConfig;
use crate::diagnostics::{check_apriori, DiagnosticsRecord, MonitorReport};
use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::solver::Solver;
use std::sync::Arc;

/// Result of a completed (or aborted) run.
pub struct RunOutcome {
    pub solver: Solver,
    pub records: Vec<DiagnosticsRecord>,
    pub report: MonitorReport,
    /// Set when the run stopped early (monitor violation or blow-up).
    pub aborted: Option<String>,
}

/// Build the solver described by the config (nonlinear or frozen-potential).
pub fn build_solver(config: &RunConfig) -> Result<Solver> {
    let params = config.params.to_physical();
    params.validate()?;
    let grid = Arc::new(VelocityGrid::new(params.n_u, params.u_max)?);
    let (f, _scale) = config.build_initial(grid)?;
    let mode = config.potential_mode()?;
    let mut solver = Solver::new(f, params, mode)?;
    solver.dt_max = config.run.dt_max;
    solver.cfl_safety = config.run.cfl_safety;
    Ok(solver)
}

/// Integrate to t_end, emitting one record per record_interval (plus the
/// initial and final instants). Monitored inequalities are evaluated as
/// records appear; a violation aborts when the config says so.
pub fn execute(config: &RunConfig) -> Result<RunOutcome> {
    let solver = build_solver(config)?;
    execute_with(config, solver)
}

/// Same as `execute` but on an externally prepared solver (used by the
/// stability experiment to inject perturbed initial data).
pub fn execute_with(config: &RunConfig, mut solver: Solver) -> Result<RunOutcome> {
    let t_end = config.run.t_end;
    let record_interval = config.run.record_interval;
    let toggles = config.monitors.toggles();
    let params = *solver.params();

    let mut records = vec![DiagnosticsRecord::measure(&mut solver)?];
    let mut aborted = None;

    let mut next_record = if record_interval > 0.0 {
        record_interval
    } else {
        t_end
    };

    'outer: while solver.state().time < t_end - 1e-14 {
        let t = solver.state().time;
        let target = next_record.min(t_end);
        let mut dt = solver.cfl_dt()?;
        if t + dt > target {
            dt = target - t;
        }
        match solver.step(dt) {
            Ok(()) => {}
            Err(Error::BlowUp { t }) => {
                aborted = Some(format!("blow-up detected at t = {t}"));
                break 'outer;
            }
            Err(e) => return Err(e),
        }
        let t = solver.state().time;
        if t >= target - 1e-14 {
            records.push(DiagnosticsRecord::measure(&mut solver)?);
            if t >= next_record - 1e-14 {
                next_record += if record_interval > 0.0 { record_interval } else { t_end };
            }
            if config.monitors.abort_on_violation {
                let report = check_apriori(&records, &params, &toggles)?;
                if !report.passed() {
                    aborted = Some(format!(
                        "monitor violation at t = {t}:\n{}",
                        report.render()
                    ));
                    break 'outer;
                }
            }
        }
    }

    // ensure a final record exists at the end time
    if let Some(last) = records.last() {
        if (last.t - solver.state().time).abs() > 1e-12 {
            records.push(DiagnosticsRecord::measure(&mut solver)?);
        }
    }

    let report = check_apriori(&records, &params, &toggles)?;
    Ok(RunOutcome {
        solver,
        records,
        report,
        aborted,
    })
}
