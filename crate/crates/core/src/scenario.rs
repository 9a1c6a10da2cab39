//! End-to-end scenario runs with process exit codes.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::adjoint::solve_costate;
use crate::config::Scenario;
use crate::dynamics::{evolve_state, output_path};
use crate::error::Error;
use crate::feedback::stationary_gradient_map;
use crate::grid::{make_grid, AgeProfile, Grid};
use crate::model::validate_model;
use crate::oracle::{direct_optimize_with, value_gradient_check, DirectOptions};
use crate::output::{emit_results, BenchmarkErrors, OracleSummary, RunResults};
use crate::paths::ControlPath;
use crate::pmp::{discounted_distance, extremality_certificate, fb_sweep, mp_control, mp_residual, Sweep};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Failure = 1,
    ConfigInvalid = 2,
    ModelInvalid = 3,
    NotConverged = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Command-line settings that take precedence over the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub with_oracle: bool,
    pub with_gradient_check: bool,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: ExitStatus,
    pub messages: Vec<String>,
    pub manifest: Vec<PathBuf>,
}

impl RunOutcome {
    fn fail(status: ExitStatus, messages: Vec<String>) -> Self {
        RunOutcome {
            status,
            messages,
            manifest: Vec::new(),
        }
    }
}

/// Load, validate, solve, cross-check and write outputs for one scenario.
pub fn run_scenario(config_path: &Path, overrides: &Overrides) -> RunOutcome {
    let mut scenario = match Scenario::load(config_path) {
        Ok(s) => s,
        Err(e) => return RunOutcome::fail(ExitStatus::ConfigInvalid, vec![e.to_string()]),
    };
    if let Some(tol) = overrides.tol {
        scenario.solver.tol = tol;
    }
    if let Some(max_iter) = overrides.max_iter {
        scenario.solver.max_iter = max_iter;
    }
    scenario.oracle.enabled |= overrides.with_oracle;
    scenario.gradient_check.enabled |= overrides.with_gradient_check;

    let violations = validate_model(&scenario.model);
    if !violations.is_empty() {
        return RunOutcome::fail(ExitStatus::ModelInvalid, violations);
    }

    let results = match solve(scenario) {
        Ok(r) => r,
        Err(e) => return RunOutcome::fail(ExitStatus::ConfigInvalid, vec![e.to_string()]),
    };

    let out_dir = overrides
        .out_dir
        .clone()
        .or_else(|| results.scenario.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("output"));
    let manifest = match emit_results(&results, &out_dir) {
        Ok(m) => m,
        Err(e) => return RunOutcome::fail(ExitStatus::Failure, vec![e.to_string()]),
    };

    let report = &results.sweep.report;
    let mut messages = vec![format!(
        "sweep: {} after {} iterations, J = {:.12e}, mp_residual = {:.3e}",
        if report.converged { "converged" } else { "not converged" },
        report.iterations,
        report.final_cost,
        results.certificate.mp_residual
    )];
    if let Some(o) = &results.oracle {
        messages.push(format!(
            "direct ({}): J = {:.12e}, cost gap = {:.3e}, control distance = {:.3e}",
            o.gradient, o.cost, o.cost_gap, o.control_distance
        ));
    }
    let status = if report.converged {
        ExitStatus::Ok
    } else {
        messages.push(format!(
            "sweep did not reach tol {} within {} iterations",
            results.scenario.solver.tol, results.scenario.solver.max_iter
        ));
        ExitStatus::NotConverged
    };
    RunOutcome {
        status,
        messages,
        manifest,
    }
}

/// Solve a validated scenario without writing anything.
pub fn solve(scenario: Scenario) -> Result<RunResults, Error> {
    let spec = &scenario.model;
    let grid = match scenario.grid.horizon {
        Some(t) => make_grid(spec, scenario.grid.n_s, t)?,
        None => Grid::for_tail_tolerance(spec, scenario.grid.n_s, scenario.grid.tail_tol)?,
    };
    let x = scenario.initial.sample(&grid);
    let sv = &scenario.solver;
    let sweep = fb_sweep(
        x.view(),
        &ControlPath::zeros(&grid),
        spec,
        &grid,
        sv.theta,
        sv.tol,
        sv.max_iter,
    )?;
    let certificate = extremality_certificate(&sweep.u, &sweep.y, &sweep.pi, spec, &grid, sv.tol)?;
    let output_q = output_path(&sweep.y, spec, &grid);

    let oc = &scenario.oracle;
    let opts = DirectOptions {
        gradient: oc.gradient.into(),
        ..DirectOptions::new(oc.tol, oc.max_iter)
    };
    let oracle = if oc.enabled {
        let sol = direct_optimize_with(x.view(), spec, &grid, &opts)?;
        let y = evolve_state(x.view(), &sol.u, spec, &grid)?;
        let pi = solve_costate(&y, spec, &grid)?;
        let j = sweep.report.final_cost;
        Some(OracleSummary {
            cost: sol.cost,
            iterations: sol.iterations,
            stationarity: sol.stationarity,
            converged: sol.converged,
            gradient: sol.gradient.name(),
            independent: sol.gradient.is_independent(),
            cost_gap: (j - sol.cost).abs() / sol.cost.abs().max(1.0),
            control_distance: discounted_distance(&sweep.u, &sol.u, spec.lambda, &grid),
            mp_residual: mp_residual(&sol.u, &pi, &spec.cost, spec.lambda, &grid),
        })
    } else {
        None
    };

    let gc = &scenario.gradient_check;
    let mut gradient_checks = Vec::new();
    if gc.enabled {
        for i in 0..gc.directions {
            let h = AgeProfile::from_fn(&grid, |s| (i as f64 * PI * s / spec.sbar).cos());
            gradient_checks.push(value_gradient_check(x.view(), h.view(), spec, &grid, gc.eps, &opts)?);
        }
    }

    let benchmark = benchmark_errors(&sweep, &scenario, &grid);
    Ok(RunResults {
        grid,
        sweep,
        certificate,
        output_q,
        oracle,
        gradient_checks,
        benchmark,
        scenario,
    })
}

/// Compare with the closed-form stationary costate and control, when the
/// model has them.
fn benchmark_errors(sweep: &Sweep<f64>, scenario: &Scenario, grid: &Grid<f64>) -> Option<BenchmarkErrors> {
    let spec = &scenario.model;
    let exact = stationary_gradient_map(spec, grid).ok()?;
    let mut stationary = crate::paths::CostatePath::zeros(grid);
    for mut row in stationary.pi.rows_mut() {
        row.assign(&*exact);
    }
    let u_exact = mp_control(&stationary, &spec.cost, grid);
    let last = (grid.n_t + 1).checked_sub(grid.n_s + 1)?;
    let (mut e_pi, mut e_u) = (0.0f64, 0.0f64);
    for k in 0..last.min(grid.n_t) {
        for j in 0..grid.n_s {
            let p = exact[j];
            if p != 0.0 {
                e_pi = e_pi.max((sweep.pi.pi[[k, j]] - p).abs() / p.abs());
            }
            let v = u_exact.u1[[k, j]];
            if v != 0.0 {
                e_u = e_u.max((sweep.u.u1[[k, j]] - v).abs() / v.abs());
            }
        }
        let v = u_exact.u0[k];
        if v != 0.0 {
            e_u = e_u.max((sweep.u.u0[k] - v).abs() / v.abs());
        }
    }
    Some(BenchmarkErrors {
        costate_max_rel_err: e_pi,
        control_max_rel_err: e_u,
    })
}
