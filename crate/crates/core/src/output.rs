//! CSV trajectories and the TOML run summary.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Serialize;

use crate::config::Scenario;
use crate::grid::Grid;
use crate::oracle::ValueGradientCheck;
use crate::pmp::{ExtremalityCertificate, Sweep};

/// Everything one scenario run produces.
#[derive(Debug, Clone)]
pub struct RunResults {
    pub scenario: Scenario,
    pub grid: Grid<f64>,
    pub sweep: Sweep<f64>,
    pub certificate: ExtremalityCertificate<f64>,
    pub output_q: Vec<f64>,
    pub oracle: Option<OracleSummary>,
    pub gradient_checks: Vec<ValueGradientCheck<f64>>,
    pub benchmark: Option<BenchmarkErrors>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub cost: f64,
    pub iterations: usize,
    pub stationarity: f64,
    pub converged: bool,
    pub gradient: &'static str,
    pub independent: bool,
    /// `|J_sweep - J_direct| / max(1, |J_direct|)`.
    pub cost_gap: f64,
    /// Discounted L2 distance between the two controls.
    pub control_distance: f64,
    /// Maximum-principle residual of the direct solution.
    pub mp_residual: f64,
}

/// Deviations from the closed-form stationary solution, over time levels at
/// least one maximal age before the horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkErrors {
    pub costate_max_rel_err: f64,
    pub control_max_rel_err: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv { path: String, source: csv::Error },
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    grid: GridSummary,
    sweep: SweepSummary<'a>,
    certificate: CertificateSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<&'a OracleSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gradient_check: Option<GradientSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    benchmark: Option<&'a BenchmarkErrors>,
}

#[derive(Serialize)]
struct GridSummary {
    n_s: usize,
    n_t: usize,
    dt: f64,
    t0: f64,
    horizon: f64,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    converged: bool,
    iterations: usize,
    cost: f64,
    mp_residual: f64,
    theta: f64,
    tol: f64,
    residual_history: &'a [f64],
}

#[derive(Serialize)]
struct CertificateSummary {
    state_residual: f64,
    costate_residual: f64,
    mp_residual: f64,
    transversality_norm: f64,
    is_extremal: bool,
}

#[derive(Serialize)]
struct GradientSummary {
    fd_directional: Vec<f64>,
    costate_pairing: Vec<f64>,
    rel_err: Vec<f64>,
    max_rel_err: f64,
}

/// Write trajectories, summary and config echo into `out_dir`; returns the
/// written paths.
pub fn emit_results(results: &RunResults, out_dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    fs::create_dir_all(out_dir).map_err(|source| OutputError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let g = &results.grid;
    let Sweep { u, y, pi, report } = &results.sweep;
    let mut manifest = Vec::new();

    let mut put = |name: &str, write: &dyn Fn(&Path) -> Result<(), OutputError>| {
        let path = out_dir.join(name);
        write(&path)?;
        manifest.push(path);
        Ok::<_, OutputError>(())
    };

    put("state.csv", &|p| write_field(p, g, &y.y))?;
    put("costate.csv", &|p| write_field(p, g, &pi.pi))?;
    put("control_u0.csv", &|p| write_series(p, g, u.u0.iter().copied()))?;
    put("control_u1.csv", &|p| write_field(p, g, &u.u1))?;
    put("output_q.csv", &|p| write_series(p, g, results.output_q.iter().copied()))?;

    let c = &results.certificate;
    let checks = &results.gradient_checks;
    let summary = Summary {
        grid: GridSummary {
            n_s: g.n_s,
            n_t: g.n_t,
            dt: g.dt,
            t0: g.t0,
            horizon: g.horizon,
        },
        sweep: SweepSummary {
            converged: report.converged,
            iterations: report.iterations,
            cost: report.final_cost,
            mp_residual: c.mp_residual,
            theta: results.scenario.solver.theta,
            tol: results.scenario.solver.tol,
            residual_history: &report.residual_history,
        },
        certificate: CertificateSummary {
            state_residual: c.state_residual,
            costate_residual: c.costate_residual,
            mp_residual: c.mp_residual,
            transversality_norm: c.transversality_norm,
            is_extremal: c.is_extremal,
        },
        oracle: results.oracle.as_ref(),
        gradient_check: (!checks.is_empty()).then(|| GradientSummary {
            fd_directional: checks.iter().map(|r| r.fd_directional).collect(),
            costate_pairing: checks.iter().map(|r| r.costate_pairing).collect(),
            rel_err: checks.iter().map(|r| r.rel_err).collect(),
            max_rel_err: checks.iter().fold(0.0, |m, r| m.max(r.rel_err)),
        }),
        benchmark: results.benchmark.as_ref(),
    };
    let text = toml::to_string(&summary).expect("summary serializes");
    put("summary.toml", &|p| write_text(p, &text))?;
    let echo = results.scenario.to_toml();
    put("config.toml", &|p| write_text(p, &echo))?;
    Ok(manifest)
}

fn write_text(path: &Path, text: &str) -> Result<(), OutputError> {
    fs::write(path, text).map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> OutputError + '_ {
    move |source| OutputError::Csv {
        path: path.display().to_string(),
        source,
    }
}

/// `time,age,value`, one row per grid node, time-major.
fn write_field(path: &Path, g: &Grid<f64>, a: &Array2<f64>) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["time", "age", "value"]).map_err(csv_err(path))?;
    for ((k, j), &v) in a.indexed_iter() {
        w.write_record([fmt_f64(g.time(k)), fmt_f64(g.age(j)), fmt_f64(v)])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// `time,value`.
fn write_series(path: &Path, g: &Grid<f64>, values: impl Iterator<Item = f64>) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["time", "value"]).map_err(csv_err(path))?;
    for (k, v) in values.enumerate() {
        w.write_record([fmt_f64(g.time(k)), fmt_f64(v)]).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, -2.5e-7, 6.02e23, f64::MAX, f64::MIN_POSITIVE] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.25), "0.25");
    }
}
