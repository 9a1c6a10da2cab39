use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use vintage_pmp::scenario::{run_scenario, Overrides};

/// Solve a vintage-capital investment scenario by the maximum principle.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// Directory for CSV trajectories and the summary.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also run the direct optimizer and compare.
    #[arg(long)]
    with_oracle: bool,
    /// Also compare value differences with the initial costate.
    #[arg(long)]
    with_gradient_check: bool,
    /// Sweep tolerance on the maximum-principle residual.
    #[arg(long)]
    tol: Option<f64>,
    /// Sweep iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        out_dir: cli.out_dir,
        with_oracle: cli.with_oracle,
        with_gradient_check: cli.with_gradient_check,
        tol: cli.tol,
        max_iter: cli.max_iter,
    };
    let outcome = run_scenario(&cli.scenario, &overrides);
    for m in &outcome.messages {
        eprintln!("{m}");
    }
    for p in &outcome.manifest {
        println!("{}", p.display());
    }
    ExitCode::from(outcome.status.code() as u8)
}
