mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::RunConfig;

/// Attractors, basins and stability of hyperspace dynamics.
///
/// Flags override values from --config, which override the scenario's
/// defaults.
#[derive(Debug, Parser)]
#[command(name = "hyperdyn", version)]
struct Cli {
    /// Catalog scenario to run.
    #[arg(long)]
    scenario: Option<String>,
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Lattice resolution.
    #[arg(long)]
    h: Option<f64>,
    /// Residual tolerance for the attractor search.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget for the attractor search.
    #[arg(long)]
    n_max: Option<usize>,
    /// Orbit length checked by the stability probe.
    #[arg(long)]
    horizon: Option<usize>,
    /// Perturbed sets per delta in the stability probe.
    #[arg(long)]
    samples: Option<usize>,
    /// Base seed for every random draw (default 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma-separated output formats: json, csv, pgm, svg.
    #[arg(long, value_delimiter = ',')]
    emit: Option<Vec<String>>,
    /// Print the scenario catalog and exit.
    #[arg(long)]
    list_scenarios: bool,
}

fn flags(cli: &Cli) -> RunConfig {
    RunConfig {
        scenario: cli.scenario.clone(),
        h: cli.h,
        tol: cli.tol,
        n_max: cli.n_max,
        horizon: cli.horizon,
        samples: cli.samples,
        seed: cli.seed,
        out: cli.out.clone(),
        emit: cli.emit.clone(),
        ..Default::default()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_scenarios {
        return match run::list_scenarios() {
            Ok(s) => {
                print!("{s}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        };
    }
    let base = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
        },
        None => RunConfig::default(),
    };
    let config = base.overlay(flags(&cli));
    match run::run(&config) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
