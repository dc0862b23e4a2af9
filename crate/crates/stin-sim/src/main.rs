//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for configuration and input problems
//! (bad scenario file, unknown axis, missing CSV column), 2 for runtime
//! failures (simulation errors, filesystem trouble while writing).
//!
//! Stdout carries only deterministic results; progress notes, warnings,
//! and output locations go to stderr so reruns can be diffed.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use stin_sim::metrics::{self, FitWindow, MetricsError};
use stin_sim::report::{generate_report, read_csv_column, Figure, ReportError};
use stin_sim::runner::{execute_run, summary_text, write_run_dir};
use stin_sim::sweep::{execute_sweep, write_sweep_dir, SweepAxis};
use stin_sim::{load_config, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "stin-sim",
    version,
    about = "Status-update delivery simulator for satellite-terrestrial networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its artifact directory.
    Run {
        /// Scenario file (`key = value` format).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for trace.csv, aoi.csv, fits.csv, summary.txt.
        #[arg(long, env = "STIN_SIM_OUT")]
        out: PathBuf,
    },
    /// Sweep one parameter across values x repetitions.
    Sweep {
        /// Base scenario file; the axis overrides one parameter per point.
        #[arg(long)]
        config: PathBuf,
        /// blocklength | rounds | gbs_count | tx_power | aoi_threshold
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated axis values, e.g. `150,300,600`.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Independent repetitions per value (paired seeds across values).
        #[arg(long, default_value_t = 1)]
        reps: u32,
        /// Output directory for sweep.csv, errors.csv, points/.
        #[arg(long, env = "STIN_SIM_OUT")]
        out: PathBuf,
    },
    /// Turn a sweep directory into a figure (CSV + SVG).
    Report {
        /// Sweep directory containing sweep.csv.
        #[arg(long = "in")]
        input: PathBuf,
        /// fig2 (delay) | fig4 (peak-age violation) | fig5 (error exponent)
        #[arg(long)]
        figure: Figure,
        /// Where to write plot files (defaults to the input directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a tail exponent to one numeric column of a CSV file.
    Fit {
        /// CSV file holding the samples.
        #[arg(long)]
        samples: PathBuf,
        /// Column to read.
        #[arg(long)]
        column: String,
    },
}

/// An error already formatted for the user, tagged with the exit code.
struct CliFailure {
    code: u8,
    message: String,
}

fn config_failure(e: impl std::fmt::Display) -> CliFailure {
    CliFailure {
        code: 1,
        message: e.to_string(),
    }
}

fn runtime_failure(e: impl std::fmt::Display) -> CliFailure {
    CliFailure {
        code: 2,
        message: e.to_string(),
    }
}

fn load_with_warnings(path: &Path) -> Result<ScenarioConfig, CliFailure> {
    let (cfg, warnings) = load_config(path).map_err(config_failure)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn cmd_run(config: PathBuf, out: PathBuf) -> Result<(), CliFailure> {
    let cfg = load_with_warnings(&config)?;
    let artifacts = execute_run(&cfg).map_err(runtime_failure)?;
    write_run_dir(&out, &artifacts).map_err(runtime_failure)?;
    print!("{}", summary_text(&artifacts));
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn cmd_sweep(
    config: PathBuf,
    axis: SweepAxis,
    values: Vec<f64>,
    reps: u32,
    out: PathBuf,
) -> Result<(), CliFailure> {
    let cfg = load_with_warnings(&config)?;
    let outcomes = execute_sweep(&cfg, axis, &values, reps).map_err(config_failure)?;
    write_sweep_dir(&out, axis, &outcomes).map_err(runtime_failure)?;
    let failures = outcomes.iter().filter(|o| o.result.is_err()).count();
    println!("points = {}", outcomes.len());
    println!("failures = {failures}");
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn cmd_report(input: PathBuf, figure: Figure, out: Option<PathBuf>) -> Result<(), CliFailure> {
    let out = out.unwrap_or_else(|| input.clone());
    let written = generate_report(&input, &out, figure).map_err(|e| match e {
        // Failing to write output is a system problem, not an input one.
        ReportError::WriteIo { .. } => runtime_failure(e),
        other => config_failure(other),
    })?;
    for path in &written {
        println!(
            "wrote {}",
            path.file_name().unwrap_or_default().to_string_lossy()
        );
    }
    eprintln!("into {}", out.display());
    Ok(())
}

fn cmd_fit(samples: PathBuf, column: String) -> Result<(), CliFailure> {
    let data = read_csv_column(&samples, &column).map_err(config_failure)?;
    match metrics::fit_tail_exponent(&data, None, &FitWindow::default()) {
        Ok(est) => {
            let status = if est.is_valid() { "ok" } else { "flat_tail" };
            println!("status = {status}");
            println!("theta = {}", est.theta);
            println!("r_squared = {}", est.r_squared);
            println!("std_error = {}", est.std_error);
            println!("n_points = {}", est.n_points);
            println!("n_samples = {}", est.n_samples);
        }
        Err(e) => {
            // Not enough tail to fit is a reported outcome, not a crash.
            let status = match e {
                MetricsError::EmptySamples => "no_samples",
                MetricsError::InsufficientData { .. } => "insufficient_data",
                _ => "error",
            };
            println!("status = {status}");
            println!("detail = {e}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // Argument problems are input problems: report them on the same exit
    // code as a bad scenario file instead of clap's default.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Run { config, out } => cmd_run(config, out),
        Command::Sweep {
            config,
            axis,
            values,
            reps,
            out,
        } => cmd_sweep(config, axis, values, reps, out),
        Command::Report { input, figure, out } => cmd_report(input, figure, out),
        Command::Fit { samples, column } => cmd_fit(samples, column),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
