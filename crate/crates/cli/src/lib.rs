//! Batch front-end: configuration, the five subcommands and report output.

pub mod commands;
pub mod config;
pub mod report;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{FileConfig, Overrides, RunConfig, OUT_ENV};
use report::RunReport;

#[derive(Debug)]
pub enum CliError {
    /// Usage or configuration problem; exit code 2.
    Config(String),
    /// The output directory or a file could not be written; exit code 2.
    Io(String),
    /// A numerical failure (stability bound, blow-up); reported as a check error.
    Numerical(kcontact::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
            CliError::Numerical(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "kcontact",
    version,
    about = "Checks and simulations for k-contact field theories"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Model id; overrides the config file.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Output directory; overrides KCONTACT_OUT and the config file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for sampled points.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Check tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Structure conditions and Reeb frames at sampled points.
    Verify,
    /// Run the model's solver and write the section.
    Simulate,
    /// Observed convergence orders against an exact solution.
    Convergence,
    /// Check the dissipation law induced by a symmetry along a fresh solution.
    Dissipation,
    /// Classify a symmetry field.
    Symmetry,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Simulate => "simulate",
            Command::Convergence => "convergence",
            Command::Dissipation => "dissipation",
            Command::Symmetry => "symmetry",
        }
    }
}

/// Resolves the configuration and runs one command, writing `report.csv`.
pub fn run(cli: &Cli, env_out: Option<PathBuf>) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let flags = Overrides {
        model: cli.model.clone(),
        out: cli.out.clone(),
        seed: cli.seed,
        tol: cli.tol,
    };
    let cfg = RunConfig::resolve(file, flags, env_out)?;
    fs::create_dir_all(&cfg.out)
        .map_err(|e| CliError::Io(format!("{}: {e}", cfg.out.display())))?;
    let mut report = match cli.command {
        Command::Verify => commands::verify(&cfg, &cfg.out),
        Command::Simulate => commands::simulate(&cfg, &cfg.out),
        Command::Convergence => commands::convergence(&cfg, &cfg.out),
        Command::Dissipation => commands::dissipation(&cfg, &cfg.out),
        Command::Symmetry => commands::symmetry(&cfg, &cfg.out),
    }?;
    report.write_csv(&cfg.out)?;
    report.wall_time = start.elapsed();
    report.print_summary(cli.command.name(), cfg.model.name());
    Ok(report)
}

/// Process exit code for a finished run.
pub fn exit_code(result: &Result<RunReport, CliError>) -> u8 {
    match result {
        Ok(r) if r.all_passed() => 0,
        Ok(_) | Err(CliError::Numerical(_)) => 1,
        Err(_) => 2,
    }
}

pub fn env_out() -> Option<PathBuf> {
    std::env::var_os(OUT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}
