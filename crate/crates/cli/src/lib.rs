//! Command-line front end for `diffkern2d-core`: verification suites,
//! ρ-tables, reconstruction and a deconvolution demo. Every command reads a
//! TOML config and writes its results as files under `--out`.

pub mod commands;
pub mod config;
pub mod error;
pub mod image;
pub mod report;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{parse_tol_override, Overrides, RunConfig, Settings};
use error::CliError;
use report::{Outcome, Status};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "DIFFKERN2D_THREADS";

#[derive(Debug, Parser)]
#[command(name = "diffkern2d", version, about = "Two-dimensional difference-kernel operators: checks, ρ-tables, reconstruction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Operator identities, displacement ranks, g-symmetry and convergence orders.
    Verify(CommonArgs),
    /// Direct and structured ρ-tables with their difference statistics.
    Rho(CommonArgs),
    /// Blur an image with S and recover it with S⁻¹.
    Deconv(CommonArgs),
    /// Rebuild S⁻¹ from ρ and check the convolution structure of its inverse.
    Reconstruct(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `[run] out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated grid sizes, e.g. `8,16,32`.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance override `key=value`; repeatable.
    #[arg(long = "tol-override", value_parser = parse_tol_override)]
    pub tol_override: Vec<(String, f64)>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Rho(_) => "rho",
            Command::Deconv(_) => "deconv",
            Command::Reconstruct(_) => "reconstruct",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Verify(a) | Command::Rho(a) | Command::Deconv(a) | Command::Reconstruct(a) => a,
        }
    }
}

/// Loads the config, runs the command and writes its files.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let name = cli.command.name();
    let args = cli.command.args();
    let config = RunConfig::load(&args.config)?;
    let ov = Overrides { out: args.out.clone(), sizes: args.sizes.clone(), seed: args.seed, tol: args.tol_override.clone() };
    let settings = Settings::new(config, &args.config, name, &ov)?;
    match &cli.command {
        Command::Verify(_) => commands::verify::run(&settings),
        Command::Rho(_) => commands::rho::run(&settings),
        Command::Deconv(_) => commands::deconv::run(&settings),
        Command::Reconstruct(_) => commands::reconstruct::run(&settings),
    }
}

/// One line per check, then the files written.
pub fn summary(outcome: &Outcome) -> String {
    let mut s = String::new();
    for c in &outcome.checks {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        s.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
    }
    for f in &outcome.files {
        s.push_str(&format!("wrote {}\n", f.display()));
    }
    s.push_str(&format!("{}: {}\n", outcome.command, if outcome.passed() { "all checks passed" } else { "contract failure" }));
    s
}
