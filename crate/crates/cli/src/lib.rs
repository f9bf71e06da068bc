//! The `parastat` command line.
//!
//! [`run`] executes one command against in-memory buffers, so tests and the
//! binary share a single code path. Exit codes: 0 ok, 2 usage, 3 resource
//! budget, 4 data error, 5 numeric non-convergence.

use std::ffi::OsString;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
pub mod config;
pub mod emit;
pub mod error;
pub mod input;

use config::Config;
use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Parser)]
#[command(name = "parastat", version, about = "Critical numbers of parastatistics and partitions")]
struct Cli {
    /// Flat key = value file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Worker threads (default 1). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed; required by stochastic commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output format (default json).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Every applicable k0 variant with its method and constants.
    Threshold(commands::threshold::ThresholdArgs),
    /// Solve the constraint equations for b and kappa.
    Solve(commands::solve::SolveArgs),
    /// Draw uniform partitions of n.
    PartitionSample(commands::sample::SampleArgs),
    /// Monte Carlo check of condensate concentration and weak convergence.
    Condense(commands::condense::CondenseArgs),
    /// Crisis verdict for a debt portfolio.
    Debt(commands::debt::DebtArgs),
    /// Explosive-regime verdict for a time series.
    Flicker(commands::flicker::FlickerArgs),
    /// Quadrature constants with error estimates.
    Constants(commands::constants::ConstantsArgs),
}

/// Resolved global settings shared by all commands.
pub struct Ctx {
    pub cfg: Config,
    pub format: Format,
    pub threads: usize,
    pub seed: Option<u64>,
    pub warnings: Vec<String>,
}

impl Ctx {
    pub fn seed(&self, command: &str) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::usage(format!("{command} is stochastic: --seed is required")))
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }

    /// JSON envelope, or the flattened `field,value` table.
    pub fn render<T: Serialize>(&self, command: &str, result: &T) -> Result<Vec<u8>, CliError> {
        match self.format {
            Format::Json => Ok(emit::envelope(command, &self.warnings, result)),
            Format::Csv => emit::flat_csv(result),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Output {
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub code: i32,
}

fn execute(cli: Cli) -> Result<(Vec<u8>, Ctx), CliError> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let threads = cfg.or(cli.threads, "threads", 1)?;
    if threads == 0 {
        return Err(CliError::usage("--threads must be at least 1"));
    }
    let format = cfg.or(cli.format, "format", Format::Json)?;
    let seed = cfg.pick(cli.seed, "seed")?;
    let mut ctx = Ctx { cfg, format, threads, seed, warnings: Vec::new() };
    let out = match cli.command {
        Command::Threshold(a) => commands::threshold::run(&a, &mut ctx)?,
        Command::Solve(a) => commands::solve::run(&a, &mut ctx)?,
        Command::PartitionSample(a) => commands::sample::run(&a, &mut ctx)?,
        Command::Condense(a) => commands::condense::run(&a, &mut ctx)?,
        Command::Debt(a) => commands::debt::run(&a, &mut ctx)?,
        Command::Flicker(a) => commands::flicker::run(&a, &mut ctx)?,
        Command::Constants(a) => commands::constants::run(&a, &mut ctx)?,
    };
    Ok((out, ctx))
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            return match e.kind() {
                K::DisplayHelp | K::DisplayVersion => {
                    Output { stdout: e.render().to_string().into_bytes(), stderr: Vec::new(), code: 0 }
                }
                _ => {
                    let err = CliError::usage(first_line(&e.render().to_string()));
                    Output { stdout: Vec::new(), stderr: emit::error_report(&err), code: 2 }
                }
            };
        }
    };
    match execute(cli) {
        Ok((stdout, ctx)) => {
            let mut stderr = Vec::new();
            if ctx.format == Format::Csv {
                for w in &ctx.warnings {
                    stderr.extend_from_slice(format!("warning: {w}\n").as_bytes());
                }
            }
            Output { stdout, stderr, code: 0 }
        }
        Err(e) => Output { stdout: Vec::new(), stderr: emit::error_report(&e), code: e.exit_code() },
    }
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or("").trim_start_matches("error: ").to_string()
}
