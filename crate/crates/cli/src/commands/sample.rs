use std::path::PathBuf;

use clap::{Args, ValueEnum};
use parastat::partitions::cache::{load_or_build, CACHE_DIR_ENV};
use parastat::partitions::{sample_many, CountMode, PartitionTable, SampleConvention};
use serde::Serialize;

use crate::emit::{csv_err, finish};
use crate::error::CliError;
use crate::{Ctx, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Exact,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    AtMostK,
    ExactlyK,
}

value_enum_from_str!(ModeArg, ConventionArg);

/// Count table for (n, k), read from and stored in the cache directory when
/// the environment names one.
pub fn count_table(n: u64, k: u64, mode: ModeArg) -> Result<PartitionTable, CliError> {
    let mode = match mode {
        ModeArg::Auto => CountMode::auto(n),
        ModeArg::Exact => CountMode::Exact,
        ModeArg::Log => CountMode::LogSpace,
    };
    let k = k.min(n);
    Ok(match std::env::var_os(CACHE_DIR_ENV) {
        Some(dir) if !dir.is_empty() => load_or_build(&PathBuf::from(dir), n, k, mode)?,
        _ => PartitionTable::build(n, k, mode)?,
    })
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    n: Option<u64>,
    /// Bound on the number of parts (default n).
    #[arg(long)]
    k: Option<u64>,
    /// Number of partitions to draw (default 1).
    #[arg(long)]
    samples: Option<usize>,
    /// at-most-k (default) or exactly-k parts.
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
    /// Count representation (default auto: exact up to n = 3000).
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Serialize)]
struct Drawn {
    parts: Vec<u64>,
    parts_total: u64,
    n0: u64,
}

#[derive(Serialize)]
struct SampleReport {
    n: u64,
    k: u64,
    seed: u64,
    convention: SampleConvention,
    samples: Vec<Drawn>,
}

pub fn run(a: &SampleArgs, ctx: &mut Ctx) -> Result<Vec<u8>, CliError> {
    let n = ctx.cfg.pick(a.n, "n")?.ok_or_else(|| CliError::usage("--n is required"))?;
    if n == 0 {
        return Err(CliError::usage("--n must be positive"));
    }
    let k = ctx.cfg.or(a.k, "k", n)?;
    let count = ctx.cfg.or(a.samples, "samples", 1)?;
    let convention = match ctx.cfg.or(a.convention, "convention", ConventionArg::AtMostK)? {
        ConventionArg::AtMostK => SampleConvention::AtMostK,
        ConventionArg::ExactlyK => SampleConvention::ExactlyK,
    };
    let mode = ctx.cfg.or(a.mode, "mode", ModeArg::Auto)?;
    let seed = ctx.seed("partition-sample")?;
    let table = count_table(n, k, mode)?;
    let drawn = sample_many(&table, n, k, count, seed, convention, ctx.threads)?;
    let samples: Vec<Drawn> =
        drawn.iter().map(|o| Drawn { parts: o.parts_desc(), parts_total: o.parts_total, n0: o.n0 }).collect();
    if ctx.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["sample", "parts_total", "n0", "parts"]).map_err(csv_err)?;
        for (i, d) in samples.iter().enumerate() {
            let parts = d.parts.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
            w.write_record([i.to_string(), d.parts_total.to_string(), d.n0.to_string(), parts]).map_err(csv_err)?;
        }
        return finish(w);
    }
    ctx.render("partition-sample", &SampleReport { n, k, seed, convention, samples })
}
