use clap::Args;
use parastat::condensate::{
    condensate_bound_check, weak_convergence_statistic, BoundReport, ConvergenceReport, TestFunction, DEFAULT_DELTA,
    DEFAULT_DELTA1,
};
use parastat::partitions::stats::MIN_SAMPLES;
use parastat::partitions::{condensate_statistics, sample_many, CondensateSummary, LevelTable, SampleConvention};
use parastat::solver::{solve_b_kappa, ParastatProblem};
use parastat::thresholds::{k0_d1, k0_erdos, ThresholdResult};
use parastat::Error;
use serde::Serialize;

use super::positive;
use super::sample::{count_table, ModeArg};
use crate::error::CliError;
use crate::Ctx;

/// Band widths reported in the summary table.
const DELTA1_GRID: [f64; 4] = [0.05, 0.1, 0.15, 0.2];

#[derive(Debug, Args)]
pub struct CondenseArgs {
    #[arg(long)]
    n: Option<u64>,
    /// Number of slots: an integer, or `auto<m>` for round(m k0), e.g. auto3.
    #[arg(long)]
    k: Option<String>,
    /// Monte Carlo samples (default 200, at least 30).
    #[arg(long)]
    samples: Option<usize>,
    /// 1 for ordinary partitions (default) or 0.5 for square levels.
    #[arg(long)]
    alpha: Option<f64>,
    /// Tail-exponent slack (default 0.1).
    #[arg(long)]
    delta: Option<f64>,
    /// Relative band half-width (default 0.15).
    #[arg(long)]
    delta1: Option<f64>,
    /// Test function: exp:RATE (default exp:1), indicator:LO:HI or poly:CUTOFF:DEGREE.
    #[arg(long)]
    phi: Option<String>,
    /// Drop levels with b x_i above this scaled cut-off from the statistic.
    #[arg(long)]
    truncation: Option<f64>,
}

pub fn parse_phi(spec: &str) -> Result<TestFunction, CliError> {
    let bad = || CliError::usage(format!("cannot parse test function `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let phi = match parts.as_slice() {
        ["exp", r] => TestFunction::ExpDecay { rate: num(r)? },
        ["indicator", lo, hi] => TestFunction::IndicatorInterval { lo: num(lo)?, hi: num(hi)? },
        ["poly", c, d] => TestFunction::PolynomialCutoff { cutoff: num(c)?, degree: d.trim().parse().map_err(|_| bad())? },
        _ => return Err(bad()),
    };
    phi.validate()?;
    Ok(phi)
}

fn resolve_k(spec: &str, k0: f64) -> Result<u64, CliError> {
    if let Some(m) = spec.strip_prefix("auto") {
        let m: f64 = if m.is_empty() { 1.0 } else { m.parse().map_err(|_| CliError::usage(format!("bad --k `{spec}`")))? };
        return Ok((positive("k multiplier", m)? * k0).round() as u64);
    }
    spec.parse().map_err(|_| CliError::usage(format!("--k must be an integer or auto<m>, got `{spec}`")))
}

#[derive(Serialize)]
struct CondenseReport {
    n: u64,
    k: u64,
    k_rule: String,
    alpha: f64,
    seed: u64,
    threshold: ThresholdResult,
    test_function: TestFunction,
    convergence: ConvergenceReport,
    summary: CondensateSummary,
    /// Present when k > k0.
    band: Option<BoundReport>,
    median_band_pass: Option<bool>,
}

pub fn run(a: &CondenseArgs, ctx: &mut Ctx) -> Result<Vec<u8>, CliError> {
    let cfg = &ctx.cfg;
    let n = cfg.pick(a.n, "n")?.ok_or_else(|| CliError::usage("--n is required"))?;
    let k_rule: String = cfg.pick(a.k.clone(), "k")?.ok_or_else(|| CliError::usage("--k is required"))?;
    let alpha = cfg.or(a.alpha, "alpha", 1.0)?;
    let delta = positive("delta", cfg.or(a.delta, "delta", DEFAULT_DELTA)?)?;
    let delta1 = positive("delta1", cfg.or(a.delta1, "delta1", DEFAULT_DELTA1)?)?;
    let phi = parse_phi(&cfg.or(a.phi.clone(), "phi", "exp:1".to_string())?)?;
    let truncation = cfg.pick(a.truncation, "truncation")?.map(|t| positive("truncation", t)).transpose()?;
    let mut samples = cfg.or(a.samples, "samples", 200)?;
    let seed = ctx.seed("condense")?;
    if samples < MIN_SAMPLES {
        ctx.warn(format!("--samples {samples} raised to the floor of {MIN_SAMPLES}"));
        samples = MIN_SAMPLES;
    }
    let threshold = if alpha == 1.0 {
        k0_erdos(n)?
    } else if alpha == 0.5 {
        k0_d1(n)?
    } else {
        return Err(CliError::usage(format!(
            "condense counts lattice configurations exactly, which needs alpha = 1 or 0.5; got {alpha}"
        )));
    };
    let k = resolve_k(&k_rule, threshold.k0)?;
    if k == 0 || k > n {
        return Err(CliError::usage(format!("need 1 <= k <= n, got k = {k}")));
    }
    let drawn = if alpha == 1.0 {
        let table = count_table(n, k, ModeArg::Auto)?;
        sample_many(&table, n, k, samples, seed, SampleConvention::AtMostK, ctx.threads)?
    } else {
        let levels = (1..).map(|i: u64| i * i).take_while(|&e| e <= n).collect();
        LevelTable::build(levels, n, k)?.sample_many(k, samples, seed, ctx.threads)?
    };
    let problem = ParastatProblem::new(n, k, alpha)?;
    let params = solve_b_kappa(&problem)?;
    let convergence = weak_convergence_statistic(&drawn, &problem, &params, &phi, truncation)?;
    let summary = condensate_statistics(&drawn, k, threshold.k0, &DELTA1_GRID, delta)?;
    let band = match condensate_bound_check(&drawn, k, &threshold, delta, delta1) {
        Ok(b) => Some(b),
        Err(Error::HypothesisUnmet(m)) => {
            ctx.warn(format!("band check skipped: {m}"));
            None
        }
        Err(e) => return Err(e.into()),
    };
    let report = CondenseReport {
        n,
        k,
        k_rule,
        alpha,
        seed,
        median_band_pass: band.as_ref().map(|b| b.median_within_band),
        threshold,
        test_function: phi,
        convergence,
        summary,
        band,
    };
    ctx.render("condense", &report)
}
