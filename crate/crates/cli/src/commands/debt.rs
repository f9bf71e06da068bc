use std::fs;

use clap::Args;
use parastat::debt::{
    duration_threshold, estimate_b, ingest, BEstimate, CrisisVerdict, FlowSeries, IngestConfig,
    LambdaCurve, TailClass, DEFAULT_LINEARITY_TOL,
};
use serde::Serialize;

use super::positive;
use crate::emit::{csv_err, finish, fmt_f64};
use crate::error::CliError;
use crate::input::read_debts;
use crate::Ctx;

/// Points of the lambda curve written by `--plot-out`.
const PLOT_POINTS: usize = 200;

#[derive(Debug, Args)]
pub struct DebtArgs {
    /// CSV with columns size, duration and optionally timestamp.
    #[arg(long)]
    input: String,
    /// Averaging window in days (default 365).
    #[arg(long)]
    window: Option<f64>,
    /// Durations are rounded to multiples of this (default 1 day).
    #[arg(long)]
    duration_granularity: Option<f64>,
    /// Insert virtual durations at this spacing into wide gaps.
    #[arg(long)]
    fill_granularity: Option<f64>,
    /// Input duration units per day (default 1).
    #[arg(long)]
    unit_factor: Option<f64>,
    /// Use this inverse temperature instead of estimating it.
    #[arg(long)]
    b: Option<f64>,
    /// First rank of the estimation window (default max(2, buckets / 4)).
    #[arg(long)]
    s: Option<usize>,
    /// The window spans ranks s..a s (default 2).
    #[arg(long)]
    a: Option<f64>,
    /// Largest relative rms residual of the linear window fit (default 0.05).
    #[arg(long)]
    linearity_tol: Option<f64>,
    /// Sweep the duration stretch rho from 1 to this value.
    #[arg(long)]
    stretch: Option<f64>,
    /// Number of sweep intervals (default 20).
    #[arg(long)]
    steps: Option<usize>,
    /// Write lambda(x) and the flows to this CSV file.
    #[arg(long)]
    plot_out: Option<String>,
}

#[derive(Serialize)]
struct LambdaSummary {
    knots: usize,
    left_exponent: f64,
    right_slope: f64,
    class: Option<TailClass>,
}

#[derive(Serialize)]
struct SweepPoint {
    rho: f64,
    verdict: CrisisVerdict,
}

#[derive(Serialize)]
struct Sweep {
    points: Vec<SweepPoint>,
    flips: usize,
}

#[derive(Serialize)]
struct DebtReport {
    buckets: usize,
    virtual_knots: usize,
    reference_duration: f64,
    b_source: &'static str,
    b_estimate: Option<BEstimate>,
    lambda: LambdaSummary,
    verdict: CrisisVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    stretch: Option<Sweep>,
}

fn write_plot(path: &str, curve: &LambdaCurve, series: &FlowSeries) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["series", "x", "y"]).map_err(csv_err)?;
    let top = curve.xs[curve.xs.len() - 1];
    for i in 1..=PLOT_POINTS {
        let x = top * i as f64 / PLOT_POINTS as f64;
        w.write_record(["lambda", &fmt_f64(x), &fmt_f64(curve.eval(x))]).map_err(csv_err)?;
    }
    for (l, e) in series.durations_desc.iter().zip(&series.flows) {
        w.write_record(["flow", &fmt_f64(*l), &fmt_f64(*e)]).map_err(csv_err)?;
    }
    fs::write(path, finish(w)?).map_err(|e| parastat::Error::Io(format!("{path}: {e}")))?;
    Ok(())
}

pub fn run(a: &DebtArgs, ctx: &mut Ctx) -> Result<Vec<u8>, CliError> {
    let cfg = &ctx.cfg;
    let mut ic = IngestConfig::new(positive("window", cfg.or(a.window, "window", 365.0)?)?);
    ic.duration_granularity = positive("duration-granularity", cfg.or(a.duration_granularity, "duration-granularity", 1.0)?)?;
    ic.fill_granularity =
        cfg.pick(a.fill_granularity, "fill-granularity")?.map(|g| positive("fill-granularity", g)).transpose()?;
    ic.unit_factor = positive("unit-factor", cfg.or(a.unit_factor, "unit-factor", 1.0)?)?;
    let records = read_debts(&a.input)?;
    let series = ingest(&records, &ic)?;

    let (b, b_estimate, b_source) = match cfg.pick(a.b, "b")? {
        Some(b) => (positive("b", b)?, None, "given"),
        None => {
            let s = cfg.or(a.s, "s", (series.len() / 4).max(2))?;
            let factor = cfg.or(a.a, "a", 2.0)?;
            let tol = positive("linearity-tol", cfg.or(a.linearity_tol, "linearity-tol", DEFAULT_LINEARITY_TOL)?)?;
            let est = estimate_b(&series, s, factor, tol)?;
            (est.b, Some(est), "estimated")
        }
    };
    let base = duration_threshold(&series, b)?;
    let curve = &series.lambda;

    let stretch = match cfg.pick(a.stretch, "stretch")? {
        None => None,
        Some(top) => {
            if !(top >= 1.0 && top.is_finite()) {
                return Err(CliError::usage(format!("--stretch must be at least 1, got {top}")));
            }
            let steps = cfg.or(a.steps, "steps", 20)?.max(1);
            let mut points = Vec::with_capacity(steps + 1);
            for i in 0..=steps {
                let rho = 1.0 + (top - 1.0) * i as f64 / steps as f64;
                points.push(SweepPoint { rho, verdict: duration_threshold(&series.stretched(rho)?, b)? });
            }
            let flips = points.windows(2).filter(|w| w[0].verdict.crisis != w[1].verdict.crisis).count();
            Some(Sweep { points, flips })
        }
    };
    if let Some(path) = &a.plot_out {
        write_plot(path, curve, &series)?;
    }
    let report = DebtReport {
        buckets: series.len(),
        virtual_knots: series.virtual_knots.iter().filter(|&&v| v).count(),
        reference_duration: series.reference_duration,
        b_source,
        b_estimate,
        lambda: LambdaSummary {
            knots: curve.xs.len(),
            left_exponent: curve.left_exponent,
            right_slope: curve.right_slope,
            class: curve.classify().ok(),
        },
        verdict: base,
        stretch,
    };
    ctx.render("debt", &report)
}
