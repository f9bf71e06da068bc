use std::fs;

use clap::{Args, ValueEnum};
use parastat::flicker::{
    cosine_transform, default_l_grid, estimate_alpha, flicker_verdict_with, FlickerForm, FlickerVerdict, Spectrum,
    TimeSeries,
};
use serde::Serialize;

use crate::emit::{csv_err, finish, fmt_f64};
use crate::error::CliError;
use crate::input::read_series;
use crate::{Ctx, Format};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormArg {
    Printed,
    Analogy,
    FixedPoint,
}

value_enum_from_str!(FormArg);

#[derive(Debug, Args)]
pub struct FlickerArgs {
    /// CSV with a `value` column and optionally an integer `t` column.
    #[arg(long)]
    input: String,
    /// Use this spectral exponent instead of fitting it.
    #[arg(long)]
    alpha: Option<f64>,
    /// Which critical formulas to apply (default printed).
    #[arg(long, value_enum)]
    form: Option<FormArg>,
    /// Also write the spectrum table i,a_i,A_l to this file.
    #[arg(long)]
    spectrum_out: Option<String>,
}

#[derive(Serialize)]
struct SpectrumSummary {
    s: usize,
    #[serde(rename = "A0")]
    a0: f64,
    global_energy: f64,
    #[serde(rename = "E_s")]
    e_s: f64,
    parseval_residual: Option<f64>,
}

#[derive(Serialize)]
struct FlickerReport {
    alpha_source: &'static str,
    l_grid: Vec<usize>,
    spectrum: SpectrumSummary,
    verdict: FlickerVerdict,
}

fn spectrum_table(spec: &Spectrum) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["i", "a_i", "A_l"]).map_err(csv_err)?;
    for (i, a) in spec.amplitudes.iter().enumerate() {
        let density = spec.density(i).map(fmt_f64).unwrap_or_default();
        w.write_record([i.to_string(), fmt_f64(*a), density]).map_err(csv_err)?;
    }
    finish(w)
}

pub fn run(a: &FlickerArgs, ctx: &mut Ctx) -> Result<Vec<u8>, CliError> {
    let series = TimeSeries::new(read_series(&a.input)?)?;
    let spec = cosine_transform(&series)?;
    if let Some(path) = &a.spectrum_out {
        fs::write(path, spectrum_table(&spec)?).map_err(|e| parastat::Error::Io(format!("{path}: {e}")))?;
    }
    if ctx.format == Format::Csv {
        return spectrum_table(&spec);
    }
    let form = match ctx.cfg.or(a.form, "form", FormArg::Printed)? {
        FormArg::Printed => FlickerForm::Printed,
        FormArg::Analogy => FlickerForm::Analogy,
        FormArg::FixedPoint => FlickerForm::FixedPoint,
    };
    let l_grid = default_l_grid(spec.s());
    let (alpha, alpha_source) = match ctx.cfg.pick(a.alpha, "alpha")? {
        Some(x) => (x, "given"),
        None => (estimate_alpha(&spec, &l_grid)?, "fitted"),
    };
    let verdict = flicker_verdict_with(&spec, alpha, form)?;
    let report = FlickerReport {
        alpha_source,
        l_grid,
        spectrum: SpectrumSummary {
            s: spec.s(),
            a0: spec.a0,
            global_energy: spec.global_energy,
            e_s: spec.e_s,
            parseval_residual: spec.parseval_residual,
        },
        verdict,
    };
    ctx.render("flicker", &report)
}
