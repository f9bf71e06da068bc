use clap::Args;
use parastat::quadrature::{
    bose_integral, bose_integral_quadrature, c1_const, c_one_dim, regularized_c, IntegralValue, Method, Rule,
    Tolerance,
};
use parastat::thresholds::{erdos_alpha, erdos_c};
use serde::Serialize;

use crate::emit::{csv_err, finish, fmt_f64};
use crate::error::CliError;
use crate::{Ctx, Format};

const ALPHA_GRID: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Extra alpha in (0, 1] to tabulate alongside the fixed grid.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
}

#[derive(Serialize)]
struct Entry {
    name: &'static str,
    alpha: Option<f64>,
    value: f64,
    abs_error_estimate: f64,
    method: Method,
}

impl Entry {
    fn new(name: &'static str, alpha: Option<f64>, v: IntegralValue) -> Self {
        Entry { name, alpha, value: v.value, abs_error_estimate: v.abs_error_estimate, method: v.method }
    }
}

fn entries(alphas: &[f64]) -> Result<Vec<Entry>, CliError> {
    let mut out = vec![
        Entry::new("erdos_c", None, IntegralValue::closed(erdos_c())),
        Entry::new("erdos_alpha", None, IntegralValue::closed(erdos_alpha())),
    ];
    let d1 = c_one_dim()?;
    out.push(Entry::new("c_one_dim_first_factor", None, d1.first_factor));
    out.push(Entry::new("c_one_dim_second_factor", None, d1.second_factor));
    out.push(Entry {
        name: "c_one_dim",
        alpha: None,
        value: d1.value,
        abs_error_estimate: d1.abs_error_estimate,
        method: Method::AdaptiveQuadrature,
    });
    for &a in alphas {
        out.push(Entry::new("bose_integral", Some(a), bose_integral(1.0, a)?));
        out.push(Entry::new(
            "bose_integral_quadrature",
            Some(a),
            bose_integral_quadrature(1.0, a, Rule::GaussKronrod, Tolerance::tight())?,
        ));
        if a < 1.0 {
            out.push(Entry::new("regularized_c", Some(a), regularized_c(a)?));
            out.push(Entry::new("c1", Some(a), c1_const(a)?));
        }
    }
    Ok(out)
}

pub fn run(a: &ConstantsArgs, ctx: &mut Ctx) -> Result<Vec<u8>, CliError> {
    let mut alphas = ALPHA_GRID.to_vec();
    if let Some(x) = ctx.cfg.pick(a.alpha, "alpha")? {
        if !(x > 0.0 && x <= 1.0) {
            return Err(parastat::Error::UnsupportedAlpha(x).into());
        }
        if !alphas.contains(&x) {
            alphas.push(x);
        }
    }
    let list = entries(&alphas)?;
    if ctx.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "alpha", "value", "abs_error_estimate", "method"]).map_err(csv_err)?;
        for e in &list {
            let method = serde_json::to_value(e.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            w.write_record([
                e.name.to_string(),
                e.alpha.map(fmt_f64).unwrap_or_default(),
                fmt_f64(e.value),
                fmt_f64(e.abs_error_estimate),
                method,
            ])
            .map_err(csv_err)?;
        }
        return finish(w);
    }
    ctx.render("constants", &list)
}
