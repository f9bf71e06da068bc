use clap::Args;
use parastat::quadrature::{bose_integral, c_one_dim, regularized_c};
use parastat::thresholds::{
    b_d1, erdos_alpha, erdos_c, k0_d1, k0_d1_quadratic, k0_erdos, k0_erdos_literal, k0_general, k0_leading,
    k0_numeric, D1Convention, ThresholdResult,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::Ctx;

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Total energy n (a positive integer).
    #[arg(long)]
    n: Option<u64>,
    /// Weight exponent alpha in (0, 1].
    #[arg(long, allow_negative_numbers = true, conflicts_with = "dim")]
    alpha: Option<f64>,
    /// Dimension d in (0, 2]; alpha = d / 2.
    #[arg(long, allow_negative_numbers = true)]
    dim: Option<f64>,
}

#[derive(Serialize)]
struct Variant {
    label: &'static str,
    #[serde(flatten)]
    result: ThresholdResult,
}

#[derive(Serialize)]
struct CrossCheck {
    k0_numeric: f64,
    b: f64,
    residual: f64,
    /// (k0_numeric - primary) / primary.
    relative_difference: f64,
}

#[derive(Serialize)]
struct ThresholdReport {
    n: u64,
    alpha: f64,
    primary: &'static str,
    variants: Vec<Variant>,
    cross_check: Option<CrossCheck>,
    extras: Value,
    constants: Value,
}

fn resolve_alpha(a: &ThresholdArgs, ctx: &Ctx) -> Result<f64, CliError> {
    let (alpha, dim) = if a.alpha.is_some() || a.dim.is_some() {
        (a.alpha, a.dim)
    } else {
        (ctx.cfg.get::<f64>("alpha")?, ctx.cfg.get::<f64>("dim")?)
    };
    let alpha = match (alpha, dim) {
        (Some(x), None) => x,
        (None, Some(d)) => d / 2.0,
        (Some(_), Some(_)) => return Err(CliError::usage("give either alpha or dim, not both")),
        (None, None) => return Err(CliError::usage("one of --alpha or --dim is required")),
    };
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(parastat::Error::UnsupportedAlpha(alpha).into());
    }
    Ok(alpha)
}

pub fn run(a: &ThresholdArgs, ctx: &mut Ctx) -> Result<Vec<u8>, CliError> {
    let n = ctx.cfg.pick(a.n, "n")?.ok_or_else(|| CliError::usage("--n is required"))?;
    let alpha = resolve_alpha(a, ctx)?;
    let nf = n as f64;
    let mut variants = Vec::new();
    let (primary, extras, constants);
    if alpha == 1.0 {
        variants.push(Variant { label: "k0_leading", result: k0_leading(n)? });
        variants.push(Variant { label: "k0_erdos", result: k0_erdos(n)? });
        primary = "k0_erdos";
        extras = json!({ "k0_erdos_literal": k0_erdos_literal(n)? });
        constants = json!({
            "c": erdos_c(),
            "erdos_alpha": erdos_alpha(),
            "bose_integral_1_1": bose_integral(1.0, 1.0)?,
        });
    } else {
        variants.push(Variant { label: "k0_general", result: k0_general(nf, alpha)? });
        primary = "k0_general";
        let mut c = json!({
            "c": regularized_c(alpha)?,
            "bose_integral_1_alpha": bose_integral(1.0, alpha)?,
        });
        if alpha == 0.5 {
            variants.push(Variant { label: "k0_d1", result: k0_d1(n)? });
            let mut quad = serde_json::Map::new();
            for (name, conv) in [("rightmost_printed", D1Convention::RightmostPrinted), ("half_factor", D1Convention::HalfFactor)] {
                let root = match k0_d1_quadratic(n, conv) {
                    Ok(v) => json!(v),
                    Err(e) => {
                        ctx.warn(format!("k0_d1_quadratic ({name}): {e}"));
                        Value::Null
                    }
                };
                quad.insert(name.into(), json!({ "k0": root, "b": b_d1(nf, conv)? }));
            }
            extras = json!({ "k0_d1_quadratic": quad });
            c["c_one_dim"] = serde_json::to_value(c_one_dim()?).expect("plain struct");
        } else {
            extras = json!({});
        }
        constants = c;
    }
    let reference = variants.iter().find(|v| v.label == primary).map(|v| v.result.k0).expect("primary present");
    let cross_check = match k0_numeric(nf, alpha) {
        Ok(t) => {
            let check = CrossCheck {
                k0_numeric: t.result.k0,
                b: t.b,
                residual: t.residual,
                relative_difference: (t.result.k0 - reference) / reference,
            };
            variants.push(Variant { label: "k0_numeric", result: t.result });
            Some(check)
        }
        Err(e) => {
            ctx.warn(format!("numeric fixed point unavailable: {e}"));
            None
        }
    };
    for v in &variants {
        for w in &v.result.warnings {
            ctx.warn(format!("{}: {w}", v.label));
        }
    }
    let report = ThresholdReport { n, alpha, primary, variants, cross_check, extras, constants };
    ctx.render("threshold", &report)
}
