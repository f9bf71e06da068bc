use clap::{Args, ValueEnum};
use parastat::solver::{entropy, solve_in, Ensemble, ParastatProblem, ThermoParams};
use serde::Serialize;

use crate::error::CliError;
use crate::Ctx;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EnsembleArg {
    Continuum,
    Lattice,
}

value_enum_from_str!(EnsembleArg);

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    /// Weight exponent in (0, 1] (default 1).
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Form of the constraints (default continuum).
    #[arg(long, value_enum)]
    ensemble: Option<EnsembleArg>,
}

#[derive(Serialize)]
struct SolveReport {
    problem: ParastatProblem,
    params: ThermoParams,
    theta: f64,
    mu_scaled: f64,
    entropy: f64,
}

pub fn run(a: &SolveArgs, ctx: &mut Ctx) -> Result<Vec<u8>, CliError> {
    let n = ctx.cfg.pick(a.n, "n")?.ok_or_else(|| CliError::usage("--n is required"))?;
    let k = ctx.cfg.pick(a.k, "k")?.ok_or_else(|| CliError::usage("--k is required"))?;
    let alpha = ctx.cfg.or(a.alpha, "alpha", 1.0)?;
    let ensemble = match ctx.cfg.or(a.ensemble, "ensemble", EnsembleArg::Continuum)? {
        EnsembleArg::Continuum => Ensemble::Continuum,
        EnsembleArg::Lattice => Ensemble::Lattice,
    };
    let problem = ParastatProblem::real(n, k, alpha)?;
    let params = solve_in(&problem, ensemble)?;
    let report = SolveReport {
        problem,
        params,
        theta: params.theta(),
        mu_scaled: params.mu_scaled(),
        entropy: entropy(&problem, &params)?,
    };
    ctx.render("solve", &report)
}
