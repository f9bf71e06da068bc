//! Acceptance checks run end to end against the library and the CLI.
//!
//! Each check returns a one-line detail string and a pass flag. The
//! `acceptance` test target prints them and fails if any check is red.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use parastat::condensate::{condensate_bound_check, weak_convergence_statistic, TestFunction};
use parastat::debt::{duration_threshold, mean_duration, FlowSeries};
use parastat::flicker::{cosine_transform, default_l_grid, estimate_alpha, reconstruct, TimeSeries};
use parastat::partitions::{count_at_most_k, sample_many, CountMode, PartitionRow, PartitionTable, SampleConvention};
use parastat::quadrature::{bose_integral, bose_integral_quadrature, Rule, Tolerance};
use parastat::solver::{lemma_exponent, log_prob_ratio, solve_b_kappa, ParastatProblem};
use parastat::thresholds::{erdos_c, flicker_gamma, k0_erdos, k0_numeric};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub type Outcome = Result<(bool, String), String>;

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub run: fn() -> Outcome,
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "quadrature constants", run: quadrature_constants },
        Criterion { id: 2, name: "erdos coefficient identity", run: erdos_coefficient },
        Criterion { id: 3, name: "exact partition counts", run: exact_counts },
        Criterion { id: 4, name: "most probable part count", run: most_probable },
        Criterion { id: 5, name: "sampler uniformity", run: sampler_uniformity },
        Criterion { id: 6, name: "condensate concentration", run: condensate_concentration },
        Criterion { id: 7, name: "weak convergence trend", run: weak_convergence },
        Criterion { id: 8, name: "solver residuals and windows", run: solver_checks },
        Criterion { id: 9, name: "saddle-point counts vs exact", run: saddle_vs_exact },
        Criterion { id: 10, name: "cosine transform and flicker fit", run: flicker_checks },
        Criterion { id: 11, name: "debt stretch sweep", run: debt_sweep },
        Criterion { id: 12, name: "cli determinism", run: cli_determinism },
    ]
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

/// zeta(s) from 10^6 direct terms plus an Euler-Maclaurin tail.
fn zeta_series(s: f64) -> f64 {
    let n = 1_000_000u32;
    let head: f64 = (1..=n).rev().map(|i| (i as f64).powf(-s)).sum();
    let nf = n as f64;
    head + nf.powf(1.0 - s) / (s - 1.0) - 0.5 * nf.powf(-s) + s * nf.powf(-s - 1.0) / 12.0
}

fn quadrature_constants() -> Outcome {
    let start = Instant::now();
    let tol = Tolerance::tight();
    let planar = bose_integral_quadrature(1.0, 1.0, Rule::GaussKronrod, tol).map_err(err)?.value;
    let mut worst_planar = (planar - PI * PI / 6.0).abs();
    worst_planar = worst_planar.max((bose_integral(1.0, 1.0).map_err(err)?.value - PI * PI / 6.0).abs());
    let mut quad = Vec::new();
    for a in [0.25, 0.5, 0.75] {
        quad.push((a, bose_integral_quadrature(1.0, a, Rule::GaussKronrod, tol).map_err(err)?.value));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let mut worst = 0.0f64;
    for (a, q) in quad {
        let series = a * statrs::function::gamma::gamma(1.0 + a) * zeta_series(1.0 + a);
        worst = worst.max((q - series).abs() / series);
    }
    let pass = worst_planar < 1e-10 && worst < 1e-8 && elapsed < 1.0;
    Ok((pass, format!("|B(1)-pi^2/6| = {worst_planar:.1e}, worst rel. error vs series {worst:.1e}, {elapsed:.3} s")))
}

fn erdos_coefficient() -> Outcome {
    let lhs = 0.5 / (PI * PI / 6.0).sqrt();
    let rhs = 1.5f64.sqrt() / PI;
    let via_c = 1.0 / erdos_c();
    let gap = (lhs - rhs).abs().max((via_c - rhs).abs());
    Ok((gap <= 4.0 * f64::EPSILON * rhs, format!("{lhs:.17} vs {rhs:.17}, gap {gap:.1e}")))
}

/// p(n) for n <= max by Euler's pentagonal recurrence.
fn pentagonal(max: usize) -> Vec<u128> {
    let mut p = vec![0u128; max + 1];
    p[0] = 1;
    for n in 1..=max {
        let mut acc: i128 = 0;
        for j in 1.. {
            let g1 = j * (3 * j - 1) / 2;
            if g1 > n {
                break;
            }
            let sign = if j % 2 == 1 { 1 } else { -1 };
            acc += sign * p[n - g1] as i128;
            let g2 = j * (3 * j + 1) / 2;
            if g2 <= n {
                acc += sign * p[n - g2] as i128;
            }
        }
        p[n] = acc as u128;
    }
    p
}

/// Counts of partitions of n by number of parts, by brute-force enumeration.
fn enumerate_by_parts(n: u64) -> Vec<u64> {
    fn go(rest: u64, max_part: u64, parts: usize, out: &mut Vec<u64>) {
        if rest == 0 {
            out[parts] += 1;
            return;
        }
        for p in (1..=max_part.min(rest)).rev() {
            go(rest - p, p, parts + 1, out);
        }
    }
    let mut out = vec![0; n as usize + 1];
    go(n, n, 0, &mut out);
    out
}

fn exact_counts() -> Outcome {
    let table = PartitionTable::build(500, 500, CountMode::Exact).map_err(err)?;
    let oracle = pentagonal(500);
    for (n, want) in oracle.iter().enumerate() {
        let got = count_at_most_k(&table, n as u64, n as u64).map_err(err)?;
        let got = got.as_exact().ok_or("table is not exact")?.to_string();
        if got != want.to_string() {
            return Ok((false, format!("p({n}) = {got}, pentagonal gives {want}")));
        }
    }
    for n in 1..=14u64 {
        let by_parts = enumerate_by_parts(n);
        for k in 1..=n {
            let got = table.exactly(n, k).map_err(err)?;
            let got = got.as_exact().ok_or("table is not exact")?.to_string();
            if got != by_parts[k as usize].to_string() {
                return Ok((false, format!("p_{k}({n}) = {got}, enumeration gives {}", by_parts[k as usize])));
            }
        }
    }
    Ok((true, format!("p(n) exact for n <= 500 (p(500) = {}), p_k(n) enumerated for n <= 14", oracle[500])))
}

fn most_probable() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [1000u64, 5000, 10000] {
        let row = PartitionRow::build(n, n, CountMode::LogSpace).map_err(err)?;
        let mode = row.most_probable() as f64;
        let k0 = k0_erdos(n).map_err(err)?.k0;
        let ratio = mode / k0;
        pass &= (0.7..=1.4).contains(&ratio);
        parts.push(format!("n={n}: mode {mode} / k0 {k0:.1} = {ratio:.3}"));
    }
    Ok((pass, parts.join(", ")))
}

/// All partitions of n as non-increasing part lists.
fn all_partitions(n: u64) -> Vec<Vec<u64>> {
    fn go(rest: u64, max_part: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=max_part.min(rest)).rev() {
            cur.push(p);
            go(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

fn sampler_uniformity() -> Outcome {
    let n = 12;
    let draws = 100_000;
    let cells = all_partitions(n);
    let table = PartitionTable::build(n, n, CountMode::Exact).map_err(err)?;
    let chi = ChiSquared::new((cells.len() - 1) as f64).map_err(err)?;
    let expected = draws as f64 / cells.len() as f64;
    let mut worst_p = 1.0f64;
    for seed in 1..=5u64 {
        let mut seen: HashMap<Vec<u64>, u64> = HashMap::new();
        for s in sample_many(&table, n, n, draws, seed, SampleConvention::AtMostK, 1).map_err(err)? {
            *seen.entry(s.parts_desc()).or_insert(0) += 1;
        }
        if seen.len() != cells.len() {
            return Ok((false, format!("seed {seed}: {} distinct partitions, expected {}", seen.len(), cells.len())));
        }
        let stat: f64 = cells
            .iter()
            .map(|c| {
                let o = *seen.get(c).unwrap_or(&0) as f64;
                (o - expected) * (o - expected) / expected
            })
            .sum();
        worst_p = worst_p.min(1.0 - chi.cdf(stat));
    }
    Ok((worst_p >= 1e-3, format!("{} partitions of {n}, smallest p-value over 5 seeds {worst_p:.4}", cells.len())))
}

fn condensate_concentration() -> Outcome {
    let n = 10_000;
    let threshold = k0_erdos(n).map_err(err)?;
    let k = (3.0 * threshold.k0).round() as u64;
    let table = PartitionTable::build(n, k, CountMode::auto(n)).map_err(err)?;
    let drawn = sample_many(&table, n, k, 200, 7, SampleConvention::AtMostK, 1).map_err(err)?;
    let r = condensate_bound_check(&drawn, k, &threshold, 0.1, 0.15).map_err(err)?;
    Ok((
        r.median_within_band && r.bound_satisfied,
        format!(
            "k = {k}, median |N0-(k-k0)| = {:.2} vs band {:.2}, violations {:.3} vs bound {:.1e} + {:.1e}",
            r.median_abs_deviation,
            r.delta1 * r.band_scale,
            r.violation_fraction,
            r.tail_bound,
            r.mc_slack
        ),
    ))
}

fn weak_convergence() -> Outcome {
    let phi = TestFunction::ExpDecay { rate: 1.0 };
    let mut medians = Vec::new();
    for n in [1000u64, 10_000] {
        let k = (0.5 * k0_erdos(n).map_err(err)?.k0).round() as u64;
        let table = PartitionTable::build(n, k, CountMode::auto(n)).map_err(err)?;
        let drawn = sample_many(&table, n, k, 100, 7, SampleConvention::AtMostK, 1).map_err(err)?;
        let problem = ParastatProblem::new(n, k, 1.0).map_err(err)?;
        let params = solve_b_kappa(&problem).map_err(err)?;
        let r = weak_convergence_statistic(&drawn, &problem, &params, &phi, None).map_err(err)?;
        medians.push((n, k, r.median_abs));
    }
    let pass = medians[1].2 < medians[0].2;
    let text: Vec<String> = medians.iter().map(|(n, k, m)| format!("n={n} k={k}: {m:.4}")).collect();
    Ok((pass, format!("median |statistic| {}", text.join(" -> "))))
}

fn solver_checks() -> Outcome {
    let mut worst_residual = 0.0f64;
    let mut worst_kappa = 0.0f64;
    for alpha in [0.5, 1.0] {
        for n in [1e3, 1e4, 1e5] {
            let k0 = k0_numeric(n, alpha).map_err(err)?.result.k0;
            // 2 alphas x 3 sizes x 2 multiples of k0: a 12-point grid
            for factor in [0.5, 2.0] {
                let k = factor * k0;
                let p = solve_b_kappa(&ParastatProblem::real(n, k, alpha).map_err(err)?).map_err(err)?;
                worst_residual = worst_residual.max(p.residuals[0].abs()).max(p.residuals[1].abs());
            }
            let p = solve_b_kappa(&ParastatProblem::real(n, k0, alpha).map_err(err)?).map_err(err)?;
            worst_residual = worst_residual.max(p.residuals[0].abs()).max(p.residuals[1].abs());
            worst_kappa = worst_kappa.max(p.kappa.abs() / p.b);
        }
    }
    let mut windows = Vec::new();
    let mut in_window = true;
    for alpha in [1.0, 0.5] {
        let n = 1e6;
        let k = 10.0 * k0_numeric(n, alpha).map_err(err)?.result.k0;
        let p = solve_b_kappa(&ParastatProblem::real(n, k, alpha).map_err(err)?).map_err(err)?;
        let ratio = p.mu_scaled().ln() / k.ln();
        in_window &= (ratio - lemma_exponent(alpha)).abs() <= 0.15;
        windows.push(format!("alpha={alpha}: {ratio:.3} vs {:.3}", lemma_exponent(alpha)));
    }
    let pass = worst_residual < 1e-8 && worst_kappa < 1e-3 && in_window;
    Ok((
        pass,
        format!("residual {worst_residual:.1e}, |kappa|/b at k0 {worst_kappa:.1e}, log mu/log k {}", windows.join(", ")),
    ))
}

fn saddle_vs_exact() -> Outcome {
    let n = 2000;
    let k0 = k0_erdos(n).map_err(err)?.k0.round() as u64;
    let table = PartitionTable::build(n, k0 + 40, CountMode::LogSpace).map_err(err)?;
    let ln_dp = |k: u64| table.exactly(n, k).map(|c| c.ln());
    let base = ln_dp(k0).map_err(err)?;
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for dk in [20, 40] {
        let k = k0 + dk;
        let exact = ln_dp(k).map_err(err)? - base;
        let model = log_prob_ratio(n as f64, 1.0, k as f64, k0 as f64).map_err(err)?;
        let rel = (model - exact).abs() / exact.abs();
        worst = worst.max(rel);
        parts.push(format!("k0+{dk}: {model:.4} vs {exact:.4}"));
    }
    Ok((worst <= 0.25, format!("ln p_k/p_k0 at n={n}, k0={k0}: {}, worst rel. error {worst:.3}", parts.join(", "))))
}

/// A series whose cosine amplitudes fall off as i^(-alpha/2), with signs
/// from a fixed linear congruential stream.
fn power_law_series(alpha: f64, s: usize, mut state: u64) -> Vec<f64> {
    let a: Vec<f64> = (0..=s)
        .map(|i| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let sign = if state >> 63 == 0 { 1.0 } else { -1.0 };
            if i == 0 {
                0.0
            } else {
                sign * (i as f64).powf(-alpha / 2.0)
            }
        })
        .collect();
    reconstruct(&a)
}

fn flicker_checks() -> Outcome {
    let s = 512;
    let mut worst_trip = 0.0f64;
    let mut worst_parseval = 0.0f64;
    let mut fits = Vec::new();
    let mut fits_ok = true;
    for (j, alpha) in [0.5, 1.0, 1.5].into_iter().enumerate() {
        let b = power_law_series(alpha, s, 11 + j as u64);
        let spec = cosine_transform(&TimeSeries::new(b.clone()).map_err(err)?).map_err(err)?;
        let back = reconstruct(&spec.amplitudes);
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst_trip = worst_trip.max(b.iter().zip(&back).map(|(x, y)| (x - y).abs() / scale).fold(0.0, f64::max));
        worst_parseval = worst_parseval.max(spec.parseval_residual.unwrap_or(f64::INFINITY));
        let fit = estimate_alpha(&spec, &default_l_grid(s)).map_err(err)?;
        fits_ok &= (fit - alpha).abs() <= 0.15;
        fits.push(format!("{alpha} -> {fit:.3}"));
    }
    let gamma = flicker_gamma(1.0).map_err(err)?;
    let pass = worst_trip < 1e-8 && worst_parseval < 1e-8 && fits_ok && gamma == 0.25;
    Ok((
        pass,
        format!(
            "round trip {worst_trip:.1e}, Parseval {worst_parseval:.1e}, alpha fits {}, gamma(1) = {gamma}",
            fits.join(", ")
        ),
    ))
}

fn debt_sweep() -> Outcome {
    let b = 0.05;
    let base = FlowSeries::from_buckets(vec![1000.0, 600.0, 100.0], vec![1.0; 3], vec![false; 3]).map_err(err)?;
    let gap = |rho: f64| -> Result<f64, String> {
        let s = base.stretched(rho).map_err(err)?;
        let v = duration_threshold(&s, b).map_err(err)?;
        Ok(mean_duration(&s).map_err(err)? - v.threshold)
    };
    let steps = 20;
    let rhos: Vec<f64> = (0..=steps).map(|i| 1.0 + 4.0 * i as f64 / steps as f64).collect();
    let mut crisis = Vec::new();
    for &rho in &rhos {
        crisis.push(duration_threshold(&base.stretched(rho).map_err(err)?, b).map_err(err)?.crisis);
    }
    let flips: Vec<usize> = (1..crisis.len()).filter(|&i| crisis[i] != crisis[i - 1]).collect();
    if flips.len() != 1 {
        return Ok((false, format!("{} verdict flips on the grid, expected exactly one", flips.len())));
    }
    let (mut lo, mut hi) = (rhos[flips[0] - 1], rhos[flips[0]]);
    let g_lo = gap(lo)?;
    if g_lo.signum() == gap(hi)?.signum() {
        return Ok((false, format!("T - threshold keeps its sign on [{lo}, {hi}]")));
    }
    let (a, c) = (lo, hi);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)?.signum() == g_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let pass = root > a && root < c;
    Ok((pass, format!("one flip in rho in [{a:.2}, {c:.2}], T = threshold at rho = {root:.6}")))
}

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.pop();
    p.push("cli/fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn cli_determinism() -> Outcome {
    let portfolio = fixture("sample_portfolio.csv");
    let series = fixture("flicker_1f.csv");
    let runs: Vec<Vec<&str>> = vec![
        vec!["threshold", "--n", "10000", "--alpha", "1"],
        vec!["threshold", "--n", "10000", "--dim", "1"],
        vec!["solve", "--n", "2000", "--k", "150", "--alpha", "1"],
        vec!["--seed", "5", "partition-sample", "--n", "200", "--k", "30", "--samples", "20"],
        vec!["--seed", "7", "condense", "--n", "2000", "--k", "auto2", "--samples", "50"],
        vec!["debt", "--input", &portfolio, "--stretch", "2"],
        vec!["flicker", "--input", &series],
        vec!["constants"],
    ];
    let mut bytes = 0;
    for args in &runs {
        let call = || parastat_cli::run(std::iter::once("parastat").chain(args.iter().copied()));
        let (first, second) = (call(), call());
        if first.code != 0 {
            return Ok((false, format!("`{}` exited with {}", args.join(" "), first.code)));
        }
        if first.stdout != second.stdout || first.stderr != second.stderr {
            return Ok((false, format!("`{}` differs between runs", args.join(" "))));
        }
        bytes += first.stdout.len();
    }
    Ok((true, format!("{} invocations byte-identical across two runs ({bytes} bytes)", runs.len())))
}
