use serde::Serialize;

use super::ingest::FlowSeries;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Rule, Tolerance};

/// Relative rms residual above which the window is not treated as linear.
pub const DEFAULT_LINEARITY_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BEstimate {
    pub b: f64,
    /// Slope of l_1 / l_i against the rank i over the window.
    pub slope: f64,
    pub window: (usize, usize),
    /// Empirical sum E_i / sum N_i over the window.
    pub t_window: f64,
    pub linear_residual: f64,
}

/// Model window mean of k i under the weight 1/(e^{u i} - 1), u = k b.
fn model_ratio(u: f64, k: f64, lo: f64, hi: f64) -> Result<f64> {
    let tol = Tolerance { abs: 0.0, rel: 1e-12, ..Tolerance::default() };
    // weights rescaled by e^{u lo} to stay finite for large u
    let w = |i: f64| (-u * (i - lo)).exp() / -(-u * i).exp_m1();
    let num = integrate(|i| i * w(i), lo, hi, tol, Rule::GaussKronrod)?.value;
    let den = integrate(w, lo, hi, tol, Rule::GaussKronrod)?.value;
    Ok(k * num / den)
}

/// Fit b from the windowed mean duration over ranks [s, a s].
///
/// On the window l_1 / l_i is taken to be k i (a straight line through the
/// origin, fitted by least squares). The model mean of k i under the Bose
/// weight 1/(e^{k b i} - 1) falls from k (a-1) s / ln a to k s as b grows,
/// so the match with the empirical window mean has a single root.
pub fn estimate_b(series: &FlowSeries, s: usize, a: f64, linearity_tol: f64) -> Result<BEstimate> {
    let hi = (a * s as f64).floor() as usize;
    if s < 1 || !(a > 1.0) || hi > series.len() || hi < s + 2 {
        return Err(Error::WindowOutOfRange(format!(
            "window [{s}, {a} * {s}] does not fit a series of {} buckets with at least 3 points",
            series.len()
        )));
    }
    let unit = series.unit_flows();
    let ranks: Vec<f64> = (s..=hi).map(|i| i as f64).collect();
    let vals: Vec<f64> = (s..=hi).map(|i| unit[i - 1]).collect();
    let k = ranks.iter().zip(&vals).map(|(i, e)| i * e).sum::<f64>() / ranks.iter().map(|i| i * i).sum::<f64>();
    let ss: f64 = ranks.iter().zip(&vals).map(|(i, e)| (e - k * i).powi(2)).sum();
    let norm: f64 = vals.iter().map(|e| e * e).sum();
    let residual = (ss / norm).sqrt();
    if residual > linearity_tol {
        return Err(Error::NonlinearWindow { residual, tolerance: linearity_tol });
    }
    let flows: f64 = series.flows[s - 1..hi].iter().sum();
    let debts: f64 = series.debt_means[s - 1..hi].iter().sum();
    let target = flows / debts;
    let (lo_f, hi_f) = (s as f64, hi as f64);
    // g(ln u) = model - target is decreasing in u
    let g = |lu: f64| model_ratio(lu.exp(), k, lo_f, hi_f).map(|m| m - target);
    let (mut a_lu, mut b_lu) = ((1e-8 / hi_f).ln(), (200.0 / lo_f).ln());
    let (ga, gb) = (g(a_lu)?, g(b_lu)?);
    if !(ga > 0.0 && gb < 0.0) {
        return Err(Error::NoConvergence(format!(
            "window mean {target:.6e} lies outside the model range [{:.6e}, {:.6e}]",
            gb + target,
            ga + target
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a_lu + b_lu);
        if g(mid)? > 0.0 {
            a_lu = mid;
        } else {
            b_lu = mid;
        }
        if b_lu - a_lu < 1e-13 {
            break;
        }
    }
    let u = (0.5 * (a_lu + b_lu)).exp();
    Ok(BEstimate { b: u / k, slope: k, window: (s, hi), t_window: target, linear_residual: residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::debt::{ingest, DebtRecord, IngestConfig};

    /// l_i = L / i, so l_1 / l_i = i, and N_i = 1/(e^{b i} - 1).
    fn synthetic(b: f64, count: usize) -> FlowSeries {
        let records: Vec<DebtRecord> = (1..=count)
            .map(|i| DebtRecord { size: 1.0 / (b * i as f64).exp_m1(), duration: 1e4 / i as f64, timestamp: None })
            .collect();
        let mut cfg = IngestConfig::new(1.0);
        cfg.duration_granularity = 1e-9;
        ingest(&records, &cfg).unwrap()
    }

    #[test]
    fn recovers_b_from_model_series() {
        let series = synthetic(0.02, 200);
        let e2 = estimate_b(&series, 50, 2.0, DEFAULT_LINEARITY_TOL).unwrap();
        assert!((e2.slope - 1.0).abs() < 1e-9);
        assert!((e2.b - 0.02).abs() < 0.1 * 0.02, "b = {}", e2.b);
        let e3 = estimate_b(&series, 50, 3.0, DEFAULT_LINEARITY_TOL).unwrap();
        assert!((e3.b - e2.b).abs() < 0.15 * e2.b);
    }

    #[test]
    fn curved_window_is_rejected() {
        let records: Vec<DebtRecord> = (1..=60)
            .map(|i| DebtRecord { size: 1.0, duration: 1e6 / (i * i) as f64, timestamp: None })
            .collect();
        let mut cfg = IngestConfig::new(1.0);
        cfg.duration_granularity = 1e-9;
        let series = ingest(&records, &cfg).unwrap();
        assert!(matches!(estimate_b(&series, 10, 3.0, 0.01), Err(Error::NonlinearWindow { .. })));
    }

    #[test]
    fn window_must_fit() {
        let series = synthetic(0.02, 40);
        assert!(matches!(estimate_b(&series, 30, 2.0, 0.05), Err(Error::WindowOutOfRange(_))));
    }
}
