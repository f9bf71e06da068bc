//! Debt-crisis thresholds from a portfolio of (size, duration) records.
//!
//! Records are bucketed by duration, averaged over a time window and turned
//! into flows E_i = N_i l_1 / l_i. The normalized flow curve lambda(x)
//! decides which threshold applies to the mean duration T.

mod estimate;
mod ingest;
mod lambda;

pub use estimate::{estimate_b, BEstimate, DEFAULT_LINEARITY_TOL};
pub use ingest::{ingest, DebtRecord, FlowSeries, IngestConfig};
pub use lambda::{LambdaCurve, TailClass};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{bose_integral, regularized_c};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    IntegralRatio,
    #[serde(rename = "critical_Tcr")]
    CriticalTcr,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrisisVerdict {
    #[serde(rename = "mean_duration_T")]
    pub mean_duration_t: f64,
    pub threshold: f64,
    pub threshold_kind: ThresholdKind,
    pub crisis: bool,
    pub b_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_fit: Option<f64>,
}

/// T = sum of flows over sum of debt means.
pub fn mean_duration(series: &FlowSeries) -> Result<f64> {
    if series.flows.is_empty() {
        return Err(Error::EmptySeries);
    }
    let flows: f64 = series.flows.iter().sum();
    let debts: f64 = series.debt_means.iter().sum();
    Ok(flows / debts)
}

pub const ALPHA_EDGE: f64 = 1e-6;

/// Critical mean duration c0 c^(-1/alpha) b^(-alpha) for 0 < alpha < 1.
pub fn critical_duration(alpha: f64, b: f64) -> Result<f64> {
    // c(alpha) blows up like 1/(1 - alpha); within ALPHA_EDGE of 1 the
    // planar and fractional laws cannot be told apart.
    if !(alpha > 0.0 && alpha < 1.0 - ALPHA_EDGE) {
        return Err(Error::DivergenceUndetermined(format!("fitted alpha {alpha} is outside (0, 1)")));
    }
    let c0 = bose_integral(1.0, alpha)?.value;
    let c = regularized_c(alpha)?.value;
    Ok(c0 * c.powf(-1.0 / alpha) * b.powf(-alpha))
}

/// Threshold for the mean duration and the resulting verdict.
/// T exactly at the threshold is not a crisis.
pub fn duration_threshold(series: &FlowSeries, b: f64) -> Result<CrisisVerdict> {
    verdict_for_curve(&series.lambda, mean_duration(series)?, b)
}

pub fn verdict_for_curve(curve: &LambdaCurve, t: f64, b: f64) -> Result<CrisisVerdict> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("b must be positive, got {b}")));
    }
    let (threshold, threshold_kind, alpha_fit) = match curve.classify()? {
        TailClass::Convergent => {
            let (i1, i2) = curve.integrals(b)?;
            (i2 / i1, ThresholdKind::IntegralRatio, None)
        }
        TailClass::DivergentAtZero { alpha } => (critical_duration(alpha, b)?, ThresholdKind::CriticalTcr, Some(alpha)),
    };
    Ok(CrisisVerdict { mean_duration_t: t, threshold, threshold_kind, crisis: t < threshold, b_estimate: b, alpha_fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(pairs: &[(f64, f64)]) -> Vec<DebtRecord> {
        pairs.iter().map(|&(size, duration)| DebtRecord { size, duration, timestamp: None }).collect()
    }

    #[test]
    fn mean_duration_arithmetic() {
        let cfg = IngestConfig::new(1.0);
        let s = ingest(&records(&[(1.0, 40.0), (1.0, 20.0), (1.0, 10.0)]), &cfg).unwrap();
        assert!((mean_duration(&s).unwrap() - 7.0 / 3.0).abs() < 1e-12);
        let scaled = ingest(&records(&[(10.0, 40.0), (10.0, 20.0), (10.0, 10.0)]), &cfg).unwrap();
        assert!((mean_duration(&scaled).unwrap() - 7.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_is_not_a_crisis() {
        let xs = [0.25, 0.5, 0.75, 1.0];
        let curve = LambdaCurve::from_knots(&xs, &[1.1, 1.4, 1.9, 2.5]).unwrap();
        let v = verdict_for_curve(&curve, 1.0, 0.5).unwrap();
        let at = verdict_for_curve(&curve, v.threshold, 0.5).unwrap();
        assert!(!at.crisis);
        assert_eq!(at.threshold_kind, ThresholdKind::IntegralRatio);
    }

    #[test]
    fn square_law_near_zero_uses_critical_duration() {
        let xs: Vec<f64> = (1..=8).map(|i| i as f64 / 8.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 64.0 * x * x).collect();
        let curve = LambdaCurve::from_knots(&xs, &ys).unwrap();
        let v = verdict_for_curve(&curve, 3.0, 0.04).unwrap();
        assert_eq!(v.threshold_kind, ThresholdKind::CriticalTcr);
        let a = v.alpha_fit.unwrap();
        assert!((a - 0.5).abs() < 1e-9);
        let c0 = bose_integral(1.0, 0.5).unwrap().value;
        let c = regularized_c(0.5).unwrap().value;
        assert!((v.threshold - c0 * c.powi(-2) * 0.04f64.powf(-0.5)).abs() < 1e-9 * v.threshold);
    }
}
