use serde::Serialize;

use super::lambda::LambdaCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DebtRecord {
    pub size: f64,
    /// Pay-out period in input units; converted to days at ingest.
    pub duration: f64,
    pub timestamp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    /// Averaging window in days. Records with a timestamp older than the
    /// newest timestamp minus this window are ignored.
    pub averaging_window: f64,
    /// Durations are rounded to multiples of this many days.
    pub duration_granularity: f64,
    /// Spacing of virtual durations inserted into wide gaps, if any.
    pub fill_granularity: Option<f64>,
    /// Input duration units per day.
    pub unit_factor: f64,
    pub max_virtual: usize,
}

impl IngestConfig {
    pub fn new(averaging_window: f64) -> Self {
        IngestConfig {
            averaging_window,
            duration_granularity: 1.0,
            fill_granularity: None,
            unit_factor: 1.0,
            max_virtual: 100_000,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("averaging_window", self.averaging_window),
            ("duration_granularity", self.duration_granularity),
            ("unit_factor", self.unit_factor),
            ("fill_granularity", self.fill_granularity.unwrap_or(1.0)),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSeries {
    /// Rank order: longest duration first.
    pub durations_desc: Vec<f64>,
    pub debt_means: Vec<f64>,
    /// E_i = N_i l_1 / l_i.
    pub flows: Vec<f64>,
    pub virtual_knots: Vec<bool>,
    /// l_1, the longest duration; flows are normalized to it.
    pub reference_duration: f64,
    pub lambda: LambdaCurve,
}

impl FlowSeries {
    pub fn from_buckets(durations_desc: Vec<f64>, debt_means: Vec<f64>, virtual_knots: Vec<bool>) -> Result<Self> {
        let reference = durations_desc.first().copied().ok_or(Error::EmptySeries)?;
        let flows: Vec<f64> = durations_desc.iter().zip(&debt_means).map(|(l, n)| n * reference / l).collect();
        let lambda = LambdaCurve::from_flows(&flows)?;
        Ok(FlowSeries { durations_desc, debt_means, flows, virtual_knots, reference_duration: reference, lambda })
    }

    /// Every duration except the reference l_1 multiplied by rho. Rank
    /// positions and l_1 stay fixed, so flows E_i (i >= 2) scale by 1/rho.
    pub fn stretched(&self, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("stretch must be positive, got {rho}")));
        }
        let durations: Vec<f64> =
            self.durations_desc.iter().enumerate().map(|(i, &l)| if i == 0 { l } else { l * rho }).collect();
        let flows: Vec<f64> = durations.iter().zip(&self.debt_means).map(|(l, n)| n * self.reference_duration / l).collect();
        let lambda = LambdaCurve::from_flows(&flows)?;
        Ok(FlowSeries { durations_desc: durations, flows, lambda, ..self.clone() })
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    /// l_1 / l_i, the flow per unit of debt.
    pub fn unit_flows(&self) -> Vec<f64> {
        self.durations_desc.iter().map(|l| self.reference_duration / l).collect()
    }
}

/// Validate, filter, bucket and gap-fill a list of records.
pub fn ingest(records: &[DebtRecord], config: &IngestConfig) -> Result<FlowSeries> {
    config.validate()?;
    for (i, r) in records.iter().enumerate() {
        let row = i + 1;
        if !(r.size > 0.0 && r.size.is_finite()) {
            return Err(Error::NonPositiveValue { row, field: "size", value: r.size });
        }
        if !(r.duration > 0.0 && r.duration.is_finite()) {
            return Err(Error::NonPositiveValue { row, field: "duration", value: r.duration });
        }
    }
    let newest = records.iter().filter_map(|r| r.timestamp).fold(f64::NEG_INFINITY, f64::max);
    let g = config.duration_granularity;
    let mut buckets: Vec<(f64, f64)> = Vec::new();
    for r in records {
        if r.timestamp.is_some_and(|t| t < newest - config.averaging_window) {
            continue;
        }
        let days = r.duration * config.unit_factor;
        let l = ((days / g).round() * g).max(g);
        buckets.push((l, r.size));
    }
    buckets.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut durations: Vec<f64> = Vec::new();
    let mut debts: Vec<f64> = Vec::new();
    for (l, s) in buckets {
        match durations.last() {
            Some(&last) if last == l => *debts.last_mut().unwrap() += s,
            _ => {
                durations.push(l);
                debts.push(s);
            }
        }
    }
    if durations.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} distinct durations after bucketing, need at least 3",
            durations.len()
        )));
    }
    for d in &mut debts {
        *d /= config.averaging_window;
    }
    let virtual_knots = vec![false; durations.len()];
    let (durations, debts, virtual_knots) = match config.fill_granularity {
        Some(step) => fill_gaps(&durations, &debts, step, config.max_virtual)?,
        None => (durations, debts, virtual_knots),
    };
    FlowSeries::from_buckets(durations, debts, virtual_knots)
}

/// Insert virtual durations every `step` days inside gaps wider than `step`.
///
/// Each gap may draw on a third of the debt at either end, so every
/// recorded duration keeps at least a third of its debt. The drawn debt is
/// placed on the virtual knots by the lever rule in u = 1/l, which leaves
/// both sum N_i and sum N_i / l_i unchanged.
fn fill_gaps(durations: &[f64], debts: &[f64], step: f64, max_virtual: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<bool>)> {
    let mut ends = debts.to_vec();
    let mut inserted: Vec<Vec<(f64, f64)>> = vec![Vec::new(); durations.len() - 1];
    let mut total = 0usize;
    for g in 0..durations.len() - 1 {
        let (la, lb) = (durations[g], durations[g + 1]);
        let count = ((la - lb) / step).ceil() as usize;
        if count < 2 {
            continue;
        }
        total += count - 1;
        if total > max_virtual {
            return Err(Error::BudgetExceeded(format!("gap filling needs more than {max_virtual} virtual durations")));
        }
        let (ua, ub) = (1.0 / la, 1.0 / lb);
        let (ba, bb) = (debts[g] / 3.0, debts[g + 1] / 3.0);
        let knots: Vec<(f64, f64)> = (1..count)
            .map(|j| {
                let l = lb + j as f64 * step;
                (l, (1.0 / l - ua) / (ub - ua))
            })
            .filter(|&(l, _)| l < la)
            .collect();
        let wa: f64 = knots.iter().map(|&(_, t)| (ba * (1.0 - t) + bb * t) * (1.0 - t)).sum();
        let wb: f64 = knots.iter().map(|&(_, t)| (ba * (1.0 - t) + bb * t) * t).sum();
        let eps = (ba / wa).min(bb / wb);
        let mut from_a = 0.0;
        let mut from_b = 0.0;
        let mut gap = Vec::with_capacity(knots.len());
        for &(l, t) in knots.iter().rev() {
            let m = eps * (ba * (1.0 - t) + bb * t);
            from_a += m * (1.0 - t);
            from_b += m * t;
            gap.push((l, m));
        }
        ends[g] -= from_a;
        ends[g + 1] -= from_b;
        inserted[g] = gap;
    }
    let mut d = Vec::with_capacity(durations.len() + total);
    let mut n = Vec::with_capacity(durations.len() + total);
    let mut v = Vec::with_capacity(durations.len() + total);
    for i in 0..durations.len() {
        d.push(durations[i]);
        n.push(ends[i]);
        v.push(false);
        if let Some(gap) = inserted.get(i) {
            // gap knots are stored from the long end down
            let mut gap = gap.clone();
            gap.sort_by(|a, b| b.0.total_cmp(&a.0));
            for (l, m) in gap {
                d.push(l);
                n.push(m);
                v.push(true);
            }
        }
    }
    Ok((d, n, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(size: f64, duration: f64) -> DebtRecord {
        DebtRecord { size, duration, timestamp: None }
    }

    #[test]
    fn distinct_durations_bucket_to_identity() {
        let s = ingest(&[rec(1.0, 30.0), rec(2.0, 90.0), rec(3.0, 10.0)], &IngestConfig::new(1.0)).unwrap();
        assert_eq!(s.durations_desc, vec![90.0, 30.0, 10.0]);
        assert_eq!(s.debt_means, vec![2.0, 1.0, 3.0]);
        assert!(s.virtual_knots.iter().all(|v| !v));
    }

    #[test]
    fn fill_conserves_debts_and_flows() {
        let records = [rec(5.0, 300.0), rec(2.0, 100.0), rec(7.0, 10.0)];
        let plain = ingest(&records, &IngestConfig::new(30.0)).unwrap();
        let mut cfg = IngestConfig::new(30.0);
        cfg.fill_granularity = Some(10.0);
        let filled = ingest(&records, &cfg).unwrap();
        assert!(filled.len() > plain.len());
        let sum = |v: &[f64]| v.iter().sum::<f64>();
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(sum(&filled.debt_means), sum(&plain.debt_means)) < 1e-9);
        assert!(rel(sum(&filled.flows), sum(&plain.flows)) < 1e-9);
        assert!(filled.debt_means.iter().all(|&m| m > 0.0));
        assert!(filled.durations_desc.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn bad_rows_are_reported() {
        let err = ingest(&[rec(1.0, 3.0), rec(1.0, 0.0), rec(1.0, 5.0)], &IngestConfig::new(1.0)).unwrap_err();
        assert!(matches!(err, Error::NonPositiveValue { row: 2, field: "duration", .. }));
    }

    #[test]
    fn old_records_fall_outside_window() {
        let mut r = vec![rec(1.0, 30.0), rec(1.0, 20.0), rec(1.0, 10.0), rec(100.0, 5.0)];
        for (i, x) in r.iter_mut().enumerate() {
            x.timestamp = Some(if i == 3 { 0.0 } else { 100.0 });
        }
        let s = ingest(&r, &IngestConfig::new(50.0)).unwrap();
        assert_eq!(s.len(), 3);
    }
}
