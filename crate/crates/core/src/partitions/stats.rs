use serde::Serialize;

use super::sample::OccupancyVector;
use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandFraction {
    pub delta1: f64,
    /// Fraction of samples with |N0 - (k - k0)| > delta1 k0.
    pub violation_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondensateSummary {
    pub samples: usize,
    pub k: u64,
    pub k0: f64,
    pub n0_mean: f64,
    pub n0_median: f64,
    pub n0_std: f64,
    pub n0_min: u64,
    pub n0_max: u64,
    /// median |N0 - (k - k0)|.
    pub median_abs_deviation: f64,
    /// False when k <= k0; the band figures are then not computed.
    pub hypothesis_met: bool,
    pub bands: Vec<BandFraction>,
    /// exp(-(k - k0)^(1/2 - delta)) when the hypothesis holds.
    pub tail_bound: Option<f64>,
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Empirical law of the condensate N0 against the planar bound.
pub fn condensate_statistics(
    samples: &[OccupancyVector],
    k: u64,
    k0: f64,
    delta1_grid: &[f64],
    delta: f64,
) -> Result<CondensateSummary> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!("{} samples, need at least {MIN_SAMPLES}", samples.len())));
    }
    let n0: Vec<f64> = samples.iter().map(|s| k.saturating_sub(s.parts_total) as f64).collect();
    let cnt = n0.len() as f64;
    let mean = n0.iter().sum::<f64>() / cnt;
    let var = n0.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (cnt - 1.0).max(1.0);
    let target = k as f64 - k0;
    let mut dev: Vec<f64> = n0.iter().map(|x| (x - target).abs()).collect();
    let hypothesis_met = k as f64 > k0;
    let bands = if hypothesis_met {
        delta1_grid
            .iter()
            .map(|&d1| BandFraction {
                delta1: d1,
                violation_fraction: dev.iter().filter(|&&d| d > d1 * k0).count() as f64 / cnt,
            })
            .collect()
    } else {
        Vec::new()
    };
    let tail_bound = hypothesis_met.then(|| (-(target).powf(0.5 - delta)).exp());
    Ok(CondensateSummary {
        samples: samples.len(),
        k,
        k0,
        n0_mean: mean,
        n0_median: median(&mut n0.clone()),
        n0_std: var.sqrt(),
        n0_min: n0.iter().cloned().fold(f64::INFINITY, f64::min) as u64,
        n0_max: n0.iter().cloned().fold(0.0, f64::max) as u64,
        median_abs_deviation: median(&mut dev),
        hypothesis_met,
        bands,
        tail_bound,
    })
}
