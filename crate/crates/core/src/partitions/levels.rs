//! Counting and sampling occupations of levels with arbitrary integer
//! energies: configurations (N_1, ..., N_L) with sum e_i N_i = n and
//! sum N_i = j. Ordinary partitions are the case e_i = i; squares give the
//! line case, and the flicker sampler uses quantized spectral energies.

use std::collections::BTreeMap;

use rand::Rng;

use super::sample::OccupancyVector;
use crate::error::{Error, Result};
use crate::rng::{par_indexed, stream};
use crate::special::log_add_exp;

const MAX_LEVEL_CELLS: u64 = 60_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelTable {
    pub energies: Vec<u64>,
    pub n: u64,
    pub k_max: u64,
    /// ln T_t(j, m) for t in 0..=L, j in 0..=k_max, m in 0..=n.
    logs: Vec<f64>,
}

impl LevelTable {
    pub fn build(energies: Vec<u64>, n: u64, k_max: u64) -> Result<Self> {
        if energies.iter().any(|&e| e == 0) {
            return Err(Error::InvalidArgument("level energies must be at least 1".into()));
        }
        let levels = energies.len() as u64;
        let cells = (levels + 1).saturating_mul(k_max + 1).saturating_mul(n + 1);
        if cells > MAX_LEVEL_CELLS {
            return Err(Error::BudgetExceeded(format!("{cells} cells exceed {MAX_LEVEL_CELLS}")));
        }
        let (kw, mw) = ((k_max + 1) as usize, (n + 1) as usize);
        let plane = kw * mw;
        let mut logs = vec![f64::NEG_INFINITY; plane * (energies.len() + 1)];
        logs[0] = 0.0;
        for (t0, &e) in energies.iter().enumerate() {
            let t = t0 + 1;
            let e = e as usize;
            for j in 0..kw {
                for m in 0..mw {
                    let mut v = logs[(t - 1) * plane + j * mw + m];
                    if j >= 1 && m >= e {
                        v = log_add_exp(v, logs[t * plane + (j - 1) * mw + m - e]);
                    }
                    logs[t * plane + j * mw + m] = v;
                }
            }
        }
        Ok(LevelTable { energies, n, k_max, logs })
    }

    fn at(&self, t: usize, j: u64, m: u64) -> f64 {
        let mw = (self.n + 1) as usize;
        let plane = (self.k_max + 1) as usize * mw;
        self.logs[t * plane + j as usize * mw + m as usize]
    }

    /// ln of the number of configurations with j occupied slots and energy m.
    pub fn ln_count(&self, j: u64, m: u64) -> f64 {
        if j > self.k_max || m > self.n {
            return f64::NEG_INFINITY;
        }
        self.at(self.energies.len(), j, m)
    }

    /// Uniform draw among configurations with energy n and at most k
    /// occupied slots. Level indices in the result are 1-based.
    pub fn sample<R: Rng>(&self, k: u64, rng: &mut R) -> Result<OccupancyVector> {
        let top = k.min(self.k_max);
        let lns: Vec<f64> = (0..=top).map(|j| self.ln_count(j, self.n)).collect();
        let mx = lns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if mx == f64::NEG_INFINITY {
            return Err(Error::OutOfRange(format!("no configuration with energy {} and at most {k} slots", self.n)));
        }
        let w: Vec<f64> = lns.iter().map(|l| (l - mx).exp()).collect();
        let mut u = rng.gen::<f64>() * w.iter().sum::<f64>();
        let mut j = 0u64;
        for (i, wi) in w.iter().enumerate() {
            j = i as u64;
            if u < *wi {
                break;
            }
            u -= wi;
        }
        let mut m = self.n;
        let mut counts = BTreeMap::new();
        let mut t = self.energies.len();
        while t > 0 {
            let total = self.at(t, j, m);
            let skip = (self.at(t - 1, j, m) - total).exp();
            if rng.gen::<f64>() < skip {
                t -= 1;
            } else {
                *counts.entry(t as u64).or_insert(0) += 1;
                j -= 1;
                m -= self.energies[t - 1];
            }
        }
        let energies = &self.energies;
        Ok(OccupancyVector::from_counts(counts, k, |i| energies[i as usize - 1]))
    }

    pub fn sample_many(&self, k: u64, count: usize, seed: u64, threads: usize) -> Result<Vec<OccupancyVector>> {
        par_indexed(count, threads, |i| self.sample(k, &mut stream(seed, i as u64))).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{CountMode, PartitionTable};

    #[test]
    fn integer_levels_reproduce_partition_counts() {
        let n = 25;
        let lt = LevelTable::build((1..=n).collect(), n, n).unwrap();
        let t = PartitionTable::build(n, n, CountMode::Exact).unwrap();
        for j in 1..=n {
            let a = lt.ln_count(j, n);
            let b = t.ln_exactly(n, j);
            assert!((a - b).abs() < 1e-12 || (a == b), "j={j}");
        }
    }

    #[test]
    fn square_levels() {
        // 10 = 9 + 1 = 4 + 4 + 1 + 1 = 4 + 6*1 = 10*1 = 4+4+... ; count by brute force
        let lt = LevelTable::build(vec![1, 4, 9], 10, 10).unwrap();
        let mut brute = 0;
        for a in 0..=10 {
            for b in 0..=2 {
                for c in 0..=1 {
                    if a + 4 * b + 9 * c == 10 {
                        brute += 1;
                    }
                }
            }
        }
        let total: f64 = (0..=10).map(|j| lt.ln_count(j, 10).exp()).sum();
        assert!((total - brute as f64).abs() < 1e-9);
        let s = lt.sample_many(10, 30, 5, 1).unwrap();
        assert!(s.iter().all(|o| o.sum_total == 10));
    }
}
