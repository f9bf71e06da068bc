//! Exact uniform sampling of partitions from a count table.
//!
//! The number of parts j is drawn with probability proportional to p_j(n).
//! The partition is then built by walking the recurrence
//! p_j(m) = p_{j-1}(m-1) + p_j(m-j): either the smallest part is one more
//! than the current shift (emit it), or every part exceeds it (raise the
//! shift). Each branch is taken with its exact share of the count, which
//! makes the result uniform over partitions of n into at most k parts.

use std::collections::BTreeMap;

use num_bigint::{BigUint, RandBigInt};
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use super::table::{PartitionTable, Storage};
use crate::error::{Error, Result};
use crate::rng::{par_indexed, stream};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OccupancyVector {
    /// i -> N_i, the number of parts equal to i (or occupying level i).
    pub counts: BTreeMap<u64, u64>,
    pub parts_total: u64,
    /// sum of i N_i.
    pub sum_total: u64,
    /// Number of available slots k the partition was drawn for.
    pub budget_k: u64,
    /// Empty slots k - parts_total (the condensate).
    pub n0: u64,
}

impl OccupancyVector {
    pub fn from_parts(parts: &[u64], budget_k: u64) -> Self {
        let mut counts = BTreeMap::new();
        for &p in parts {
            *counts.entry(p).or_insert(0) += 1;
        }
        Self::from_counts(counts, budget_k, |i| i)
    }

    /// Build from level counts; `energy(i)` gives the energy of level i.
    pub fn from_counts<E: Fn(u64) -> u64>(counts: BTreeMap<u64, u64>, budget_k: u64, energy: E) -> Self {
        let parts_total = counts.values().sum();
        let sum_total = counts.iter().map(|(&i, &c)| energy(i) * c).sum();
        OccupancyVector { counts, parts_total, sum_total, budget_k, n0: budget_k.saturating_sub(parts_total) }
    }

    /// Parts in non-increasing order.
    pub fn parts_desc(&self) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.parts_total as usize);
        for (&i, &c) in self.counts.iter().rev() {
            v.extend(std::iter::repeat(i).take(c as usize));
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleConvention {
    /// Uniform over partitions of n into at most k parts.
    #[default]
    AtMostK,
    /// Uniform over partitions of n into exactly k parts.
    ExactlyK,
}

fn check(table: &PartitionTable, n: u64, k: u64) -> Result<()> {
    if n > table.n_max || (k > table.k_max && table.k_max < n) {
        return Err(Error::OutOfRange(format!(
            "(n = {n}, k = {k}) outside table (n_max = {}, k_max = {})",
            table.n_max, table.k_max
        )));
    }
    Ok(())
}

fn choose_part_count<R: Rng>(table: &PartitionTable, n: u64, k: u64, rng: &mut R) -> Result<u64> {
    let top = k.min(n).min(table.k_max);
    match &table.data {
        Storage::Exact(_) => {
            let mut total = BigUint::zero();
            for j in 0..=top {
                total += table.exact_ref(n, j);
            }
            if total.is_zero() {
                return Err(Error::OutOfRange(format!("no partition of {n} into at most {k} parts")));
            }
            let mut r = rng.gen_biguint_below(&total);
            for j in 0..=top {
                let c = table.exact_ref(n, j);
                if &r < c {
                    return Ok(j);
                }
                r -= c;
            }
            unreachable!("cumulative counts exhausted")
        }
        Storage::Log(_) => {
            let lns: Vec<f64> = (0..=top).map(|j| table.ln_exactly(n, j)).collect();
            let m = lns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if m == f64::NEG_INFINITY {
                return Err(Error::OutOfRange(format!("no partition of {n} into at most {k} parts")));
            }
            let w: Vec<f64> = lns.iter().map(|l| (l - m).exp()).collect();
            let total: f64 = w.iter().sum();
            let mut u = rng.gen::<f64>() * total;
            for (j, wj) in w.iter().enumerate() {
                if u < *wj {
                    return Ok(j as u64);
                }
                u -= wj;
            }
            Ok(w.iter().rposition(|&x| x > 0.0).unwrap_or(0) as u64)
        }
    }
}

fn walk<R: Rng>(table: &PartitionTable, n: u64, j: u64, rng: &mut R) -> Vec<u64> {
    let mut parts = Vec::with_capacity(j as usize);
    let (mut j, mut m, mut shift) = (j, n, 0u64);
    while j > 0 {
        let take_one = match &table.data {
            Storage::Exact(_) => {
                let total = table.exact_ref(m, j);
                let ones = table.exact_ref(m - 1, j - 1);
                &rng.gen_biguint_below(total) < ones
            }
            Storage::Log(_) => {
                let p = (table.ln_exactly(m - 1, j - 1) - table.ln_exactly(m, j)).exp();
                rng.gen::<f64>() < p
            }
        };
        if take_one {
            parts.push(shift + 1);
            j -= 1;
            m -= 1;
        } else {
            m -= j;
            shift += 1;
        }
    }
    parts
}

/// Draw one partition of n with rng; `k` bounds the number of parts.
pub fn sample_with<R: Rng>(
    table: &PartitionTable,
    n: u64,
    k: u64,
    convention: SampleConvention,
    rng: &mut R,
) -> Result<OccupancyVector> {
    check(table, n, k)?;
    let j = match convention {
        SampleConvention::AtMostK => choose_part_count(table, n, k, rng)?,
        SampleConvention::ExactlyK => {
            if k > n || table.ln_exactly(n, k) == f64::NEG_INFINITY {
                return Err(Error::OutOfRange(format!("no partition of {n} into exactly {k} parts")));
            }
            k
        }
    };
    let parts = walk(table, n, j, rng);
    Ok(OccupancyVector::from_parts(&parts, k))
}

/// One uniform partition of n into at most k parts, reproducible per seed.
pub fn sample_partition(table: &PartitionTable, n: u64, k: u64, seed: u64) -> Result<OccupancyVector> {
    sample_with(table, n, k, SampleConvention::AtMostK, &mut stream(seed, 0))
}

/// `count` independent samples; sample i uses the stream derived from
/// (seed, i), so the output does not depend on `threads`.
pub fn sample_many(
    table: &PartitionTable,
    n: u64,
    k: u64,
    count: usize,
    seed: u64,
    convention: SampleConvention,
    threads: usize,
) -> Result<Vec<OccupancyVector>> {
    check(table, n, k)?;
    par_indexed(count, threads, |i| sample_with(table, n, k, convention, &mut stream(seed, i as u64)))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::CountMode;

    #[test]
    fn samples_are_partitions() {
        for mode in [CountMode::Exact, CountMode::LogSpace] {
            let t = PartitionTable::build(40, 40, mode).unwrap();
            let v = sample_many(&t, 40, 7, 200, 3, SampleConvention::AtMostK, 1).unwrap();
            for o in &v {
                assert_eq!(o.sum_total, 40);
                assert!(o.parts_total <= 7);
                assert_eq!(o.n0, 7 - o.parts_total);
            }
        }
    }

    #[test]
    fn one_has_one_partition() {
        let t = PartitionTable::build(5, 5, CountMode::Exact).unwrap();
        let o = sample_partition(&t, 1, 5, 99).unwrap();
        assert_eq!(o.parts_desc(), vec![1]);
        assert_eq!(o.n0, 4);
    }

    #[test]
    fn exactly_k_convention() {
        let t = PartitionTable::build(30, 30, CountMode::Exact).unwrap();
        let v = sample_many(&t, 30, 4, 50, 1, SampleConvention::ExactlyK, 1).unwrap();
        assert!(v.iter().all(|o| o.parts_total == 4));
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let t = PartitionTable::build(80, 80, CountMode::LogSpace).unwrap();
        let a = sample_many(&t, 80, 20, 40, 11, SampleConvention::AtMostK, 1).unwrap();
        let b = sample_many(&t, 80, 20, 40, 11, SampleConvention::AtMostK, 3).unwrap();
        assert_eq!(a, b);
    }
}
