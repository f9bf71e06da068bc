use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::log_add_exp;

/// Above this n the exact big-integer tables are refused.
pub const EXACT_LIMIT: u64 = 3000;
/// Largest table accepted, in cells.
pub const MAX_CELLS: u64 = 2_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    Exact,
    LogSpace,
}

impl CountMode {
    /// Exact below the crossover, log-space above it.
    pub fn auto(n: u64) -> Self {
        if n <= EXACT_LIMIT {
            CountMode::Exact
        } else {
            CountMode::LogSpace
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            CountMode::Exact => 0,
            CountMode::LogSpace => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Count {
    Exact(BigUint),
    Log(f64),
}

impl Count {
    pub fn ln(&self) -> f64 {
        match self {
            Count::Exact(v) => biguint_ln(v),
            Count::Log(l) => *l,
        }
    }

    pub fn as_exact(&self) -> Option<&BigUint> {
        match self {
            Count::Exact(v) => Some(v),
            Count::Log(_) => None,
        }
    }
}

/// Natural log of a big integer, accurate to double precision.
pub fn biguint_ln(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Storage {
    Exact(Vec<BigUint>),
    Log(Vec<f64>),
}

/// Full table of p_k(m), the number of partitions of m into exactly k
/// parts, for 0 <= m <= n_max and 0 <= k <= k_max.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTable {
    pub n_max: u64,
    pub k_max: u64,
    pub mode: CountMode,
    pub(crate) data: Storage,
}

pub(crate) fn check_budget(n_max: u64, k_max: u64, mode: CountMode) -> Result<()> {
    let cells = (n_max + 1).saturating_mul(k_max + 1);
    if cells > MAX_CELLS {
        return Err(Error::BudgetExceeded(format!("{cells} cells exceed the limit of {MAX_CELLS}")));
    }
    if mode == CountMode::Exact && n_max > EXACT_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "exact tables are limited to n <= {EXACT_LIMIT}; use log-space mode for n = {n_max}"
        )));
    }
    Ok(())
}

impl PartitionTable {
    pub fn build(n_max: u64, k_max: u64, mode: CountMode) -> Result<Self> {
        check_budget(n_max, k_max, mode)?;
        let k_max = k_max.min(n_max.max(1));
        let w = (n_max + 1) as usize;
        let rows = (k_max + 1) as usize;
        let data = match mode {
            CountMode::Exact => {
                let mut v = vec![BigUint::zero(); w * rows];
                v[0] = BigUint::from(1u32);
                for k in 1..rows {
                    for m in k..w {
                        let val = &v[k * w + m - k] + &v[(k - 1) * w + m - 1];
                        v[k * w + m] = val;
                    }
                }
                Storage::Exact(v)
            }
            CountMode::LogSpace => {
                let mut v = vec![f64::NEG_INFINITY; w * rows];
                v[0] = 0.0;
                for k in 1..rows {
                    for m in k..w {
                        v[k * w + m] = log_add_exp(v[k * w + m - k], v[(k - 1) * w + m - 1]);
                    }
                }
                Storage::Log(v)
            }
        };
        Ok(PartitionTable { n_max, k_max, mode, data })
    }

    fn width(&self) -> usize {
        (self.n_max + 1) as usize
    }

    fn check(&self, n: u64, k: u64) -> Result<()> {
        if n > self.n_max || k > self.k_max {
            return Err(Error::OutOfRange(format!(
                "(n = {n}, k = {k}) outside table (n_max = {}, k_max = {})",
                self.n_max, self.k_max
            )));
        }
        Ok(())
    }

    /// p_k(n), partitions of n into exactly k parts.
    pub fn exactly(&self, n: u64, k: u64) -> Result<Count> {
        if n <= self.n_max && k > n {
            return Ok(self.zero());
        }
        self.check(n, k)?;
        let i = k as usize * self.width() + n as usize;
        Ok(match &self.data {
            Storage::Exact(v) => Count::Exact(v[i].clone()),
            Storage::Log(v) => Count::Log(v[i]),
        })
    }

    /// ln p_k(n); -inf when the count is zero.
    pub fn ln_exactly(&self, n: u64, k: u64) -> f64 {
        if n > self.n_max || k > self.k_max {
            return f64::NEG_INFINITY;
        }
        let i = k as usize * self.width() + n as usize;
        match &self.data {
            Storage::Exact(v) => biguint_ln(&v[i]),
            Storage::Log(v) => v[i],
        }
    }

    pub(crate) fn exact_ref(&self, n: u64, k: u64) -> &BigUint {
        match &self.data {
            Storage::Exact(v) => &v[k as usize * self.width() + n as usize],
            Storage::Log(_) => unreachable!("exact access to a log-space table"),
        }
    }

    fn zero(&self) -> Count {
        match self.mode {
            CountMode::Exact => Count::Exact(BigUint::zero()),
            CountMode::LogSpace => Count::Log(f64::NEG_INFINITY),
        }
    }

    /// True when p_k(m) = p_k(m-k) + p_{k-1}(m-1) and the boundary values hold
    /// in every cell.
    pub fn check_recurrence(&self) -> bool {
        let w = self.width();
        let rows = (self.k_max + 1) as usize;
        match &self.data {
            Storage::Exact(v) => {
                if v[0] != BigUint::from(1u32) || (1..w).any(|m| !v[m].is_zero()) {
                    return false;
                }
                (1..rows).all(|k| {
                    (0..w).all(|m| {
                        if m < k {
                            v[k * w + m].is_zero()
                        } else {
                            v[k * w + m] == &v[k * w + m - k] + &v[(k - 1) * w + m - 1]
                        }
                    })
                })
            }
            Storage::Log(v) => (1..rows).all(|k| {
                (k..w).all(|m| {
                    let rhs = log_add_exp(v[k * w + m - k], v[(k - 1) * w + m - 1]);
                    (v[k * w + m] - rhs).abs() <= 1e-12 * rhs.abs().max(1.0)
                })
            }),
        }
    }
}

/// Number of partitions of n into at most k parts.
pub fn count_at_most_k(table: &PartitionTable, n: u64, k: u64) -> Result<Count> {
    table.check(n, k.min(table.k_max))?;
    if k > table.k_max && k < n {
        return Err(Error::OutOfRange(format!("k = {k} beyond k_max = {}", table.k_max)));
    }
    let top = k.min(n).min(table.k_max);
    Ok(match &table.data {
        Storage::Exact(_) => {
            let mut acc = BigUint::zero();
            for j in 0..=top {
                acc += table.exact_ref(n, j);
            }
            Count::Exact(acc)
        }
        Storage::Log(_) => {
            let terms: Vec<f64> = (0..=top).map(|j| table.ln_exactly(n, j)).collect();
            Count::Log(crate::special::log_sum_exp(&terms))
        }
    })
}

/// argmax_k p_k(n), ties resolved toward the smaller k.
pub fn most_probable_parts(table: &PartitionTable, n: u64) -> Result<u64> {
    if n > table.n_max || table.k_max < n {
        return Err(Error::OutOfRange(format!("table must cover (n, n) = ({n}, {n})")));
    }
    let lns: Vec<f64> = (0..=n).map(|k| table.ln_exactly(n, k)).collect();
    match &table.data {
        Storage::Exact(_) => {
            let mut best = 0u64;
            for k in 1..=n {
                if table.exact_ref(n, k) > table.exact_ref(n, best) {
                    best = k;
                }
            }
            Ok(best)
        }
        Storage::Log(_) => Ok(argmax_first(&lns) as u64),
    }
}

fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// The single row k -> p_k(n) computed with two rolling columns, for when
/// only the counts at one n are needed.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionRow {
    pub n: u64,
    pub mode: CountMode,
    exact: Vec<BigUint>,
    logs: Vec<f64>,
}

impl PartitionRow {
    pub fn build(n: u64, k_max: u64, mode: CountMode) -> Result<Self> {
        check_budget(n, k_max, mode)?;
        let k_max = k_max.min(n);
        let w = (n + 1) as usize;
        let mut exact = Vec::new();
        let mut logs = Vec::new();
        match mode {
            CountMode::Exact => {
                let mut prev = vec![BigUint::zero(); w];
                prev[0] = BigUint::from(1u32);
                exact.push(prev[w - 1].clone());
                for k in 1..=k_max as usize {
                    let mut cur = vec![BigUint::zero(); w];
                    for m in k..w {
                        cur[m] = &cur[m - k] + &prev[m - 1];
                    }
                    exact.push(cur[w - 1].clone());
                    prev = cur;
                }
            }
            CountMode::LogSpace => {
                let mut prev = vec![f64::NEG_INFINITY; w];
                prev[0] = 0.0;
                logs.push(prev[w - 1]);
                let mut cur = vec![f64::NEG_INFINITY; w];
                for k in 1..=k_max as usize {
                    for c in cur.iter_mut().take(k) {
                        *c = f64::NEG_INFINITY;
                    }
                    for m in k..w {
                        cur[m] = log_add_exp(cur[m - k], prev[m - 1]);
                    }
                    logs.push(cur[w - 1]);
                    std::mem::swap(&mut prev, &mut cur);
                }
            }
        }
        Ok(PartitionRow { n, mode, exact, logs })
    }

    pub fn len(&self) -> usize {
        self.exact.len().max(self.logs.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ln(&self, k: u64) -> f64 {
        match self.mode {
            CountMode::Exact => self.exact.get(k as usize).map(biguint_ln).unwrap_or(f64::NEG_INFINITY),
            CountMode::LogSpace => self.logs.get(k as usize).copied().unwrap_or(f64::NEG_INFINITY),
        }
    }

    pub fn exact(&self, k: u64) -> Option<&BigUint> {
        self.exact.get(k as usize)
    }

    pub fn ln_values(&self) -> Vec<f64> {
        (0..self.len() as u64).map(|k| self.ln(k)).collect()
    }

    /// argmax over the stored k, ties toward the smaller k.
    pub fn most_probable(&self) -> u64 {
        match self.mode {
            CountMode::Exact => {
                let mut best = 0;
                for k in 1..self.exact.len() {
                    if self.exact[k] > self.exact[best] {
                        best = k;
                    }
                }
                best as u64
            }
            CountMode::LogSpace => argmax_first(&self.logs) as u64,
        }
    }

    /// Number of strict local maxima among k >= 1 with nonzero counts.
    pub fn local_maxima(&self) -> usize {
        let v: Vec<f64> = self.ln_values().into_iter().skip(1).collect();
        let mut count = 0;
        let mut i = 0;
        while i < v.len() {
            // treat runs of equal values as one plateau
            let mut j = i;
            while j + 1 < v.len() && v[j + 1] == v[i] {
                j += 1;
            }
            let left = if i == 0 { f64::NEG_INFINITY } else { v[i - 1] };
            let right = if j + 1 >= v.len() { f64::NEG_INFINITY } else { v[j + 1] };
            if v[i] > left && v[i] > right && v[i] > f64::NEG_INFINITY {
                count += 1;
            }
            i = j + 1;
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        let t = PartitionTable::build(10, 10, CountMode::Exact).unwrap();
        let p5: Vec<u64> = (1..=5).map(|k| t.exactly(5, k).unwrap().as_exact().unwrap().to_u64().unwrap()).collect();
        assert_eq!(p5, vec![1, 2, 2, 1, 1]);
        assert_eq!(count_at_most_k(&t, 5, 5).unwrap().as_exact().unwrap().to_u64(), Some(7));
        assert_eq!(count_at_most_k(&t, 10, 2).unwrap().as_exact().unwrap().to_u64(), Some(6));
        assert_eq!(most_probable_parts(&t, 5).unwrap(), 2);
        assert!(t.check_recurrence());
    }

    #[test]
    fn modes_agree() {
        let e = PartitionTable::build(300, 300, CountMode::Exact).unwrap();
        let l = PartitionTable::build(300, 300, CountMode::LogSpace).unwrap();
        for k in 1..=300 {
            let (a, b) = (e.ln_exactly(300, k), l.ln_exactly(300, k));
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "k={k}");
        }
        assert!(l.check_recurrence());
    }

    #[test]
    fn row_matches_table() {
        let t = PartitionTable::build(60, 60, CountMode::Exact).unwrap();
        let r = PartitionRow::build(60, 60, CountMode::Exact).unwrap();
        for k in 0..=60 {
            assert_eq!(r.exact(k).unwrap(), t.exact_ref(60, k));
        }
        assert_eq!(r.most_probable(), most_probable_parts(&t, 60).unwrap());
        assert_eq!(r.local_maxima(), 1);
    }

    #[test]
    fn budget_guard() {
        assert!(matches!(PartitionTable::build(100_000, 100_000, CountMode::LogSpace), Err(Error::BudgetExceeded(_))));
        assert!(matches!(PartitionTable::build(5000, 10, CountMode::Exact), Err(Error::BudgetExceeded(_))));
    }
}
