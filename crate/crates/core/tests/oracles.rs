//! Independent oracles: Euler's pentagonal recurrence, brute-force
//! enumeration, direct series, and published closed-form values.

use num_bigint::BigUint;
use num_traits::Zero;
use parastat::partitions::{count_at_most_k, most_probable_parts, Count, CountMode, PartitionRow, PartitionTable};
use parastat::quadrature::{bose_integral, bose_integral_quadrature, Rule, Tolerance};
use parastat::thresholds::{k0_erdos, k0_leading};

/// p(0..=n) from p(m) = sum_j (-1)^{j+1} [p(m - j(3j-1)/2) + p(m - j(3j+1)/2)].
fn pentagonal(n: usize) -> Vec<BigUint> {
    let mut p = vec![BigUint::zero(); n + 1];
    p[0] = BigUint::from(1u32);
    for m in 1..=n {
        let (mut plus, mut minus) = (BigUint::zero(), BigUint::zero());
        for j in 1.. {
            let g1 = j * (3 * j - 1) / 2;
            if g1 > m {
                break;
            }
            let g2 = j * (3 * j + 1) / 2;
            let term = if g2 <= m { &p[m - g1] + &p[m - g2] } else { p[m - g1].clone() };
            if j % 2 == 1 {
                plus += term;
            } else {
                minus += term;
            }
        }
        p[m] = plus - minus;
    }
    p
}

/// Counts by number of parts of every partition of n, by enumeration.
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

fn exact(c: Count) -> BigUint {
    c.as_exact().cloned().expect("exact count")
}

#[test]
fn unrestricted_counts_match_pentagonal_recurrence() {
    let n = 500;
    let table = PartitionTable::build(n, n, CountMode::Exact).unwrap();
    let p = pentagonal(n as usize);
    for m in 0..=n {
        assert_eq!(exact(count_at_most_k(&table, m, m).unwrap()), p[m as usize], "p({m})");
    }
    assert_eq!(p[100], BigUint::from(190_569_292u64));
}

#[test]
fn exact_part_counts_match_enumeration() {
    let table = PartitionTable::build(14, 14, CountMode::Exact).unwrap();
    for n in 0..=14 {
        let counts = enumerate_by_parts(n);
        for k in 0..=n {
            assert_eq!(exact(table.exactly(n, k).unwrap()), BigUint::from(counts[k as usize]), "p_{k}({n})");
        }
    }
}

#[test]
fn log_space_tracks_exact_counts() {
    let ex = PartitionTable::build(400, 400, CountMode::Exact).unwrap();
    let lg = PartitionTable::build(400, 400, CountMode::LogSpace).unwrap();
    for (n, k) in [(400, 1), (400, 37), (400, 200), (257, 19), (399, 398)] {
        let (a, b) = (ex.ln_exactly(n, k), lg.ln_exactly(n, k));
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "({n},{k}): {a} vs {b}");
    }
    assert!(lg.check_recurrence());
    let row = PartitionRow::build(400, 400, CountMode::LogSpace).unwrap();
    assert_eq!(row.most_probable(), most_probable_parts(&ex, 400).unwrap());
}

#[test]
fn bose_integrals_match_series() {
    // B(1, alpha) = alpha sum_m Gamma(1+alpha) m^-(1+alpha), tail by integral
    for alpha in [0.25f64, 0.5, 0.75, 1.0] {
        let terms = 200_000u64;
        let mut sum: f64 = (1..=terms).rev().map(|m| (m as f64).powf(-1.0 - alpha)).sum();
        let t = terms as f64 + 0.5;
        sum += t.powf(-alpha) / alpha;
        let series = alpha * parastat::special::gamma(1.0 + alpha) * sum;
        let closed = bose_integral(1.0, alpha).unwrap().value;
        assert!((closed - series).abs() < 1e-9 * series, "alpha {alpha}: {closed} vs {series}");
        let quad = bose_integral_quadrature(1.0, alpha, Rule::GaussKronrod, Tolerance::tight()).unwrap();
        assert!((quad.value - closed).abs() < 1e-10 * closed);
        let simpson = bose_integral_quadrature(1.0, alpha, Rule::Simpson, Tolerance::default()).unwrap();
        assert!((simpson.value - closed).abs() < 1e-7 * closed);
    }
}

#[test]
fn threshold_closed_forms() {
    // sqrt(6 n) ln n / (2 pi) at n = 10^4
    let lead = k0_leading(10_000).unwrap().k0;
    assert!((lead - 359.0).abs() < 0.5, "{lead}");
    let two_term = k0_erdos(10_000).unwrap().k0;
    assert!((two_term - 339.66).abs() < 0.01, "{two_term}");
}
