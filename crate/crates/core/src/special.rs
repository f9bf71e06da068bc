//! Special functions shared by the quadrature, solver and threshold code.
//!
//! Everything here is a pure function of `f64` inputs. Gamma comes from
//! `statrs`; zeta is evaluated with Euler-Maclaurin summation because the
//! constants need it at real arguments on both sides of 1.

use statrs::function::gamma as sgamma;

/// B_2, B_4, ..., B_16 divided by the matching factorial (2j)!.
const BERNOULLI_OVER_FACT: [f64; 8] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
    7.0 / 6.0 / 87_178_291_200.0,
    -3617.0 / 510.0 / 20_922_789_888_000.0,
];

const ZETA_CUT: f64 = 20.0;

pub fn gamma(x: f64) -> f64 {
    sgamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    sgamma::ln_gamma(x)
}

/// Riemann zeta for real `s > 0`, `s != 1`.
///
/// Returns NaN at `s = 1` and for `s <= 0` (not needed anywhere here).
pub fn zeta(s: f64) -> f64 {
    if !(s > 0.0) || s == 1.0 {
        return f64::NAN;
    }
    let n = ZETA_CUT;
    let mut head = 0.0;
    for m in 1..(n as u32) {
        head += (m as f64).powf(-s);
    }
    let mut sum = head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // rising product s (s+1) ... (s+2j-2) times N^{-s-2j+1}
    let mut rising = s;
    let mut npow = n.powf(-s - 1.0);
    for (j, coef) in BERNOULLI_OVER_FACT.iter().enumerate() {
        sum += coef * rising * npow;
        let a = s + (2 * j + 1) as f64;
        rising *= a * (a + 1.0);
        npow /= n * n;
    }
    sum
}

/// g(y) = 1/(e^y - 1) - 1/y, regular at the origin with g(0) = -1/2.
pub fn bose_remainder(y: f64) -> f64 {
    if y.abs() < 0.05 {
        let y2 = y * y;
        -0.5 + y * (1.0 / 12.0 - y2 * (1.0 / 720.0 - y2 * (1.0 / 30_240.0 - y2 / 1_209_600.0)))
    } else {
        1.0 / y.exp_m1() - 1.0 / y
    }
}

/// Parastatistic occupancy 1/(e^y - 1) - k/(e^{ky} - 1).
///
/// The two poles at y = 0 cancel; the value there is (k - 1)/2 and the
/// function is smooth for every real y, negative arguments included.
/// Away from the origin the direct form is used: the subtracted 1/y terms
/// cancel only to rounding, which leaves a tail of order 1e-16 / y.
pub fn para_density(y: f64, k: f64) -> f64 {
    if y.abs() >= 0.05 {
        1.0 / y.exp_m1() - k / (k * y).exp_m1()
    } else {
        bose_remainder(y) - k * bose_remainder(k * y)
    }
}

/// Mean occupation of a single level with cap `cap` (N in 0..=cap) at
/// reduced energy y. Equals `para_density(y, cap + 1)`.
pub fn level_mean(y: f64, cap: f64) -> f64 {
    para_density(y, cap + 1.0)
}

/// ln(1 - e^{-x}) for x > 0 without cancellation.
pub fn ln_one_minus_exp_neg(x: f64) -> f64 {
    if x < std::f64::consts::LN_2 {
        (-(-x).exp_m1()).ln()
    } else {
        (-(-x).exp()).ln_1p()
    }
}

/// Log partition function of one level, ln sum_{N=0}^{k} e^{-yN}.
pub fn level_log_partition(y: f64, k: f64) -> f64 {
    if y == 0.0 {
        (k + 1.0).ln()
    } else if y > 0.0 {
        ln_one_minus_exp_neg((k + 1.0) * y) - ln_one_minus_exp_neg(y)
    } else {
        -y * k + level_log_partition(-y, k)
    }
}

/// 1/(4 sinh^2(y/2)) - 1/y^2, an even function equal to -1/12 at 0.
fn csch_sq_remainder(y: f64) -> f64 {
    let a = y.abs();
    if a < 0.1 {
        let y2 = y * y;
        -1.0 / 12.0 + y2 * (1.0 / 240.0 - y2 * (1.0 / 6048.0 - y2 / 172_800.0))
    } else {
        let e = (-a).exp();
        let d = 1.0 - e;
        e / (d * d) - 1.0 / (a * a)
    }
}

/// Variance of the occupation of one level with cap `cap` at reduced
/// energy y. At y = 0 this is the variance ((cap+1)^2 - 1)/12 of the
/// uniform law on 0..=cap.
pub fn level_variance(y: f64, cap: f64) -> f64 {
    let m = cap + 1.0;
    csch_sq_remainder(y) - m * m * csch_sq_remainder(m * y)
}

/// ln(e^a + e^b) with the usual -inf conventions.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Log of sum of exponentials of a slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((zeta(0.5) + 1.460_354_508_809_586_8).abs() < 1e-13);
        assert!((zeta(1.5) - 2.612_375_348_685_488).abs() < 1e-13);
        assert!(zeta(1.0).is_nan());
    }

    #[test]
    fn bose_remainder_branches_meet() {
        for &y in &[0.049_999, 0.05, -0.05, -0.049_999] {
            let direct = 1.0 / f64::exp_m1(y) - 1.0 / y;
            assert!((bose_remainder(y) - direct).abs() < 1e-12);
        }
        // g(-y) = -1 - g(y)
        for &y in &[0.01, 0.3, 2.0, 40.0] {
            assert!((bose_remainder(-y) + 1.0 + bose_remainder(y)).abs() < 1e-13);
        }
    }

    #[test]
    fn para_density_limits() {
        assert!((para_density(1e-6, 7.0) - 3.0).abs() < 1e-5);
        assert_eq!(para_density(3.0, 1.0), 0.0);
        assert!(para_density(50.0, 10.0) < 1e-20);
        // reflection h_k(-y) = (k - 1) - h_k(y)
        let (y, k) = (0.37, 12.0);
        assert!((para_density(-y, k) - (k - 1.0 - para_density(y, k))).abs() < 1e-12);
    }

    #[test]
    fn para_density_tail_vanishes() {
        // the subtracted form leaves a rounding floor of order 1e-16 / y
        for &k in &[7.0, 1019.0] {
            assert_eq!(para_density(800.0, k), 0.0);
            let y = 30.0;
            assert!((para_density(y, k) - (-y).exp()).abs() < 1e-25);
        }
    }

    #[test]
    fn level_partition_matches_direct_sum() {
        for &y in &[-0.7, -0.01, 0.0, 0.02, 1.5] {
            let k = 6.0;
            let direct: f64 = (0..=6).map(|n| (-y * n as f64).exp()).sum::<f64>().ln();
            assert!((level_log_partition(y, k) - direct).abs() < 1e-12, "y={y}");
        }
    }

    #[test]
    fn level_moments_match_direct_sums() {
        for &y in &[-0.4, -0.05, 0.0, 0.03, 0.09, 0.11, 2.0] {
            let cap = 5usize;
            let w: Vec<f64> = (0..=cap).map(|n| (-y * n as f64).exp()).collect();
            let z: f64 = w.iter().sum();
            let mean: f64 = w.iter().enumerate().map(|(n, w)| n as f64 * w).sum::<f64>() / z;
            let sq: f64 = w.iter().enumerate().map(|(n, w)| (n * n) as f64 * w).sum::<f64>() / z;
            assert!((level_mean(y, cap as f64) - mean).abs() < 1e-11, "mean y={y}");
            assert!((level_variance(y, cap as f64) - (sq - mean * mean)).abs() < 1e-10, "var y={y}");
        }
    }

    #[test]
    fn log_add_exp_is_stable() {
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
        assert!((log_sum_exp(&[0.0, 0.0, 0.0]) - 3f64.ln()).abs() < 1e-15);
    }
}
