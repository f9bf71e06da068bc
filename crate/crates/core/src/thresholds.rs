//! Critical numbers of parts k0(n) and the flicker critical energy.
//!
//! This module is the single source of every threshold reported elsewhere.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{bose_integral, c_one_dim, regularized_c};

/// c = 2 pi / sqrt 6 of the planar two-term law.
pub fn erdos_c() -> f64 {
    2.0 * PI / 6f64.sqrt()
}

/// Second-term coefficient -2 ln(c/2).
pub fn erdos_alpha() -> f64 {
    -2.0 * (erdos_c() / 2.0).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMethod {
    ErdosTwoTerm,
    LeadingOrder,
    D1Closed,
    GeneralAlpha,
    NumericFixedPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub k0: f64,
    pub method: ThresholdMethod,
    pub alpha: f64,
    pub n: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ThresholdResult {
    fn new(k0: f64, method: ThresholdMethod, alpha: f64, n: f64) -> Self {
        ThresholdResult { k0, method, alpha, n, warnings: Vec::new() }
    }
}

fn check_n(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    Ok(n as f64)
}

/// (sqrt 6 / (2 pi)) sqrt(n) ln n.
pub fn k0_leading(n: u64) -> Result<ThresholdResult> {
    let nf = check_n(n)?;
    let k0 = 0.5 / (PI * PI / 6.0).sqrt() * nf.sqrt() * nf.ln();
    Ok(ThresholdResult::new(k0, ThresholdMethod::LeadingOrder, 1.0, nf))
}

/// Two-term planar law c^-1 sqrt(n) (ln n - 2 ln(c/2)), equivalently
/// (sqrt(n)/C) ln(sqrt(n)/C) with C = c/2 = pi/sqrt 6.
pub fn k0_erdos(n: u64) -> Result<ThresholdResult> {
    let nf = check_n(n)?;
    let k0 = nf.sqrt() / erdos_c() * (nf.ln() + erdos_alpha());
    Ok(ThresholdResult::new(k0, ThresholdMethod::ErdosTwoTerm, 1.0, nf))
}

/// The two-term display read literally, c^-1 sqrt(n) ln(c^-1 sqrt(n)) + a sqrt(n).
/// Kept for comparison only; it falls far below the exact mode.
pub fn k0_erdos_literal(n: u64) -> Result<f64> {
    let nf = check_n(n)?;
    let x = nf.sqrt() / erdos_c();
    Ok(x * x.ln() + erdos_alpha() * nf.sqrt())
}

/// 4 c^2 n^(2/3) with the one-dimensional constant c.
pub fn k0_d1(n: u64) -> Result<ThresholdResult> {
    let nf = check_n(n)?;
    let c = c_one_dim()?.value;
    let mut r = ThresholdResult::new(4.0 * c * c * nf.powf(2.0 / 3.0), ThresholdMethod::D1Closed, 0.5, nf);
    r.alpha = 0.5;
    Ok(r)
}

/// How b is read off the one-dimensional energy relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum D1Convention {
    /// n = b^(-3/2) int sqrt(xi) / (e^xi - 1) d xi.
    #[default]
    RightmostPrinted,
    /// n = 1/2 b^(-3/2) int sqrt(xi) / (e^xi - 1) d xi.
    HalfFactor,
}

pub fn b_d1(n: f64, convention: D1Convention) -> Result<f64> {
    // int sqrt(xi)/(e^xi-1) d xi = Gamma(3/2) zeta(3/2) = 2 * bose(1, 1/2)
    let i = 2.0 * bose_integral(1.0, 0.5)?.value;
    let scale = match convention {
        D1Convention::RightmostPrinted => 1.0,
        D1Convention::HalfFactor => 0.5,
    };
    Ok((scale * i / n).powf(2.0 / 3.0))
}

/// Cross-check for the line case: the larger root x of the quadratic in
/// x = sqrt(k0) obtained by subtracting 1/xi^2 from both Bose terms,
/// x^2 - A x + A = 0 with A = |c_first| / sqrt(b).
pub fn k0_d1_quadratic(n: u64, convention: D1Convention) -> Result<f64> {
    let nf = check_n(n)?;
    let b = b_d1(nf, convention)?;
    let a = c_one_dim()?.first_factor.value.abs() / b.sqrt();
    let disc = a * a - 4.0 * a;
    if disc < 0.0 {
        return Err(Error::OutOfRange(format!("no real root for n = {n}")));
    }
    let x = 0.5 * (a + disc.sqrt());
    Ok(x * x)
}

/// c^(1/alpha) n^(1/(1+alpha)) B^(-1/(1+alpha)) for 0 < alpha < 1, where B is
/// the Bose integral with p = 1. Non-integer n is allowed.
pub fn k0_general(n: f64, alpha: f64) -> Result<ThresholdResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::DivergentIntegral(format!(
            "the general-alpha law needs 0 < alpha < 1, got {alpha}; alpha = 1 uses the two-term planar law"
        )));
    }
    if !(n > 0.0) {
        return Err(Error::InvalidArgument(format!("n must be positive, got {n}")));
    }
    let c = regularized_c(alpha)?.value;
    let big_b = bose_integral(1.0, alpha)?.value;
    let e = 1.0 / (1.0 + alpha);
    let k0 = c.powf(1.0 / alpha) * n.powf(e) * big_b.powf(-e);
    let mut r = ThresholdResult::new(k0, ThresholdMethod::GeneralAlpha, alpha, n);
    if alpha > 0.95 {
        r.warnings.push(format!("alpha = {alpha} > 0.95: c(alpha) diverges as alpha -> 1 and the power law degrades"));
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericThreshold {
    pub result: ThresholdResult,
    /// Inverse temperature of the kappa = 0 state at k0.
    pub b: f64,
    /// Relative residual of the fixed-point equation.
    pub residual: f64,
}

/// Number of parts F0 carried at kappa = 0 in scaled units:
/// c(alpha)(k^(1-alpha) - 1), or ln k when alpha = 1.
fn f0_at_zero(k: f64, alpha: f64, c: f64) -> f64 {
    if alpha == 1.0 {
        k.ln()
    } else {
        c * (k.powf(1.0 - alpha) - 1.0)
    }
}

/// The kappa = 0 fixed point k = b(k)^(-alpha) F0(0; k), with b(k) from the
/// energy equation b^(1+alpha) n = B (1 - k^(-alpha)).
pub fn k0_numeric(n: f64, alpha: f64) -> Result<NumericThreshold> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(n >= 100.0) {
        return Err(Error::InvalidArgument(format!("k0_numeric needs n >= 100, got {n}")));
    }
    let big_b = bose_integral(1.0, alpha)?.value;
    let c = if alpha < 1.0 { regularized_c(alpha)?.value } else { 0.0 };
    let b_of = |k: f64| (big_b * (1.0 - k.powf(-alpha)) / n).powf(1.0 / (1.0 + alpha));
    let phi = |k: f64| 1.0 - b_of(k).powf(-alpha) * f0_at_zero(k, alpha, c) / k;
    // phi < 0 at small k and > 0 at k = n; bisect in ln k.
    let (mut lo, mut hi) = (2f64.ln(), n.ln());
    if phi(lo.exp()) >= 0.0 || phi(hi.exp()) <= 0.0 {
        return Err(Error::NoConvergence(format!("fixed point not bracketed in [2, {n}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if phi(mid.exp()) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k0 = (0.5 * (lo + hi)).exp();
    let residual = phi(k0).abs();
    if !(residual < 1e-8) {
        return Err(Error::NoConvergence(format!("fixed-point residual {residual:.3e}")));
    }
    Ok(NumericThreshold {
        result: ThresholdResult::new(k0, ThresholdMethod::NumericFixedPoint, alpha, n),
        b: b_of(k0),
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlickerThreshold {
    pub alpha: f64,
    pub gamma: f64,
    pub c: f64,
    pub c0: f64,
    pub beta: f64,
    pub energy: f64,
    pub s: u64,
    pub e_s_crit: f64,
    /// c^(1/g) c0^(1/(1+g)) E^(1/(1+g)) as printed.
    pub s_tilde: f64,
    /// The k0-analogue form with c0^(-1/(1+g)).
    pub s_tilde_analogy: f64,
}

/// gamma = 1/2 - alpha/4 for the spectral exponent alpha in (0, 2).
pub fn flicker_gamma(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::UnsupportedAlpha(alpha));
    }
    Ok(0.5 - alpha / 4.0)
}

/// Critical temperature pi^2 c0 c^(-1/gamma) beta^(-gamma), with beta from the
/// energy relation at kappa = 0: beta^(-1-gamma) c0 (1 - s^-gamma) = E.
pub fn flicker_critical_energy(alpha: f64, energy: f64, s: u64) -> Result<FlickerThreshold> {
    let gamma = flicker_gamma(alpha)?;
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(Error::InvalidArgument(format!("energy must be positive, got {energy}")));
    }
    if s < 2 {
        return Err(Error::InvalidArgument(format!("s must be at least 2, got {s}")));
    }
    let c = regularized_c(gamma)?.value;
    let c0 = bose_integral(1.0, gamma)?.value;
    let sf = s as f64;
    let e1 = 1.0 / (1.0 + gamma);
    let beta = (c0 * (1.0 - sf.powf(-gamma)) / energy).powf(e1);
    let e_s_crit = PI * PI * c0 * c.powf(-1.0 / gamma) * beta.powf(-gamma);
    let s_tilde = c.powf(1.0 / gamma) * c0.powf(e1) * energy.powf(e1);
    let s_tilde_analogy = c.powf(1.0 / gamma) * c0.powf(-e1) * energy.powf(e1);
    Ok(FlickerThreshold { alpha, gamma, c, c0, beta, energy, s, e_s_crit, s_tilde, s_tilde_analogy })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_constants() {
        assert!((erdos_c() - 2.565_099_660_323_728).abs() < 1e-12);
        assert!((erdos_alpha() + 0.497_700_302_470_745_3).abs() < 1e-12);
        assert!((k0_leading(10_000).unwrap().k0 - 359.06).abs() < 0.01);
    }

    #[test]
    fn erdos_forms_agree() {
        let n = 10_000u64;
        let c = PI / 6f64.sqrt();
        let x = (n as f64).sqrt() / c;
        assert!((k0_erdos(n).unwrap().k0 - x * x.ln()).abs() < 1e-9);
    }

    #[test]
    fn general_alpha_guards() {
        assert!(matches!(k0_general(1e6, 1.0), Err(Error::DivergentIntegral(_))));
        assert!(!k0_general(1e6, 0.97).unwrap().warnings.is_empty());
    }

    #[test]
    fn flicker_gamma_values() {
        assert_eq!(flicker_gamma(1.0).unwrap(), 0.25);
        assert!(matches!(flicker_gamma(2.0), Err(Error::UnsupportedAlpha(_))));
    }
}
