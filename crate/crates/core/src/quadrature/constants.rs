//! Bose integrals and the regularized constants c, c0, c1.
//!
//! The Stieltjes measure d(xi^alpha) is alpha xi^(alpha-1) d(xi). On (0, 1]
//! the substitution t = xi^alpha turns it into dt, which removes the
//! endpoint singularity; the leading small-xi term is subtracted and
//! integrated by hand before that.

use serde::Serialize;

use super::adaptive::{integrate, integrate_to_infinity, Estimate, Rule, Tolerance};
use crate::error::{Error, Result};
use crate::special::{bose_remainder, gamma, zeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    AdaptiveQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralValue {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub method: Method,
}

impl IntegralValue {
    pub fn closed(value: f64) -> Self {
        IntegralValue { value, abs_error_estimate: 0.0, method: Method::ClosedForm }
    }

    fn quad(e: Estimate) -> Self {
        IntegralValue { value: e.value, abs_error_estimate: e.abs_error, method: Method::AdaptiveQuadrature }
    }
}

fn check_open_unit(alpha: f64, what: &str) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::DivergentIntegral(format!("{what} needs 0 < alpha < 1, got {alpha}")))
    }
}

/// int_0^inf xi^p / (e^xi - 1) d(xi^alpha) = alpha Gamma(p+alpha) zeta(p+alpha).
pub fn bose_integral(p: f64, alpha: f64) -> Result<IntegralValue> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let s = p + alpha;
    if !(s > 1.0) {
        return Err(Error::DivergentIntegral(format!("p + alpha = {s} <= 1")));
    }
    Ok(IntegralValue::closed(alpha * gamma(s) * zeta(s)))
}

/// The same Bose integral by quadrature, used to cross-check the closed form.
pub fn bose_integral_quadrature(p: f64, alpha: f64, rule: Rule, tol: Tolerance) -> Result<IntegralValue> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let s = p + alpha;
    if !(s > 1.0) {
        return Err(Error::DivergentIntegral(format!("p + alpha = {s} <= 1")));
    }
    // xi^p/(e^xi-1) = xi^(p-1) + xi^p g(xi); the first piece integrates exactly.
    let head = alpha / (s - 1.0);
    let inner = |t: f64| {
        if t == 0.0 {
            return if p == 0.0 { -0.5 } else { 0.0 };
        }
        let xi = t.powf(1.0 / alpha);
        xi.powf(p) * bose_remainder(xi)
    };
    let near = integrate(inner, 0.0, 1.0, tol, rule)?;
    let far = integrate_to_infinity(|x: f64| alpha * x.powf(s - 1.0) / x.exp_m1(), 1.0, 1.0, tol, rule)?;
    Ok(IntegralValue::quad(near.add(far).add(Estimate { value: head, abs_error: 0.0, converged: true })))
}

/// c(alpha) = int_0^inf (1/xi - 1/(e^xi - 1)) d(xi^alpha) for 0 < alpha < 1.
pub fn regularized_c(alpha: f64) -> Result<IntegralValue> {
    regularized_c_with(alpha, Rule::GaussKronrod, Tolerance::tight())
}

pub fn regularized_c_with(alpha: f64, rule: Rule, tol: Tolerance) -> Result<IntegralValue> {
    check_open_unit(alpha, "c")?;
    // (0,1]: -g(xi) = 1/2 - xi/12 + ..., so subtract the constant 1/2.
    let near = integrate(
        |t: f64| if t == 0.0 { 0.0 } else { -bose_remainder(t.powf(1.0 / alpha)) - 0.5 },
        0.0,
        1.0,
        tol,
        rule,
    )?;
    // (1,inf): the 1/xi part is alpha/(1-alpha) exactly; the Bose part decays.
    let bose_tail =
        integrate_to_infinity(|x: f64| alpha * x.powf(alpha - 1.0) / x.exp_m1(), 1.0, 1.0, tol, rule)?;
    let exact = 0.5 + alpha / (1.0 - alpha);
    Ok(IntegralValue::quad(near.add(bose_tail.scale(-1.0)).add(Estimate {
        value: exact,
        abs_error: 0.0,
        converged: true,
    })))
}

/// First factor of the one-dimensional constant,
/// int_0^inf (1/(e^{xi^2} - 1) - 1/xi^2) d xi (negative).
pub fn c_one_dim_first_factor(rule: Rule, tol: Tolerance) -> Result<IntegralValue> {
    let near = integrate(|x: f64| bose_remainder(x * x), 0.0, 1.0, tol, rule)?;
    let far = integrate_to_infinity(|x: f64| 1.0 / (x * x).exp_m1(), 1.0, 1.0, tol, rule)?;
    Ok(IntegralValue::quad(near.add(far).add(Estimate { value: -1.0, abs_error: 0.0, converged: true })))
}

/// Second factor (1/2 int_0^inf sqrt(xi) d xi/(e^xi - 1))^(2/3); the half
/// integral equals the Bose integral with p = 1, alpha = 1/2.
pub fn c_one_dim_second_factor() -> Result<IntegralValue> {
    let b = bose_integral(1.0, 0.5)?;
    Ok(IntegralValue::closed(b.value.powf(2.0 / 3.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OneDimConstant {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub first_factor: IntegralValue,
    pub second_factor: IntegralValue,
}

/// The product of both factors exactly as printed; only c^2 is used later,
/// so the negative sign of the first factor does not matter downstream.
pub fn c_one_dim() -> Result<OneDimConstant> {
    let first = c_one_dim_first_factor(Rule::GaussKronrod, Tolerance::tight())?;
    let second = c_one_dim_second_factor()?;
    Ok(OneDimConstant {
        value: first.value * second.value,
        abs_error_estimate: first.abs_error_estimate * second.value.abs(),
        first_factor: first,
        second_factor: second,
    })
}

/// c1(alpha) = int_0^inf d(eta^alpha) / (2 (1 + eta/2)) for 0 < alpha < 1.
pub fn c1_const(alpha: f64) -> Result<IntegralValue> {
    c1_const_with(alpha, Rule::GaussKronrod, Tolerance::tight())
}

pub fn c1_const_with(alpha: f64, rule: Rule, tol: Tolerance) -> Result<IntegralValue> {
    check_open_unit(alpha, "c1")?;
    // (0,1] with t = eta^alpha.
    let near = integrate(|t: f64| 1.0 / (2.0 + t.powf(1.0 / alpha)), 0.0, 1.0, tol, rule)?;
    // (1,inf) with u = 1/eta and then w = u^(1-alpha).
    let q = 1.0 / (1.0 - alpha);
    let far = integrate(|w: f64| 1.0 / (2.0 * w.powf(q) + 1.0), 0.0, 1.0, tol, rule)?;
    Ok(IntegralValue::quad(near.add(far.scale(alpha * q))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_forms() {
        let b = bose_integral(1.0, 1.0).unwrap();
        assert!((b.value - PI * PI / 6.0).abs() < 1e-12);
        assert_eq!(b.abs_error_estimate, 0.0);
        assert!(matches!(bose_integral(0.0, 1.0), Err(Error::DivergentIntegral(_))));
    }

    #[test]
    fn c_matches_gamma_zeta() {
        for &a in &[0.2, 0.5, 0.8] {
            let c = regularized_c(a).unwrap();
            let closed = -gamma(1.0 + a) * zeta(a);
            assert!((c.value - closed).abs() < 1e-10 * closed, "alpha {a}: {} vs {closed}", c.value);
        }
        assert!(matches!(regularized_c(1.0), Err(Error::DivergentIntegral(_))));
    }

    #[test]
    fn c1_matches_beta_form() {
        for &a in &[0.3, 0.5, 0.6] {
            let v = c1_const(a).unwrap().value;
            let closed = a * 2f64.powf(a - 1.0) * PI / (PI * a).sin();
            assert!((v - closed).abs() < 1e-10 * closed);
        }
    }

    #[test]
    fn one_dim_first_factor_sign_and_value() {
        let c = c_one_dim().unwrap();
        let expect = PI.sqrt() * zeta(0.5) / 2.0;
        assert!(c.first_factor.value < 0.0);
        assert!((c.first_factor.value - expect).abs() < 1e-10);
    }
}
