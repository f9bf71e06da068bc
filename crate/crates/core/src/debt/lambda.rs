use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, Rule, Tolerance};
use crate::special::ln_one_minus_exp_neg;

/// Monotone piecewise-cubic curve through (x_i, E_i / E_0) with a power law
/// lambda_1 (x / x_1)^q to the left of the first knot and a straight line
/// to the right of the last one. Both extensions are fitted on a quartile
/// of the knots (at least two).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaCurve {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    #[serde(skip)]
    slopes: Vec<f64>,
    /// Log-log slope of lambda against x on the first quartile.
    pub left_exponent: f64,
    /// Linear slope on the last quartile.
    pub right_slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TailClass {
    /// Both I_1 and I_2 are finite.
    Convergent,
    /// lambda ~ x^(1/alpha) near zero with 1/alpha >= 1, so I_1 diverges.
    DivergentAtZero { alpha: f64 },
}

fn least_squares(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Fritsch-Carlson derivatives with the non-centred three-point end rule.
fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: f64, h1: f64, m0: f64, m1: f64| {
        let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if d.signum() != m0.signum() {
            0.0
        } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
            3.0 * m0
        } else {
            d
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

impl LambdaCurve {
    /// Knots at normalized ranks x_i = i / count, values E_i / min E.
    pub fn from_flows(flows: &[f64]) -> Result<Self> {
        let e0 = flows.iter().copied().fold(f64::INFINITY, f64::min);
        if !(e0 > 0.0) {
            return Err(Error::DegenerateSeries(format!("minimum flow must be positive, got {e0}")));
        }
        let n = flows.len() as f64;
        let xs: Vec<f64> = (1..=flows.len()).map(|i| i as f64 / n).collect();
        let ys: Vec<f64> = flows.iter().map(|f| f / e0).collect();
        Self::from_knots(&xs, &ys)
    }

    pub fn from_knots(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 3 {
            return Err(Error::InsufficientData(format!("lambda needs at least 3 knots, got {}", xs.len())));
        }
        if xs[0] <= 0.0 || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("knot positions must be positive and increasing".into()));
        }
        if ys.iter().any(|&y| !(y > 0.0 && y.is_finite())) {
            return Err(Error::InvalidArgument("knot values must be positive".into()));
        }
        let q = (xs.len() + 3) / 4;
        let q = q.max(2);
        let lx: Vec<f64> = xs[..q].iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys[..q].iter().map(|y| y.ln()).collect();
        let left_exponent = least_squares(&lx, &ly);
        let n = xs.len();
        let right_slope = least_squares(&xs[n - q..], &ys[n - q..]);
        Ok(LambdaCurve { slopes: pchip_slopes(xs, ys), xs: xs.to_vec(), ys: ys.to_vec(), left_exponent, right_slope })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] * (x / self.xs[0]).powf(self.left_exponent);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.right_slope * (x - self.xs[n - 1]);
        }
        let i = self.xs.partition_point(|&k| k <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.ys[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * self.ys[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1]
    }

    pub fn classify(&self) -> Result<TailClass> {
        let q = self.left_exponent;
        if (q - 1.0).abs() <= super::ALPHA_EDGE {
            return Err(Error::DivergenceUndetermined(format!(
                "lambda is linear at zero (exponent {q:.9}); I_1 diverges only logarithmically"
            )));
        }
        if q > 1.0 {
            return Ok(TailClass::DivergentAtZero { alpha: 1.0 / q });
        }
        if self.right_slope <= 0.0 {
            return Err(Error::DivergenceUndetermined(format!(
                "lambda does not grow at infinity (slope {:.6e}) and shows no divergence at zero (exponent {q:.6})",
                self.right_slope
            )));
        }
        Ok(TailClass::Convergent)
    }

    /// (I_1, I_2) = int_0^inf (1, lambda) dx / (e^{b lambda} - 1).
    pub fn integrals(&self, b: f64) -> Result<(f64, f64)> {
        if self.classify()? != TailClass::Convergent {
            return Err(Error::DivergentIntegral("I_1 diverges at x = 0".into()));
        }
        let tol = Tolerance { abs: 1e-13, rel: 1e-11, ..Tolerance::default() };
        let rule = Rule::GaussKronrod;
        let occ = |lam: f64| 1.0 / (b * lam).exp_m1();
        let (x1, y1, q) = (self.xs[0], self.ys[0], self.left_exponent);
        // Left piece: x = x1 w^p with p = 1/(1-q). The Jacobian cancels the
        // 1/lambda singularity exactly, leaving x1 p/(b y1) z/(e^z - 1) with
        // z = b lambda.
        let (l1, l2) = if q > 0.0 {
            let p = 1.0 / (1.0 - q);
            let z = |w: f64| b * y1 * w.powf(p * q);
            let r = |z: f64| if z == 0.0 { 1.0 } else { z / z.exp_m1() };
            let pre = x1 * p / (b * y1);
            (
                pre * integrate(|w| r(z(w)), 0.0, 1.0, tol, rule)?.value,
                pre / b * integrate(|w| z(w) * r(z(w)), 0.0, 1.0, tol, rule)?.value,
            )
        } else {
            (
                integrate(|x| occ(self.eval(x)), 0.0, x1, tol, rule)?.value,
                integrate(|x| self.eval(x) * occ(self.eval(x)), 0.0, x1, tol, rule)?.value,
            )
        };
        let mut i1 = l1;
        let mut i2 = l2;
        for w in self.xs.windows(2) {
            i1 += integrate(|x| occ(self.eval(x)), w[0], w[1], tol, rule)?.value;
            i2 += integrate(|x| self.eval(x) * occ(self.eval(x)), w[0], w[1], tol, rule)?.value;
        }
        // Linear tail: lambda runs from y_N to infinity with slope m.
        let m = self.right_slope;
        let y = b * self.ys[self.ys.len() - 1];
        i1 += -ln_one_minus_exp_neg(y) / (b * m);
        let tail = integrate_to_infinity(|u| u / u.exp_m1(), y, 1.0, tol, rule)?.value;
        i2 += tail / (m * b * b);
        Ok((i1, i2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_data_is_reproduced() {
        let xs = [0.2, 0.4, 0.6, 0.8, 1.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + x).collect();
        let c = LambdaCurve::from_knots(&xs, &ys).unwrap();
        for x in [0.25, 0.5, 0.77, 1.0, 1.5] {
            assert!((c.eval(x) - (1.0 + x)).abs() < 1e-12);
        }
        assert!((c.right_slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let xs = [0.1, 0.2, 0.3, 0.4, 1.0];
        let ys = [1.0, 1.0, 5.0, 5.1, 5.2];
        let c = LambdaCurve::from_knots(&xs, &ys).unwrap();
        let mut prev = c.eval(0.1);
        for i in 1..=90 {
            let v = c.eval(0.1 + i as f64 * 0.01);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn linear_growth_integrals_match_closed_form_on_interior() {
        // lambda = 1 + x: the interior and tail pieces are exact, so compare
        // I_1 minus the left piece with the closed form from x1.
        let xs: Vec<f64> = (1..=8).map(|i| i as f64 / 8.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + x).collect();
        let c = LambdaCurve::from_knots(&xs, &ys).unwrap();
        assert_eq!(c.classify().unwrap(), TailClass::Convergent);
        let b = 0.7;
        let (i1, i2) = c.integrals(b).unwrap();
        let closed = -ln_one_minus_exp_neg(b * (1.0 + xs[0])) / b;
        let q = c.left_exponent;
        let left = integrate(
            |x: f64| 1.0 / (b * ys[0] * (x / xs[0]).powf(q)).exp_m1(),
            0.0,
            xs[0],
            Tolerance::default(),
            Rule::GaussKronrod,
        )
        .unwrap()
        .value;
        assert!((i1 - left - closed).abs() < 1e-9);
        assert!(i2 / i1 > 1.0);
    }
}
