//! Globally adaptive Gauss-Kronrod (G7/K15) and locally adaptive Simpson.
//!
//! Both engines work on finite intervals with integrands that are bounded
//! there; callers remove endpoint singularities by substitution first. The
//! two schemes share nothing but the interface, so running a constant
//! through both is a genuine cross-check.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    /// Maximum number of interval halvings below the starting interval.
    pub max_depth: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-10, rel: 1e-9, max_depth: 60 }
    }
}

impl Tolerance {
    pub fn tight() -> Self {
        Tolerance { abs: 1e-14, rel: 1e-12, max_depth: 60 }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    /// False when the depth or segment limit stopped refinement early.
    pub converged: bool,
}

impl Estimate {
    pub fn zero() -> Self {
        Estimate { value: 0.0, abs_error: 0.0, converged: true }
    }

    pub fn add(self, other: Estimate) -> Estimate {
        Estimate {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            converged: self.converged && other.converged,
        }
    }

    pub fn scale(self, c: f64) -> Estimate {
        Estimate { value: c * self.value, abs_error: c.abs() * self.abs_error, converged: self.converged }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    GaussKronrod,
    Simpson,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    // Largest error first; the left endpoint breaks ties deterministically.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error).then(other.a.total_cmp(&self.a))
    }
}

/// Returns (value, error, roundoff_limited).
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, bool) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * h;
    resasc *= h.abs();
    resabs *= h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (1.0f64).min((200.0 * err / resasc).powf(1.5));
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    let mut limited = false;
    if err <= floor {
        err = floor;
        limited = true;
    }
    // Intervals too short to bisect further in floating point.
    if (b - a).abs() <= 1e3 * f64::EPSILON * c.abs().max(f64::MIN_POSITIVE) {
        limited = true;
    }
    (value, err, limited)
}

const MAX_SEGMENTS: usize = 5_000;

/// Globally adaptive G7/K15: always bisect the segment with the largest
/// error estimate until the summed error meets the tolerance. Segments at
/// the roundoff floor or the depth limit are retired from refinement.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::zero());
    }
    let mut heap = std::collections::BinaryHeap::new();
    let (mut retired_value, mut retired_error) = (0.0, 0.0);
    let (v, e, lim) = kronrod15(&f, a, b);
    if lim {
        retired_value = v;
        retired_error = e;
    } else {
        heap.push(Segment { a, b, value: v, error: e, depth: 0 });
    }
    let mut total = v;
    let mut err = e;
    let mut converged = true;
    let mut count = 1;
    while err > tol.target(total) {
        let Some(s) = heap.pop() else { break };
        if s.depth >= tol.max_depth || count >= MAX_SEGMENTS {
            converged = false;
            heap.push(s);
            break;
        }
        let m = 0.5 * (s.a + s.b);
        let (v1, e1, l1) = kronrod15(&f, s.a, m);
        let (v2, e2, l2) = kronrod15(&f, m, s.b);
        count += 1;
        for (lo, hi, v, e, l) in [(s.a, m, v1, e1, l1), (m, s.b, v2, e2, l2)] {
            if l {
                retired_value += v;
                retired_error += e;
            } else {
                heap.push(Segment { a: lo, b: hi, value: v, error: e, depth: s.depth + 1 });
            }
        }
        total += v1 + v2 - s.value;
        err += e1 + e2 - s.error;
        if count % 64 == 0 {
            total = retired_value + heap.iter().map(|s| s.value).sum::<f64>();
            err = retired_error + heap.iter().map(|s| s.error).sum::<f64>();
        }
    }
    // Final sum in a fixed order so the result does not depend on drift.
    let mut segs: Vec<&Segment> = heap.iter().collect();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    total = retired_value + segs.iter().map(|s| s.value).sum::<f64>();
    err = retired_error + segs.iter().map(|s| s.error).sum::<f64>();
    if !total.is_finite() {
        return Err(Error::NoConvergence(format!("non-finite integral on [{a}, {b}]")));
    }
    Ok(Estimate { value: total, abs_error: err, converged })
}

fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
    max_depth: u32,
    converged: &mut bool,
) -> (f64, f64) {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= max_depth {
        *converged = false;
        return (left + right + delta / 15.0, delta.abs());
    }
    if delta.abs() <= 15.0 * eps && depth >= 4 {
        return (left + right + delta / 15.0, delta.abs() / 15.0);
    }
    let (v1, e1) = simpson_rec(f, a, fa, lm, flm, m, fm, left, 0.5 * eps, depth + 1, max_depth, converged);
    let (v2, e2) = simpson_rec(f, m, fm, rm, frm, b, fb, right, 0.5 * eps, depth + 1, max_depth, converged);
    (v1 + v2, e1 + e2)
}

/// Recursive adaptive Simpson with Richardson extrapolation on each accepted
/// panel. The local tolerance halves with every bisection.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::zero());
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // A cheap magnitude estimate lets the relative tolerance take part.
    let eps = tol.target(whole);
    let mut converged = true;
    let (value, err) = simpson_rec(&f, a, fa, m, fm, b, fb, whole, eps, 0, tol.max_depth.min(40), &mut converged);
    if !value.is_finite() {
        return Err(Error::NoConvergence(format!("non-finite integral on [{a}, {b}]")));
    }
    Ok(Estimate { value, abs_error: err, converged })
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance, rule: Rule) -> Result<Estimate> {
    match rule {
        Rule::GaussKronrod => gauss_kronrod(f, a, b, tol),
        Rule::Simpson => simpson(f, a, b, tol),
    }
}

/// Integrate over sorted breakpoints, one adaptive call per piece.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: Tolerance, rule: Rule) -> Result<Estimate> {
    let mut acc = Estimate::zero();
    for w in points.windows(2) {
        if w[1] > w[0] {
            acc = acc.add(integrate(f, w[0], w[1], tol, rule)?);
        }
    }
    Ok(acc)
}

/// Integral of an exponentially decaying integrand over [a, inf).
///
/// Panels of doubling width starting at `scale` are added until the
/// integrand falls below 1e-16 of its observed peak; an exponential-tail
/// bound for the neglected remainder joins the error estimate.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, tol: Tolerance, rule: Rule) -> Result<Estimate> {
    let mut points = vec![a];
    let mut peak = f(a).abs();
    let mut width = scale;
    let mut x = a;
    loop {
        x += width;
        points.push(x);
        let fx = f(x).abs();
        peak = peak.max(fx);
        if fx <= 1e-16 * peak || fx == 0.0 {
            break;
        }
        if points.len() > 200 {
            return Err(Error::NoConvergence(format!("integrand does not decay beyond x = {x}")));
        }
        width *= 2.0;
    }
    let body = integrate_pieces(&f, &points, tol, rule)?;
    let tail = f(x).abs() * (x - a).max(scale);
    Ok(Estimate { value: body.value, abs_error: body.abs_error + tail, converged: body.converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let e = gauss_kronrod(|x| x.powi(5) - 3.0 * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((e.value - (64.0 / 6.0 - 6.0)).abs() < 1e-13);
        let s = simpson(|x| x * x * x, 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((s.value - 0.25).abs() < 1e-14);
    }

    #[test]
    fn both_rules_agree_on_peaked_integrand() {
        let f = |x: f64| 1.0 / (1e-4 + (x - 0.3) * (x - 0.3));
        let exact = ((0.7f64) / 1e-2).atan() / 1e-2 + ((0.3f64) / 1e-2).atan() / 1e-2;
        let tol = Tolerance::tight();
        let g = gauss_kronrod(f, 0.0, 1.0, tol).unwrap();
        let s = simpson(f, 0.0, 1.0, tol).unwrap();
        assert!((g.value - exact).abs() / exact < 1e-11);
        assert!((s.value - exact).abs() / exact < 1e-9);
        assert!(g.converged);
    }

    #[test]
    fn semi_infinite_exponential() {
        let e = integrate_to_infinity(|x| (-x).exp(), 0.0, 1.0, Tolerance::tight(), Rule::GaussKronrod).unwrap();
        assert!((e.value - 1.0).abs() < 1e-13);
        assert!(e.abs_error >= 0.0);
    }

    #[test]
    fn deterministic_bits() {
        let f = |x: f64| (x * 7.3).sin() / (1.0 + x);
        let a = gauss_kronrod(f, 0.0, 9.0, Tolerance::tight()).unwrap();
        let b = gauss_kronrod(f, 0.0, 9.0, Tolerance::tight()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
