//! The two-equation system for (b, kappa) and the quantities built on it.
//!
//! With theta = b kappa and the substitution u = b x, the continuum system
//!
//!   k = b^{-alpha} F0(theta),   n = b^{-1-alpha} F1(theta),
//!   F_p(theta) = int_0^inf u^p h_k(u + theta) d(u^alpha),
//!
//! separates the scale b from the shape variable theta. The lattice
//! ensemble replaces the integrals by sums over levels x_i = i^(1/alpha).
//! Both are solved in (ln b, theta) by damped Newton with a
//! finite-difference Jacobian, falling back to nested bisection.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::adaptive::{integrate, integrate_to_infinity, Estimate, Rule, Tolerance};
use crate::quadrature::bose_integral;
use crate::special::{level_log_partition, level_variance, para_density};

/// Levels with reduced energy above this carry less than e^-60 occupancy.
const LATTICE_CUTOFF: f64 = 60.0;
const NEWTON_TOL: f64 = 1e-12;
const MAX_NEWTON: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParastatProblem {
    pub n: f64,
    pub k: f64,
    pub alpha: f64,
    /// Level spacing; n is measured in units of it.
    pub epsilon: f64,
}

impl ParastatProblem {
    pub fn new(n: u64, k: u64, alpha: f64) -> Result<Self> {
        Self::real(n as f64, k as f64, alpha)
    }

    /// Real-valued n and k. The threshold k0 is not an integer, and the
    /// defining property kappa(k0) = 0 is only exact at the real value.
    pub fn real(n: f64, k: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if !(k >= 1.0 && n >= k && n.is_finite()) {
            return Err(Error::InvalidArgument(format!("need n >= k >= 1, got n = {n}, k = {k}")));
        }
        Ok(ParastatProblem { n, k, alpha, epsilon: 1.0 })
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::real(self.n, k, self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// Integral (Euler-Maclaurin) form of the constraints.
    Continuum,
    /// Level sums over x_i = i^(1/alpha).
    Lattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Newton,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoParams {
    pub b: f64,
    pub kappa: f64,
    /// Relative residuals of the k- and n-equations.
    pub residuals: [f64; 2],
    pub ensemble: Ensemble,
    pub method: SolveMethod,
    pub iterations: usize,
}

impl ThermoParams {
    pub fn theta(&self) -> f64 {
        self.b * self.kappa
    }

    /// Chemical potential in the scaled variable, -b kappa. This is the
    /// quantity whose size the Lemma windows bound when k > k0.
    pub fn mu_scaled(&self) -> f64 {
        -self.b * self.kappa
    }
}

/// The bracketed density 1/(e^{b(x+kappa)} - 1) - k/(e^{bk(x+kappa)} - 1).
pub fn occupancy_density(x: f64, params: &ThermoParams, k: f64) -> Result<f64> {
    let shifted = x + params.kappa;
    if shifted <= 0.0 && params.kappa >= 0.0 {
        return Err(Error::PoleAtZero(shifted));
    }
    Ok(para_density(params.b * shifted, k))
}

fn quad_tol() -> Tolerance {
    Tolerance { abs: 1e-15, rel: 1e-12, max_depth: 60 }
}

/// Breakpoints in u resolving the 1/k structure near u = -theta.
fn breakpoints(theta: f64, k: f64) -> (Vec<f64>, f64) {
    let u0 = (-theta).max(0.0);
    let mut pts = vec![0.0];
    let mut m = 1.0;
    while m / k < 1.0 {
        pts.push(m / k);
        if u0 > 0.0 {
            if u0 - m / k > 0.0 {
                pts.push(u0 - m / k);
            }
            pts.push(u0 + m / k);
        }
        m *= 4.0;
    }
    if u0 > 0.0 {
        pts.push(u0);
        let mut f = 0.5;
        while f > 1e-3 {
            pts.push(u0 * (1.0 - f));
            f *= 0.25;
        }
    }
    let top = u0 + 1.0;
    pts.push(top);
    pts.retain(|&p| p <= top);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1e-300));
    (pts, top)
}

/// int_0^inf f(u) d(u^alpha), with t = u^alpha on the first piece.
fn stieltjes<F: Fn(f64) -> f64>(f: F, alpha: f64, theta: f64, k: f64) -> Result<Estimate> {
    weighted_integral(f, alpha, theta, k, &[])
}

/// int_0^inf f(u) d(u^alpha) for integrands shaped like h_k(u + theta),
/// with optional extra breakpoints where f jumps.
pub fn weighted_integral<F: Fn(f64) -> f64>(f: F, alpha: f64, theta: f64, k: f64, breaks: &[f64]) -> Result<Estimate> {
    let tol = quad_tol();
    let (mut pts, mut top) = breakpoints(theta, k);
    for &x in breaks {
        if x > 0.0 && x.is_finite() {
            pts.push(x);
            top = top.max(x);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let rule = Rule::GaussKronrod;
    let first = pts[1];
    let inv = 1.0 / alpha;
    let mut acc = integrate(|t: f64| f(t.powf(inv)), 0.0, first.powf(alpha), tol, rule)?;
    let weighted = |u: f64| f(u) * alpha * u.powf(alpha - 1.0);
    for w in pts[1..].windows(2) {
        acc = acc.add(integrate(weighted, w[0], w[1], tol, rule)?);
    }
    acc = acc.add(integrate_to_infinity(weighted, top, 1.0, tol, rule)?);
    Ok(acc)
}

/// F_p(theta) = int_0^inf u^p h_k(u + theta) d(u^alpha) for p in {0, 1}.
pub fn continuum_moment(p: u32, theta: f64, k: f64, alpha: f64) -> Result<f64> {
    let e = stieltjes(|u| u.powi(p as i32) * para_density(u + theta, k), alpha, theta, k)?;
    Ok(e.value)
}

fn lattice_levels(b: f64, theta: f64, alpha: f64) -> impl Iterator<Item = f64> {
    let inv = 1.0 / alpha;
    (1u64..)
        .map(move |i| (i as f64).powf(inv))
        .take_while(move |&x| b * x + theta <= LATTICE_CUTOFF || x * b < 1.0)
}

/// Model values (k, n) implied by (b, theta).
pub fn model_constraints(b: f64, theta: f64, k: f64, alpha: f64, ensemble: Ensemble) -> Result<(f64, f64)> {
    match ensemble {
        Ensemble::Continuum => {
            let f0 = continuum_moment(0, theta, k, alpha)?;
            let f1 = continuum_moment(1, theta, k, alpha)?;
            Ok((b.powf(-alpha) * f0, b.powf(-1.0 - alpha) * f1))
        }
        Ensemble::Lattice => {
            let (mut s0, mut s1) = (0.0, 0.0);
            for x in lattice_levels(b, theta, alpha) {
                let h = para_density(b * x + theta, k);
                s0 += h;
                s1 += x * h;
            }
            Ok((s0, s1))
        }
    }
}

struct System {
    n: f64,
    k: f64,
    alpha: f64,
    ensemble: Ensemble,
}

impl System {
    fn residual(&self, lnb: f64, theta: f64) -> Result<[f64; 2]> {
        let (km, nm) = model_constraints(lnb.exp(), theta, self.k, self.alpha, self.ensemble)?;
        if !(km > 0.0 && nm > 0.0) {
            return Err(Error::NoConvergence(format!("non-positive model moments at theta = {theta}")));
        }
        Ok([(km / self.k).ln(), (nm / self.n).ln()])
    }

    fn theta_step(&self, theta: f64) -> f64 {
        1e-6 * theta.abs().max(1.0 / self.k)
    }

    fn jacobian(&self, lnb: f64, theta: f64) -> Result<[[f64; 2]; 2]> {
        let h = self.theta_step(theta);
        let rp = self.residual(lnb, theta + h)?;
        let rm = self.residual(lnb, theta - h)?;
        let dt = [(rp[0] - rm[0]) / (2.0 * h), (rp[1] - rm[1]) / (2.0 * h)];
        let db = match self.ensemble {
            // b enters the continuum form only through b^-alpha and b^-1-alpha.
            Ensemble::Continuum => [-self.alpha, -1.0 - self.alpha],
            Ensemble::Lattice => {
                let hb = 1e-6;
                let bp = self.residual(lnb + hb, theta)?;
                let bm = self.residual(lnb - hb, theta)?;
                [(bp[0] - bm[0]) / (2.0 * hb), (bp[1] - bm[1]) / (2.0 * hb)]
            }
        };
        Ok([[db[0], dt[0]], [db[1], dt[1]]])
    }

    fn newton(&self, lnb0: f64, theta0: f64) -> Result<(f64, f64, usize)> {
        let (mut lnb, mut theta) = (lnb0, theta0);
        let mut r = self.residual(lnb, theta)?;
        let norm = |r: &[f64; 2]| r[0].abs().max(r[1].abs());
        for it in 0..MAX_NEWTON {
            if norm(&r) < NEWTON_TOL {
                return Ok((lnb, theta, it));
            }
            let j = self.jacobian(lnb, theta)?;
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if !(det.abs() > 1e-300) || !det.is_finite() {
                return Err(Error::NoConvergence("singular Jacobian".into()));
            }
            let d_lnb = (-r[0] * j[1][1] + r[1] * j[0][1]) / det;
            let d_theta = (-r[1] * j[0][0] + r[0] * j[1][0]) / det;
            let mut step = 1.0;
            loop {
                let cand = (lnb + step * d_lnb, theta + step * d_theta);
                if let Ok(rc) = self.residual(cand.0, cand.1) {
                    if norm(&rc) < norm(&r) {
                        lnb = cand.0;
                        theta = cand.1;
                        r = rc;
                        break;
                    }
                }
                step *= 0.5;
                if step < 1e-9 {
                    return Err(Error::NoConvergence("line search stalled".into()));
                }
            }
        }
        if norm(&r) < NEWTON_TOL * 1e3 {
            return Ok((lnb, theta, MAX_NEWTON));
        }
        Err(Error::NoConvergence(format!("Newton iteration limit, residual {:.3e}", norm(&r))))
    }

    /// ln b solving the k-equation at fixed theta.
    fn inner_lnb(&self, theta: f64, guess: f64) -> Result<f64> {
        match self.ensemble {
            Ensemble::Continuum => {
                let f0 = continuum_moment(0, theta, self.k, self.alpha)?;
                Ok((f0 / self.k).ln() / self.alpha)
            }
            Ensemble::Lattice => {
                // The k-equation residual decreases in ln b at fixed theta.
                let f = |lnb: f64| self.residual(lnb, theta).map(|r| r[0]);
                let (mut lo, mut hi) = (guess - 0.5, guess + 0.5);
                let mut tries = 0;
                while f(lo)? < 0.0 {
                    lo -= 1.0;
                    tries += 1;
                    if tries > 60 {
                        return Err(Error::NoConvergence("cannot bracket ln b".into()));
                    }
                }
                while f(hi)? > 0.0 {
                    hi += 1.0;
                    tries += 1;
                    if tries > 60 {
                        return Err(Error::NoConvergence("cannot bracket ln b".into()));
                    }
                }
                bisect(f, lo, hi, 1e-14)
            }
        }
    }

    fn bisection(&self, lnb0: f64) -> Result<(f64, f64, usize)> {
        // The reduced n-residual increases with theta.
        let reduced = |theta: f64| -> Result<f64> {
            let lnb = self.inner_lnb(theta, lnb0)?;
            Ok(self.residual(lnb, theta)?[1])
        };
        let r0 = reduced(0.0)?;
        let (lo, hi) = if r0 < 0.0 {
            let mut hi = 0.25;
            while reduced(hi)? < 0.0 {
                hi *= 2.0;
                if hi > 1e3 {
                    return Err(Error::NoConvergence("cannot bracket theta above".into()));
                }
            }
            (0.0, hi)
        } else {
            let mut lo = -1.0 / self.k;
            while reduced(lo)? > 0.0 {
                lo *= 2.0;
                if lo < -1e3 {
                    return Err(Error::NoConvergence("cannot bracket theta below".into()));
                }
            }
            (lo, 0.0)
        };
        let theta = bisect(|t| reduced(t), lo, hi, 1e-16)?;
        let lnb = self.inner_lnb(theta, lnb0)?;
        Ok((lnb, theta, 0))
    }
}

/// Bisection for an increasing function with f(lo) <= 0 <= f(hi).
fn bisect<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol * (1.0 + mid.abs()) || mid == lo || mid == hi {
            return Ok(mid);
        }
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Starting b from the kappa = 0 closed form of the n-equation.
fn initial_lnb(n: f64, k: f64, alpha: f64) -> Result<f64> {
    let big_b = bose_integral(1.0, alpha)?.value;
    Ok(((big_b * (1.0 - k.powf(-alpha)) / n).ln()) / (1.0 + alpha))
}

pub fn solve_b_kappa(problem: &ParastatProblem) -> Result<ThermoParams> {
    solve_in(problem, Ensemble::Continuum)
}

pub fn solve_in(problem: &ParastatProblem, ensemble: Ensemble) -> Result<ThermoParams> {
    if problem.k < 2.0 {
        return Err(Error::InfeasibleProblem("k < 2: the density vanishes identically for k = 1".into()));
    }
    if problem.n / problem.k < 2.0 {
        return Err(Error::InfeasibleProblem(format!("n/k = {} < 2", problem.n / problem.k)));
    }
    let sys = System { n: problem.n, k: problem.k, alpha: problem.alpha, ensemble };
    let lnb0 = initial_lnb(problem.n, problem.k, problem.alpha)?;
    let (lnb, theta, iterations, method) = match sys.newton(lnb0, 0.0) {
        Ok((l, t, it)) => (l, t, it, SolveMethod::Newton),
        Err(_) => {
            let (l, t, it) = sys.bisection(lnb0)?;
            (l, t, it, SolveMethod::Bisection)
        }
    };
    let b = lnb.exp();
    let (km, nm) = model_constraints(b, theta, problem.k, problem.alpha, ensemble)?;
    let residuals = [km / problem.k - 1.0, nm / problem.n - 1.0];
    if residuals.iter().any(|r| !(r.abs() < 1e-8)) {
        return Err(Error::NoConvergence(format!("residuals {residuals:?} above tolerance")));
    }
    Ok(ThermoParams { b, kappa: theta / b, residuals, ensemble, method, iterations })
}

/// S = b n + b kappa k + sum/integral of ln sum_{N=0}^{k} e^{-b(x+kappa)N}.
///
/// The ensemble recorded in `params` selects the integral or the lattice sum.
pub fn entropy(problem: &ParastatProblem, params: &ThermoParams) -> Result<f64> {
    let (b, theta, k, alpha) = (params.b, params.theta(), problem.k, problem.alpha);
    let level_sum = match params.ensemble {
        Ensemble::Continuum => {
            let e = stieltjes(|u| level_log_partition(u + theta, k), alpha, theta, k)?;
            b.powf(-alpha) * e.value
        }
        Ensemble::Lattice => lattice_levels(b, theta, alpha).map(|x| level_log_partition(b * x + theta, k)).sum(),
    };
    let s = b * problem.n + theta * k + level_sum;
    if !s.is_finite() {
        return Err(Error::NoConvergence("non-finite entropy".into()));
    }
    Ok(s)
}

/// Saddle-point estimate of ln p_k(n) on the lattice: the entropy minus
/// the Gaussian fluctuation correction ln(2 pi) + 1/2 ln det Cov(N, E).
pub fn log_count(problem: &ParastatProblem) -> Result<f64> {
    let params = solve_in(problem, Ensemble::Lattice)?;
    let s = entropy(problem, &params)?;
    let (b, theta) = (params.b, params.theta());
    let (mut m00, mut m01, mut m11) = (0.0, 0.0, 0.0);
    for x in lattice_levels(b, theta, problem.alpha) {
        let v = level_variance(b * x + theta, problem.k);
        m00 += v;
        m01 += v * x;
        m11 += v * x * x;
    }
    let det = m00 * m11 - m01 * m01;
    if !(det > 0.0) {
        return Err(Error::NoConvergence("degenerate fluctuation matrix".into()));
    }
    Ok(s - (2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln())
}

/// ln(p_k(n) / p_{k0}(n)) from the fluctuation-corrected lattice counts.
pub fn log_prob_ratio(n: f64, alpha: f64, k: f64, k0: f64) -> Result<f64> {
    if k == k0 {
        return Ok(0.0);
    }
    let a = log_count(&ParastatProblem::real(n, k, alpha)?)?;
    let b = log_count(&ParastatProblem::real(n, k0, alpha)?)?;
    Ok(a - b)
}

/// Centre of the Lemma window for log(mu)/log(k) when k >> k0.
pub fn lemma_exponent(alpha: f64) -> f64 {
    -1.0 / (alpha + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_pole_and_limit() {
        let p = ThermoParams {
            b: 0.5,
            kappa: 0.0,
            residuals: [0.0; 2],
            ensemble: Ensemble::Continuum,
            method: SolveMethod::Newton,
            iterations: 0,
        };
        assert!(matches!(occupancy_density(0.0, &p, 5.0), Err(Error::PoleAtZero(_))));
        assert!((occupancy_density(2e-6, &p, 5.0).unwrap() - 2.0).abs() < 1e-5);
        assert_eq!(occupancy_density(1.0, &p, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_theta_moments_match_closed_forms() {
        let (k, a) = (300.0, 0.5);
        let c = crate::quadrature::regularized_c(a).unwrap().value;
        let bb = bose_integral(1.0, a).unwrap().value;
        let f0 = continuum_moment(0, 0.0, k, a).unwrap();
        let f1 = continuum_moment(1, 0.0, k, a).unwrap();
        assert!((f0 - c * (k.powf(1.0 - a) - 1.0)).abs() < 1e-10 * f0);
        assert!((f1 - bb * (1.0 - k.powf(-a))).abs() < 1e-10 * f1);
        let f0_planar = continuum_moment(0, 0.0, k, 1.0).unwrap();
        assert!((f0_planar - k.ln()).abs() < 1e-10);
    }

    #[test]
    fn lattice_and_continuum_roundtrip() {
        for ens in [Ensemble::Continuum, Ensemble::Lattice] {
            let pr = ParastatProblem::new(2000, 150, 1.0).unwrap();
            let p = solve_in(&pr, ens).unwrap();
            assert!(p.residuals[0].abs() < 1e-10 && p.residuals[1].abs() < 1e-10, "{ens:?} {p:?}");
        }
    }

    #[test]
    fn infeasible_ratio() {
        let pr = ParastatProblem::new(30, 20, 1.0).unwrap();
        assert!(matches!(solve_b_kappa(&pr), Err(Error::InfeasibleProblem(_))));
    }
}
