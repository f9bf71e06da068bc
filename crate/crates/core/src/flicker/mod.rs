//! Flicker-noise spectra: cosine collocation, spectral density, the decay
//! exponent alpha, and the critical-energy verdict.

mod ensemble;

pub use ensemble::{flicker_params, flicker_weak_convergence, FlickerEnsemble, GAMMA_EDGE};

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{bose_integral, regularized_c};
use crate::thresholds::{flicker_critical_energy, k0_numeric, FlickerThreshold};

pub const MIN_LAST_INDEX: usize = 8;

/// Signal values b_0..b_s at integer times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < MIN_LAST_INDEX + 1 {
            return Err(Error::InsufficientData(format!(
                "a series needs at least {} samples, got {}",
                MIN_LAST_INDEX + 1,
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::MalformedInput { row: i + 1, message: "non-finite value".into() });
        }
        let s = (samples.len() - 1) as f64;
        let power: f64 = samples.iter().map(|v| v * v).sum();
        if !(power > 10.0 * s * f64::EPSILON) {
            return Err(Error::DegenerateSeries(format!("sum of squares {power:.3e} is numerically zero")));
        }
        Ok(TimeSeries { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Index of the last sample.
    pub fn s(&self) -> usize {
        self.samples.len() - 1
    }
}

/// sum_j w_j x_j cos(pi i j / s) for all i, w_0 = w_s = 1/2 and 1 inside,
/// through an FFT of the even extension of length 2s.
fn dct1_half(x: &[f64]) -> Vec<f64> {
    let s = x.len() - 1;
    let m = 2 * s;
    let mut buf: Vec<Complex<f64>> = (0..m).map(|j| Complex::new(if j <= s { x[j] } else { x[m - j] }, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    buf[..=s].iter().map(|c| 0.5 * c.re).collect()
}

/// Amplitudes a_i with f(j) = sum_i a_i cos(pi i j / s) = b_j at every
/// integer j in [0, s].
pub fn cosine_transform(series: &TimeSeries) -> Result<Spectrum> {
    let b = series.samples();
    let s = series.s();
    let mut a = dct1_half(b);
    for (i, v) in a.iter_mut().enumerate() {
        let w = if i == 0 || i == s { 0.5 } else { 1.0 };
        *v *= 2.0 * w / s as f64;
    }
    // FFT roundoff is of order eps log s relative to the largest amplitude
    let floor = 64.0 * f64::EPSILON * a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for v in &mut a {
        if v.abs() < floor {
            *v = 0.0;
        }
    }
    Spectrum::new(a, Some(b))
}

/// Values of sum_i a_i cos(pi i t / s) at t = 0..=s.
pub fn reconstruct(amplitudes: &[f64]) -> Vec<f64> {
    let s = amplitudes.len() - 1;
    let scaled: Vec<f64> =
        amplitudes.iter().enumerate().map(|(i, a)| if i == 0 || i == s { 2.0 * a } else { *a }).collect();
    dct1_half(&scaled)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub amplitudes: Vec<f64>,
    /// (1/s) sum a_i^2.
    #[serde(rename = "A0")]
    pub a0: f64,
    /// (1/A0) sum i^2 a_i^2.
    pub global_energy: f64,
    /// pi^2 E / s^2.
    #[serde(rename = "E_s")]
    pub e_s: f64,
    /// |lhs - rhs| / rhs for (1/s) sum' b_j^2 = (1/2) sum a_i^2 / w_i, the
    /// endpoint-weighted form of Parseval for the cosine collocation.
    pub parseval_residual: Option<f64>,
}

impl Spectrum {
    pub fn new(amplitudes: Vec<f64>, samples: Option<&[f64]>) -> Result<Self> {
        if amplitudes.len() < MIN_LAST_INDEX + 1 {
            return Err(Error::InsufficientData(format!("{} amplitudes", amplitudes.len())));
        }
        let s = amplitudes.len() - 1;
        let sf = s as f64;
        let a0 = amplitudes.iter().map(|a| a * a).sum::<f64>() / sf;
        if !(a0 > 0.0) {
            return Err(Error::DegenerateSeries("all amplitudes vanish".into()));
        }
        let moment: f64 = amplitudes.iter().enumerate().map(|(i, a)| (i * i) as f64 * a * a).sum();
        let global_energy = moment / a0;
        let parseval_residual = samples.map(|b| {
            let w = |j: usize| if j == 0 || j == s { 0.5 } else { 1.0 };
            let lhs = b.iter().enumerate().map(|(j, v)| w(j) * v * v).sum::<f64>() / sf;
            let rhs = 0.5 * amplitudes.iter().enumerate().map(|(i, a)| a * a / w(i)).sum::<f64>();
            (lhs - rhs).abs() / rhs
        });
        Ok(Spectrum { amplitudes, a0, global_energy, e_s: PI * PI * global_energy / (sf * sf), parseval_residual })
    }

    pub fn s(&self) -> usize {
        self.amplitudes.len() - 1
    }

    /// A_l = (1/(s-l)) sum_{i >= l} a_i^2 for 0 < l < s.
    pub fn density(&self, l: usize) -> Result<f64> {
        let s = self.s();
        if l == 0 || l >= s {
            return Err(Error::InvalidArgument(format!("spectral density needs 0 < l < {s}, got {l}")));
        }
        Ok(self.amplitudes[l..].iter().map(|a| a * a).sum::<f64>() / (s - l) as f64)
    }
}

/// The global energy; fails when only the constant mode is present.
pub fn global_energy(spec: &Spectrum) -> Result<f64> {
    if spec.global_energy > 0.0 {
        Ok(spec.global_energy)
    } else {
        Err(Error::ZeroEnergy)
    }
}

/// Eight geometric points between s/16 and s/2, rounded and deduplicated.
pub fn default_l_grid(s: usize) -> Vec<usize> {
    let (lo, hi) = ((s as f64 / 16.0).max(1.0), s as f64 / 2.0);
    let mut g: Vec<usize> =
        (0..8).map(|j| (lo * (hi / lo).powf(j as f64 / 7.0)).round().clamp(1.0, (s - 1) as f64) as usize).collect();
    g.dedup();
    g
}

const ALPHA_SCAN: (f64, f64) = (-1.0, 4.0);
const SCAN_STEP: f64 = 0.005;

/// Decay exponent of the spectral density.
///
/// A_l is a tail mean, so for a_i^2 ~ i^(-alpha) it is not itself a power
/// of l at finite s. The fit therefore matches ln A_l against
/// ln M_l(alpha) + const, with M_l(alpha) = (1/(s-l)) sum_{i>=l} i^(-alpha),
/// the constant profiled out; white noise gives 0 and a Wiener spectrum 2.
pub fn estimate_alpha(spec: &Spectrum, l_grid: &[usize]) -> Result<f64> {
    let s = spec.s();
    let mut grid = l_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.len() < 4 {
        return Err(Error::IllConditionedFit(format!("{} distinct grid points, need 4", grid.len())));
    }
    let mut log_a = Vec::with_capacity(grid.len());
    for &l in &grid {
        let a = spec.density(l)?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::IllConditionedFit(format!("spectral density A_{l} = {a:e} is not positive")));
        }
        log_a.push(a.ln());
    }
    let mean_a = log_a.iter().sum::<f64>() / log_a.len() as f64;
    for v in &mut log_a {
        *v -= mean_a;
    }
    let objective = |alpha: f64| {
        // suffix sums of i^(-alpha) at the grid points, one pass from s down
        let mut logs_m = vec![0.0; grid.len()];
        let mut acc = 0.0;
        let mut g = grid.len();
        for i in (grid[0]..=s).rev() {
            acc += (i as f64).powf(-alpha);
            while g > 0 && grid[g - 1] == i {
                g -= 1;
                logs_m[g] = (acc / (s - i) as f64).ln();
            }
        }
        let r: Vec<f64> = log_a.iter().zip(&logs_m).map(|(a, m)| a - m).collect();
        let mr = r.iter().sum::<f64>() / r.len() as f64;
        r.iter().map(|v| (v - mr) * (v - mr)).sum::<f64>()
    };
    let steps = ((ALPHA_SCAN.1 - ALPHA_SCAN.0) / SCAN_STEP).round() as usize;
    let (mut best, mut best_f) = (0usize, f64::INFINITY);
    for j in 0..=steps {
        let f = objective(ALPHA_SCAN.0 + j as f64 * SCAN_STEP);
        if f < best_f {
            best = j;
            best_f = f;
        }
    }
    if best == 0 || best == steps || !best_f.is_finite() {
        return Err(Error::IllConditionedFit(format!(
            "no interior minimum on [{}, {}]",
            ALPHA_SCAN.0, ALPHA_SCAN.1
        )));
    }
    // golden-section refinement inside the bracketing grid cells
    let centre = ALPHA_SCAN.0 + best as f64 * SCAN_STEP;
    let (mut lo, mut hi) = (centre - SCAN_STEP, centre + SCAN_STEP);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    while hi - lo > 1e-12 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = objective(x2);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Formulas behind the verdict.
///
/// `Printed` uses the critical energy pi^2 c0 c^(-1/g) beta^(-g) and
/// s~ = c^(1/g) c0^(1/(1+g)) E^(1/(1+g)). `Analogy` swaps in the k0-like
/// s~ with c0^(-1/(1+g)). The printed E_s^cr and s~ describe different
/// boundaries: E_s < E_s^cr holds roughly when s^2 exceeds s~, not s. So
/// `FixedPoint` instead takes E_s^cr = pi^2 E_cr(s) / s^2, where E_cr(s) is
/// the energy at which kappa = 0 for s slots, and s~ as the kappa = 0 fixed
/// point for the given E. Under this form "explosive" and "s > s~" agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlickerForm {
    #[default]
    Printed,
    Analogy,
    FixedPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlickerVerdict {
    pub alpha_fit: f64,
    pub gamma: f64,
    #[serde(rename = "E_s")]
    pub e_s: f64,
    #[serde(rename = "E_s_crit")]
    pub e_s_crit: f64,
    /// The s~ selected by `form`.
    pub s_tilde: f64,
    pub s_tilde_printed: f64,
    pub s_tilde_analogy: f64,
    pub form: FlickerForm,
    /// s - s~ clamped at 0 when explosive, 0 otherwise.
    pub s0_estimate: f64,
    pub explosive: bool,
}

pub fn flicker_verdict(spec: &Spectrum, alpha: f64) -> Result<FlickerVerdict> {
    flicker_verdict_with(spec, alpha, FlickerForm::Printed)
}

pub fn flicker_verdict_with(spec: &Spectrum, alpha: f64, form: FlickerForm) -> Result<FlickerVerdict> {
    let energy = global_energy(spec)?;
    verdict_at(alpha, energy, spec.s() as u64, form)
}

/// Energy at which kappa = 0 with s slots under weight d xi^gamma.
pub fn critical_global_energy(gamma: f64, s: f64) -> Result<f64> {
    let c = regularized_c(gamma)?.value;
    let c0 = bose_integral(1.0, gamma)?.value;
    let beta = (c * (s.powf(1.0 - gamma) - 1.0) / s).powf(1.0 / gamma);
    Ok(c0 * (1.0 - s.powf(-gamma)) * beta.powf(-1.0 - gamma))
}

/// Verdict for a global energy E at length s; E_s = pi^2 E / s^2.
pub fn verdict_at(alpha: f64, energy: f64, s: u64, form: FlickerForm) -> Result<FlickerVerdict> {
    let t: FlickerThreshold = flicker_critical_energy(alpha, energy, s)?;
    let sf = s as f64;
    let e_s = PI * PI * energy / (sf * sf);
    let (e_s_crit, s_tilde) = match form {
        FlickerForm::Printed => (t.e_s_crit, t.s_tilde),
        FlickerForm::Analogy => (t.e_s_crit, t.s_tilde_analogy),
        FlickerForm::FixedPoint => (
            PI * PI * critical_global_energy(t.gamma, sf)? / (sf * sf),
            k0_numeric(energy, t.gamma)?.result.k0,
        ),
    };
    let explosive = e_s < e_s_crit;
    Ok(FlickerVerdict {
        alpha_fit: alpha,
        gamma: t.gamma,
        e_s,
        e_s_crit,
        s_tilde,
        s_tilde_printed: t.s_tilde,
        s_tilde_analogy: t.s_tilde_analogy,
        form,
        s0_estimate: if explosive { (sf - s_tilde).max(0.0) } else { 0.0 },
        explosive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn single_mode_and_dc() {
        let s = 16;
        let b: Vec<f64> = (0..=s).map(|j| (PI * j as f64 / s as f64).cos()).collect();
        let sp = cosine_transform(&TimeSeries::new(b).unwrap()).unwrap();
        for (i, a) in sp.amplitudes.iter().enumerate() {
            assert!((a - if i == 1 { 1.0 } else { 0.0 }).abs() < 1e-10);
        }
        let sp = cosine_transform(&TimeSeries::new(vec![2.5; 11]).unwrap()).unwrap();
        assert!((sp.amplitudes[0] - 2.5).abs() < 1e-12);
        assert!(sp.amplitudes[1..].iter().all(|a| a.abs() < 1e-12));
        assert!(matches!(global_energy(&sp), Err(Error::ZeroEnergy)));
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let b: Vec<f64> = (0..=64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sp = cosine_transform(&TimeSeries::new(b.clone()).unwrap()).unwrap();
        let back = reconstruct(&sp.amplitudes);
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(b.iter().zip(&back).all(|(x, y)| (x - y).abs() < 1e-8 * scale));
        assert!(sp.parseval_residual.unwrap() < 1e-8);
    }

    #[test]
    fn energy_of_single_mode() {
        let mut a = vec![0.0; 11];
        a[1] = 1.0;
        let sp = Spectrum::new(a.clone(), None).unwrap();
        assert!((sp.a0 - 0.1).abs() < 1e-15);
        assert!((sp.global_energy - 10.0).abs() < 1e-12);
        assert!((sp.e_s * 100.0 / (PI * PI) - sp.global_energy).abs() < 1e-12);
        let doubled = Spectrum::new(a.iter().map(|v| 2.0 * v).collect(), None).unwrap();
        assert_eq!(doubled.global_energy, sp.global_energy);
    }

    fn power_spectrum(alpha: f64, s: usize) -> Spectrum {
        let a: Vec<f64> = (0..=s).map(|i| if i == 0 { 1.0 } else { (i as f64).powf(-alpha / 2.0) }).collect();
        Spectrum::new(a, None).unwrap()
    }

    #[test]
    fn power_laws_are_recovered() {
        for (alpha, tol) in [(0.0, 0.1), (1.0, 0.15), (2.0, 0.15)] {
            let sp = power_spectrum(alpha, 512);
            let fit = estimate_alpha(&sp, &default_l_grid(512)).unwrap();
            assert!((fit - alpha).abs() < tol, "alpha {alpha}: {fit}");
        }
        assert!(matches!(flicker_verdict(&power_spectrum(2.0, 512), 2.0), Err(Error::UnsupportedAlpha(_))));
    }

    #[test]
    fn alpha_fit_is_scale_invariant() {
        let sp = power_spectrum(0.8, 300);
        let grid = default_l_grid(300);
        let scaled = Spectrum::new(sp.amplitudes.iter().map(|a| -3.7 * a).collect(), None).unwrap();
        let (x, y) = (estimate_alpha(&sp, &grid).unwrap(), estimate_alpha(&scaled, &grid).unwrap());
        assert!((x - y).abs() < 1e-12, "{x} {y}");
    }

    #[test]
    fn verdict_regimes() {
        let v = verdict_at(1.0, 1e6, 1000, FlickerForm::Printed).unwrap();
        assert_eq!(v.gamma, 0.25);
        // E_s / E_s^cr grows like E^(1/(1+gamma)); sweep it through the threshold
        let mut flips = 0;
        let mut prev = None;
        for j in 0..60 {
            let e = 10f64.powf(1.0 + j as f64 * 0.15);
            let v = verdict_at(1.0, e, 1000, FlickerForm::Printed).unwrap();
            if !v.explosive {
                assert_eq!(v.s0_estimate, 0.0);
            }
            if prev.is_some_and(|p| p != v.explosive) {
                flips += 1;
            }
            prev = Some(v.explosive);
        }
        assert_eq!(flips, 1);
    }

    /// a_1 = 1 on a flat floor eps, with eps tuned so E_s = 0.1 E_s^cr.
    fn low_energy_verdict(form: FlickerForm) -> (FlickerVerdict, usize) {
        let s = 1000;
        let spec_for = |eps: f64| {
            let a: Vec<f64> = (0..=s).map(|i| if i == 1 { 1.0 } else { eps }).collect();
            Spectrum::new(a, None).unwrap()
        };
        let ratio = |eps: f64| {
            let v = flicker_verdict_with(&spec_for(eps), 1.0, form).unwrap();
            v.e_s / v.e_s_crit
        };
        let (mut lo, mut hi) = (1e-7, 1.0);
        assert!(ratio(lo) < 0.1 && ratio(hi) > 0.1);
        for _ in 0..100 {
            let mid = (lo * hi).sqrt();
            if ratio(mid) < 0.1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let v = flicker_verdict_with(&spec_for(lo), 1.0, form).unwrap();
        assert!((v.e_s / v.e_s_crit - 0.1).abs() < 1e-6);
        (v, s)
    }

    #[test]
    fn low_energy_series_is_explosive() {
        let (v, s) = low_energy_verdict(FlickerForm::FixedPoint);
        assert!(v.explosive);
        assert!(v.s0_estimate > 0.0);
        assert!((v.s0_estimate - (s as f64 - v.s_tilde)).abs() < 1e-9);
    }

    #[test]
    fn printed_boundaries_disagree_at_low_energy() {
        // E_s = 0.1 E_s^cr puts the printed s~ near s^2 / 10, far above s.
        let (v, s) = low_energy_verdict(FlickerForm::Printed);
        assert!(v.explosive);
        assert!(v.s_tilde > s as f64);
        assert_eq!(v.s0_estimate, 0.0);
    }

    #[test]
    fn fixed_point_boundaries_agree() {
        for e in [2e3, 1e4, 1e5, 1e6] {
            let v = verdict_at(1.0, e, 1000, FlickerForm::FixedPoint).unwrap();
            assert_eq!(v.explosive, 1000.0 > v.s_tilde, "E = {e}");
        }
    }
}
