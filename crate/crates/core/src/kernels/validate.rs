//! Checks on computed kernels: the homogeneous mode equation, the
//! nondispersive energy invariant and the late-time decay rate.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{KernelKind, KernelSeries, Medium};
use crate::error::{Error, Result};
use crate::medium::{ModelKind, SusceptibilityModel};
use crate::numerics::quadrature::gauss_legendre;

/// Sampling density required by [`ode_residual`].
pub const MIN_POINTS_PER_PERIOD: f64 = 40.0;

/// Sixth-order central second difference (times `h²`).
const D2: [f64; 7] = [
    1.0 / 90.0,
    -3.0 / 20.0,
    3.0 / 2.0,
    -49.0 / 18.0,
    3.0 / 2.0,
    -3.0 / 20.0,
    1.0 / 90.0,
];

/// Sixth-order central first difference (times `h`).
const D1: [f64; 7] = [
    -1.0 / 60.0,
    3.0 / 20.0,
    -3.0 / 4.0,
    0.0,
    3.0 / 4.0,
    -3.0 / 20.0,
    1.0 / 60.0,
];

const HALF: usize = 3;

/// Jumps of a box response propagate into ever higher derivatives of the
/// kernel at multiples of its width; this many are kept off the stencils.
const BOX_BREAKS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `max |Z̈ + ω_q²Z + d/dt(χₑ∗Ż) − ω_q²(χₘ∗Z)|` over checked points.
    pub max: f64,
    /// Time of the maximum.
    pub at: f64,
    pub points_per_period: f64,
    /// Residual modulus per grid point; `None` where the stencil reaches
    /// the grid ends or straddles a kink of the response.
    pub residuals: Vec<Option<f64>>,
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    super::validate_grid(times)?;
    if times.len() < 2 * HALF + 1 {
        return Err(Error::InvalidParameter(format!(
            "need at least {} samples, got {}",
            2 * HALF + 1,
            times.len()
        )));
    }
    let t_max = *times.last().unwrap();
    let n = times.len() - 1;
    if times
        .iter()
        .enumerate()
        .any(|(i, &t)| (t - i as f64 * t_max / n as f64).abs() > 1e-9 * t_max)
    {
        return Err(Error::InvalidParameter("time grid must be uniform".into()));
    }
    Ok(t_max / n as f64)
}

/// Times where the response of `model` or its derivative jumps.
fn breaks(model: &SusceptibilityModel) -> Result<Vec<f64>> {
    match &model.kind {
        ModelKind::Vacuum | ModelKind::Step { .. } | ModelKind::Lorentz { .. } => Ok(Vec::new()),
        ModelKind::Box { delta, .. } => Ok((1..=BOX_BREAKS).map(|k| k as f64 * delta).collect()),
        ModelKind::Tabulated(_) => Err(Error::Unsupported(
            "mode-equation residual needs an analytic response (vacuum, box, step or lorentz)".into(),
        )),
    }
}

/// `dχ/dt` away from the break points.
fn chi_rate(model: &SusceptibilityModel, t: f64) -> f64 {
    match model.kind {
        ModelKind::Lorentz {
            omega0,
            gamma,
            omegap,
        } => {
            let nu2 = Complex64::new(omega0 * omega0 - gamma * gamma / 4.0, 0.0);
            let sinc = crate::numerics::sinc_t(nu2, t).re;
            let cos = crate::numerics::cos_t(nu2, t).re;
            omegap * omegap * (-gamma * t / 2.0).exp() * (cos - gamma / 2.0 * sinc)
        }
        _ => 0.0,
    }
}

/// Piecewise Lagrange interpolation of grid samples that never mixes nodes
/// from different sides of a break.
struct Interpolant<'a> {
    values: &'a [Complex64],
    h: f64,
    /// Sorted, including 0 and the grid end.
    breaks: Vec<f64>,
}

impl Interpolant<'_> {
    fn eval(&self, u: f64) -> Complex64 {
        let n = self.values.len();
        let k = self.breaks.partition_point(|&b| b <= u).clamp(1, self.breaks.len() - 1);
        let (a, b) = (self.breaks[k - 1], self.breaks[k]);
        let lo = ((a / self.h - 1e-9).ceil().max(0.0)) as usize;
        let hi = ((b / self.h + 1e-9).floor() as usize).min(n - 1);
        let lo = lo.min(hi);
        let width = (hi - lo + 1).min(6);
        let centre = (u / self.h).floor() as isize - (width as isize - 1) / 2;
        let start = centre.clamp(lo as isize, (hi + 1 - width) as isize) as usize;
        let xs = u / self.h;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in start..start + width {
            let mut w = 1.0;
            for m in start..start + width {
                if m != j {
                    w *= (xs - m as f64) / (j as f64 - m as f64);
                }
            }
            acc += self.values[j] * w;
        }
        acc
    }
}

/// `∫₀^t χ(v) Z(t − v) dv` with Gauss–Legendre panels split at every grid
/// node and at every break of `χ` and of `Z`.
fn convolution(
    model: &SusceptibilityModel,
    z: &Interpolant,
    t: f64,
    chi_breaks: &[f64],
    nodes: &(Vec<f64>, Vec<f64>),
) -> Complex64 {
    let support = match model.kind {
        ModelKind::Box { delta, .. } => delta.min(t),
        _ => t,
    };
    if support <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut cuts: Vec<f64> = (0..)
        .map(|j| j as f64 * z.h)
        .take_while(|&v| v < support)
        .collect();
    cuts.extend(chi_breaks.iter().copied().filter(|&b| b > 0.0 && b < support));
    cuts.extend(z.breaks.iter().map(|&b| t - b).filter(|&v| v > 0.0 && v < support));
    cuts.push(support);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * z.h);
    let (xg, wg) = nodes;
    let mut acc = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
        for (x, wt) in xg.iter().zip(wg) {
            let v = mid + half * x;
            acc += z.eval(t - v) * (model.chi_time(v).unwrap_or(0.0) * wt * half);
        }
    }
    acc
}

/// Residual of the homogeneous mode equation along a computed `Z`.
///
/// With `E = χₑ∗Z` the memory term equals `Ë − χₑ'(t) Z(0)`, so only
/// `Z + E` is differentiated; that sum stays smooth even where `Z` has a
/// thin initial layer.
pub fn ode_residual(z: &KernelSeries, medium: &Medium, omega_q: f64) -> Result<ResidualReport> {
    if z.kind != KernelKind::Z {
        return Err(Error::InvalidParameter(format!(
            "mode-equation residual applies to Z, got {}",
            z.kind.as_str()
        )));
    }
    let h = uniform_step(&z.times)?;
    let omega_max = [&medium.electric, &medium.magnetic]
        .iter()
        .filter_map(|m| match m.kind {
            ModelKind::Lorentz { omega0, .. } => Some(omega0),
            _ => None,
        })
        .fold(omega_q, f64::max);
    let points_per_period = if omega_max > 0.0 {
        2.0 * std::f64::consts::PI / (h * omega_max)
    } else {
        f64::INFINITY
    };
    if points_per_period < MIN_POINTS_PER_PERIOD {
        return Err(Error::Resolution {
            points_per_period,
            required: MIN_POINTS_PER_PERIOD,
        });
    }
    let e_breaks = breaks(&medium.electric)?;
    let m_breaks = breaks(&medium.magnetic)?;
    let n = z.values.len();
    let t_end = z.times[n - 1];
    let mut all_breaks: Vec<f64> = e_breaks.iter().chain(&m_breaks).copied().filter(|&b| b < t_end).collect();
    all_breaks.sort_by(f64::total_cmp);
    let mut z_breaks = vec![0.0];
    z_breaks.extend(all_breaks.iter().copied());
    z_breaks.push(t_end);
    let interp = Interpolant {
        values: &z.values,
        h,
        breaks: z_breaks,
    };
    let nodes = gauss_legendre(8);
    let conv = |model: &SusceptibilityModel, br: &[f64]| -> Vec<Complex64> {
        if model.is_vacuum() {
            return vec![Complex64::new(0.0, 0.0); n];
        }
        z.times
            .par_iter()
            .map(|&t| convolution(model, &interp, t, br, &nodes))
            .collect()
    };
    let e = conv(&medium.electric, &e_breaks);
    let m = conv(&medium.magnetic, &m_breaks);
    let y: Vec<Complex64> = z.values.iter().zip(&e).map(|(a, b)| a + b).collect();
    let w2 = omega_q * omega_q;
    let z0 = z.values[0];
    let mut residuals = vec![None; n];
    let (mut max, mut at) = (0.0_f64, 0.0);
    for i in HALF..n - HALF {
        let t = z.times[i];
        let (lo, hi) = (t - HALF as f64 * h, t + HALF as f64 * h);
        let margin = 1e-9 * h;
        if all_breaks.iter().any(|&b| b > lo + margin && b < hi - margin) {
            continue;
        }
        let d2: Complex64 = D2
            .iter()
            .enumerate()
            .map(|(k, c)| y[i + k - HALF] * *c)
            .sum::<Complex64>()
            / (h * h);
        let r = d2 + (z.values[i] - m[i]) * w2 - z0 * chi_rate(&medium.electric, t);
        let r = r.norm();
        residuals[i] = Some(r);
        if r > max {
            max = r;
            at = t;
        }
    }
    Ok(ResidualReport {
        max,
        at,
        points_per_period,
        residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `max |H(t) − H(0)| / |H(0)|`.
    pub max_deviation: f64,
}

/// `H(t) = (1 + χₑ⁰)|Ż|² + (ω_q²/(1 + χₘ⁰))|Z|²`.
///
/// Uses the exact derivative carried by the series when present and
/// sixth-order differences (interior points only) otherwise.
pub fn energy_invariant(z: &KernelSeries, chi_e0: f64, chi_m0: f64, omega_q: f64) -> Result<EnergyReport> {
    let n = z.values.len();
    let (times, dz): (Vec<f64>, Vec<Complex64>) = match &z.derivative {
        Some(d) => (z.times.clone(), d.clone()),
        None => {
            let h = uniform_step(&z.times)?;
            (HALF..n - HALF)
                .map(|i| {
                    let d = D1
                        .iter()
                        .enumerate()
                        .map(|(k, c)| z.values[i + k - HALF] * *c)
                        .sum::<Complex64>()
                        / h;
                    (z.times[i], d)
                })
                .unzip()
        }
    };
    let offset = if z.derivative.is_some() { 0 } else { HALF };
    let values: Vec<f64> = dz
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let v = z.values[j + offset];
            (1.0 + chi_e0) * d.norm_sqr() + omega_q * omega_q / (1.0 + chi_m0) * v.norm_sqr()
        })
        .collect();
    let h0 = values.first().copied().unwrap_or(0.0);
    let max_deviation = values
        .iter()
        .map(|v| (v - h0).abs() / h0.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(EnergyReport {
        times,
        values,
        max_deviation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    pub pass: bool,
    pub fitted_rate: f64,
    /// `|fitted/expected − 1|`; the check passes at 0.1 or below.
    pub margin: f64,
    pub peaks: usize,
}

/// Relative tolerance on the fitted decay rate.
pub const DECAY_RATE_TOLERANCE: f64 = 0.1;

/// Fits the log-envelope of the transient part of a series.
///
/// The persistent oscillation left by the bath pole (if any) is removed
/// first; the local maxima of what remains are fitted by a straight line
/// in `ln |·|`.
pub fn asymptotic_decay_check(series: &KernelSeries, rate: f64) -> Result<DecayCheck> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!("decay rate must be positive, got {rate}")));
    }
    let t_end = *series.times.last().unwrap_or(&0.0);
    if t_end < 10.0 / rate {
        return Err(Error::Inconclusive(format!(
            "series ends at t = {t_end}, before 10/rate = {}",
            10.0 / rate
        )));
    }
    let transient: Vec<Complex64> = series
        .times
        .iter()
        .zip(&series.values)
        .map(|(&t, v)| v - series.persistent.map_or(Complex64::new(0.0, 0.0), |p| p.eval(t)))
        .collect();
    // The modulus of a rotating phasor has no peaks; track the stronger quadrature instead.
    let re_max = transient.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let im_max = transient.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let r: Vec<f64> = transient
        .iter()
        .map(|v| if re_max >= im_max { v.re.abs() } else { v.im.abs() })
        .collect();
    let r_max = r.iter().copied().fold(0.0, f64::max);
    let m_max = transient.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let m_min = transient.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if m_max - m_min <= 1e-9 * m_max {
        // Flat envelope: nothing decays.
        return Ok(DecayCheck {
            pass: false,
            fitted_rate: 0.0,
            margin: 1.0,
            peaks: 0,
        });
    }
    let floor = (1e-13 * r_max).max(100.0 * series.accuracy);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for i in 1..r.len() - 1 {
        if r[i] > r[i - 1] && r[i] >= r[i + 1] && r[i] > floor {
            let (a, b, c) = (r[i - 1].ln(), r[i].ln(), r[i + 1].ln());
            let curv = a - 2.0 * b + c;
            let (dt, peak) = if curv < 0.0 {
                let d = 0.5 * (a - c) / curv;
                (d, b - 0.25 * (a - c) * d)
            } else {
                (0.0, b)
            };
            let h = series.times[i + 1] - series.times[i];
            pts.push((series.times[i] + dt * h, peak));
        }
    }
    if pts.len() < 5 {
        return Err(Error::Inconclusive(format!(
            "{} envelope peaks above the noise floor, at least 5 needed",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let (mt, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / k,
        pts.iter().map(|p| p.1).sum::<f64>() / k,
    );
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let fitted_rate = -sxy / sxx;
    let margin = (fitted_rate / rate - 1.0).abs();
    Ok(DecayCheck {
        pass: margin <= DECAY_RATE_TOLERANCE,
        fitted_rate,
        margin,
        peaks: pts.len(),
    })
}
