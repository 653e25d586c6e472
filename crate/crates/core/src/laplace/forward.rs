//! Forward Laplace transform of sampled time functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::integrate_with_breaks;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardLaplace {
    /// `∫₀^{t_max} f(t) e^{-st} dt`.
    pub value: Complex64,
    pub error: f64,
    /// Estimate of `∫_{t_max}^∞ f e^{-st}` assuming `|f|` stays at `|f(t_max)|`.
    pub tail: f64,
    pub warning: bool,
}

pub const FORWARD_TAIL_TOLERANCE: f64 = 1e-8;

/// Adaptive Gauss–Kronrod on `[0, t_max]`, cut into panels no longer than
/// a quarter period of `e^{-i Im(s) t}` and one decay length of `e^{-Re(s) t}`.
pub fn forward_laplace<F>(f: F, s: Complex64, t_max: f64) -> Result<ForwardLaplace>
where
    F: Fn(f64) -> Complex64,
{
    if !(s.re > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "forward Laplace transform needs Re(s) > 0, got {s}"
        )));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "cutoff must be positive and finite, got {t_max}"
        )));
    }
    let panel = (std::f64::consts::FRAC_PI_2 / s.im.abs().max(1e-300))
        .min(1.0 / s.re)
        .min(t_max);
    let n = ((t_max / panel).ceil() as usize).min(100_000);
    let breaks: Vec<f64> = (1..n).map(|k| k as f64 * t_max / n as f64).collect();
    let q = integrate_with_breaks(
        |t: f64| f(t) * (-s * t).exp(),
        0.0,
        t_max,
        &breaks,
        1e-15,
        1e-12,
        200,
    );
    let tail = f(t_max).norm() * (-s.re * t_max).exp() / s.re;
    Ok(ForwardLaplace {
        value: q.value,
        error: q.error,
        tail,
        warning: tail > FORWARD_TAIL_TOLERANCE * q.value.norm().max(1.0),
    })
}
