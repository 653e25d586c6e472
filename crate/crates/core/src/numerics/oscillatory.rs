//! Semi-infinite Fourier sine/cosine integrals by half-period panels.
//!
//! `∫₀^∞ g(t) sin(ωt) dt` is split at `t = kπ/ω` (plus any breakpoints of
//! `g`). Each panel is integrated with adaptive Gauss–Kronrod and the
//! sequence of partial sums is accelerated with Wynn's epsilon algorithm,
//! which is exact for panel sequences made of finitely many geometric
//! modes (exponentially damped or Abel-regularized oscillations).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numerics::accel::wynn_epsilon;
use crate::numerics::quadrature::integrate_with_breaks;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weight {
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy)]
pub struct OscillatoryOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub min_panels: usize,
    pub max_panels: usize,
}

impl Default for OscillatoryOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-11,
            min_panels: 10,
            max_panels: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OscillatoryResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
    pub accelerated: bool,
}

/// `∫₀^end g(t) w(ωt) dt` with `end = support_end` or `∞`.
pub fn fourier_integral<G: Fn(f64) -> f64>(
    g: G,
    omega: f64,
    weight: Weight,
    breaks: &[f64],
    support_end: Option<f64>,
    opts: OscillatoryOptions,
) -> OscillatoryResult {
    assert!(omega > 0.0, "oscillatory panels need omega > 0");
    let integrand = |t: f64| {
        let w = match weight {
            Weight::Sin => (omega * t).sin(),
            Weight::Cos => (omega * t).cos(),
        };
        g(t) * w
    };
    let period = std::f64::consts::PI / omega;
    let panel_tol = opts.abs_tol * 1e-2;

    if let Some(end) = support_end {
        let mut cuts: Vec<f64> = breaks.to_vec();
        let n = (end / period).ceil() as usize;
        cuts.extend((1..n).map(|k| k as f64 * period));
        let q = integrate_with_breaks(&integrand, 0.0, end, &cuts, panel_tol, opts.rel_tol * 1e-2, 200 * (n + 1));
        return OscillatoryResult {
            value: q.value,
            error: q.error,
            panels: n,
            converged: q.converged,
            accelerated: false,
        };
    }

    let mut sums: Vec<Complex64> = Vec::new();
    let mut running = 0.0;
    let mut quad_err = 0.0;
    let mut last_estimate: Option<f64> = None;
    let mut stable = 0;
    let mut small_terms = 0;
    let window = 40;
    for k in 0..opts.max_panels {
        let a = k as f64 * period;
        let b = a + period;
        let q = integrate_with_breaks(&integrand, a, b, breaks, panel_tol, 1e-13, 400);
        running += q.value;
        quad_err += q.error;
        sums.push(Complex64::new(running, 0.0));

        let scale = running.abs().max(opts.abs_tol);
        if q.value.abs() <= 1e-3 * opts.rel_tol * scale || q.value.abs() <= 1e-3 * opts.abs_tol {
            small_terms += 1;
        } else {
            small_terms = 0;
        }
        if k + 1 >= opts.min_panels && small_terms >= 3 {
            return OscillatoryResult {
                value: running,
                error: quad_err + q.value.abs(),
                panels: k + 1,
                converged: true,
                accelerated: false,
            };
        }
        if k + 1 >= opts.min_panels {
            let start = sums.len().saturating_sub(window);
            let ex = wynn_epsilon(&sums[start..]);
            let est = ex.value.re;
            if let Some(prev) = last_estimate {
                let tol = opts.abs_tol.max(opts.rel_tol * est.abs());
                if (est - prev).abs() <= tol && ex.error <= 10.0 * tol {
                    stable += 1;
                    if stable >= 2 {
                        return OscillatoryResult {
                            value: est,
                            error: (est - prev).abs().max(ex.error) + quad_err,
                            panels: k + 1,
                            converged: true,
                            accelerated: true,
                        };
                    }
                } else {
                    stable = 0;
                }
            }
            last_estimate = Some(est);
        }
    }
    let start = sums.len().saturating_sub(window);
    let ex = wynn_epsilon(&sums[start..]);
    OscillatoryResult {
        value: ex.value.re,
        error: ex.error + quad_err,
        panels: opts.max_panels,
        converged: false,
        accelerated: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn damped_exponential_sine_transform() {
        // ∫ e^{-at} sin(ωt) dt = ω / (a² + ω²)
        for &(a, w) in &[(0.3, 2.0), (1e-3, 0.7), (2.0, 0.05)] {
            let r = fourier_integral(|t| (-a * t).exp(), w, Weight::Sin, &[], None, Default::default());
            let exact = w / (a * a + w * w);
            assert!(r.converged, "{a} {w}: {r:?}");
            assert!(((r.value - exact) / exact).abs() < 1e-9, "{a} {w}: {} vs {exact}", r.value);
        }
    }

    #[test]
    fn cosine_transform_of_damped_oscillation() {
        // ∫ e^{-t} cos(2t) cos(ωt) dt
        let w = 1.3;
        let f = |x: f64| 0.5 * (1.0 / (1.0 + x * x));
        let exact = f(2.0 - w) + f(2.0 + w);
        let r = fourier_integral(|t| (-t).exp() * (2.0 * t).cos(), w, Weight::Cos, &[], None, Default::default());
        assert!((r.value - exact).abs() < 1e-10, "{} vs {exact}", r.value);
    }

    #[test]
    fn compact_support_with_jump() {
        // box of height 2 on (0, 0.5): ∫ 2 sin(ωt) = 2(1 - cos(0.5ω))/ω
        let w = 9.0;
        let r = fourier_integral(
            |t| if t < 0.5 { 2.0 } else { 0.0 },
            w,
            Weight::Sin,
            &[0.5],
            Some(0.5),
            Default::default(),
        );
        let exact = 2.0 * (1.0 - (0.5 * w).cos()) / w;
        assert!((r.value - exact).abs() < 1e-13);
    }
}
