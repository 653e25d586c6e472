//! Exact integrals of piecewise-linear data against complex exponentials.
//!
//! For a segment `[x0, x1]` carrying the linear interpolant of `(y0, y1)`,
//! `∫ y(x) e^{κx} dx` is evaluated in closed form, switching to a Taylor
//! series when `|κ h|` is small enough for the closed form to cancel.

use num_complex::Complex64;

/// `(∫₀¹ (1-u) e^{θu} du, ∫₀¹ u e^{θu} du)`.
fn linear_moments(theta: Complex64) -> (Complex64, Complex64) {
    if theta.norm() < 1.0 {
        let mut term = Complex64::new(1.0, 0.0); // θ^n / n!
        let mut i0 = Complex64::new(0.0, 0.0);
        let mut i1 = Complex64::new(0.0, 0.0);
        for n in 0..30 {
            let nf = n as f64;
            i0 += term / ((nf + 1.0) * (nf + 2.0));
            i1 += term / (nf + 2.0);
            term = term * theta / (nf + 1.0);
            if term.norm() < 1e-18 {
                break;
            }
        }
        (i0, i1)
    } else {
        let e = theta.exp();
        let mean = (e - 1.0) / theta;
        let i1 = e / theta - (e - 1.0) / (theta * theta);
        (mean - i1, i1)
    }
}

/// `∫_{x0}^{x1} y(x) e^{κx} dx` for the linear interpolant of `y0, y1`.
pub fn linear_segment_exp(x0: f64, x1: f64, y0: Complex64, y1: Complex64, kappa: Complex64) -> Complex64 {
    let h = x1 - x0;
    if h == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let (i0, i1) = linear_moments(kappa * h);
    (kappa * x0).exp() * (y0 * i0 + y1 * i1) * h
}

/// `∫ y(x) sin(t x) dx` over the piecewise-linear interpolant of real samples.
pub fn piecewise_linear_sine(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let kappa = Complex64::new(0.0, t);
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| {
            linear_segment_exp(x[0], x[1], Complex64::new(y[0], 0.0), Complex64::new(y[1], 0.0), kappa).im
        })
        .sum()
}
