//! Numerical building blocks shared by the physics modules.

pub mod accel;
pub mod dd;
pub mod oscillatory;
pub mod poly;
pub mod quadrature;
pub mod segment;

use num_complex::Complex64;

/// `(1 - e^{-z}) / z`, continuous at `z = 0`.
pub fn one_minus_exp_neg_over(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) - z / 2.0 + z2 / 6.0 - z2 * z / 24.0 + z2 * z2 / 120.0
    } else {
        (Complex64::new(1.0, 0.0) - (-z).exp()) / z
    }
}

/// `sin(Ω t) / Ω` as a function of `Ω² ∈ ℂ`; tends to `t` as `Ω → 0`.
pub fn sinc_t(omega_sq: Complex64, t: f64) -> Complex64 {
    let w = omega_sq.sqrt();
    let x = w * t;
    if x.norm() < 1e-4 {
        let x2 = x * x;
        Complex64::new(t, 0.0) * (Complex64::new(1.0, 0.0) - x2 / 6.0 + x2 * x2 / 120.0)
    } else {
        x.sin() / w
    }
}

/// `cos(Ω t)` as a function of `Ω² ∈ ℂ`.
pub fn cos_t(omega_sq: Complex64, t: f64) -> Complex64 {
    (omega_sq.sqrt() * t).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_argument_branches_are_continuous() {
        for z in [Complex64::new(9.9e-4, 0.0), Complex64::new(0.0, 9.9e-4)] {
            let series = one_minus_exp_neg_over(z);
            let direct = (Complex64::new(1.0, 0.0) - (-z).exp()) / z;
            assert!((series - direct).norm() < 1e-12);
        }
        let s = sinc_t(Complex64::new(1e-10, 0.0), 0.5);
        assert!((s.re - 0.5).abs() < 1e-10);
        // imaginary frequency: sinh
        let h = sinc_t(Complex64::new(-4.0, 0.0), 1.0);
        assert!((h.re - 2f64.sinh() / 2.0).abs() < 1e-14 && h.im.abs() < 1e-14);
    }
}
