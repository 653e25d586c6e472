//! Dense polynomials over the complex numbers and their roots.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::dd;

/// Polynomial with ascending coefficients: `c[0] + c[1] s + c[2] s^2 + ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim_exact();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| c(x)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(v: Complex64) -> Self {
        Self::new(vec![v])
    }

    /// `s - root`.
    pub fn linear_factor(root: Complex64) -> Self {
        Self::new(vec![-root, c(1.0)])
    }

    fn trim_exact(&mut self) {
        while matches!(self.coeffs.last(), Some(z) if z.norm() == 0.0) {
            self.coeffs.pop();
        }
    }

    /// Drops leading coefficients below `rel_tol` times the largest one.
    pub fn trimmed(&self, rel_tol: f64) -> Self {
        let scale = self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut out = self.coeffs.clone();
        while matches!(out.last(), Some(z) if z.norm() <= rel_tol * scale) {
            out.pop();
        }
        Poly { coeffs: out }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(c(0.0))
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(c(0.0), |acc, &k| acc * s + k)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &z)| z * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&z| z * k).collect())
    }

    pub fn add(&self, o: &Poly) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut out = vec![c(0.0); n];
        for (i, z) in self.coeffs.iter().enumerate() {
            out[i] += z;
        }
        for (i, z) in o.coeffs.iter().enumerate() {
            out[i] += z;
        }
        Self::new(out)
    }

    pub fn sub(&self, o: &Poly) -> Self {
        self.add(&o.scale(c(-1.0)))
    }

    pub fn mul(&self, o: &Poly) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![c(0.0); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Coefficients of `p(point + u)` in powers of `u` (Taylor shift).
    pub fn taylor_at(&self, point: Complex64) -> Vec<Complex64> {
        let mut a = self.coeffs.clone();
        let n = a.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let next = a[j + 1];
                a[j] += point * next;
            }
        }
        a
    }

    /// All complex roots via companion-matrix eigenvalues, each refined by a
    /// Newton step evaluated in double-double arithmetic.
    pub fn roots(&self) -> Result<Vec<Root>> {
        let p = self.trimmed(0.0);
        let Some(deg) = p.degree() else {
            return Err(Error::InvalidParameter(
                "cannot find roots of the zero polynomial".into(),
            ));
        };
        if deg == 0 {
            return Ok(Vec::new());
        }
        let lead = p.leading();
        let monic: Vec<Complex64> = p.coeffs.iter().map(|z| z / lead).collect();
        let raw: Vec<Complex64> = if deg == 1 {
            vec![-monic[0]]
        } else {
            let mut m = DMatrix::<Complex64>::zeros(deg, deg);
            for i in 1..deg {
                m[(i, i - 1)] = c(1.0);
            }
            for i in 0..deg {
                m[(i, deg - 1)] = -monic[i];
            }
            let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000).ok_or_else(
                || Error::RootFinding {
                    message: format!("companion eigenvalue iteration failed for degree {deg}"),
                    condition: f64::INFINITY,
                },
            )?;
            let (_, t) = schur.unpack();
            (0..deg).map(|i| t[(i, i)]).collect()
        };
        let scale = monic.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let mut roots = Vec::with_capacity(deg);
        for r0 in raw {
            if !(r0.re.is_finite() && r0.im.is_finite()) {
                return Err(Error::RootFinding {
                    message: "non-finite eigenvalue".into(),
                    condition: f64::INFINITY,
                });
            }
            let (v, d) = dd::horner_with_derivative(&monic, r0);
            let polished = if d.norm() > 0.0 {
                let step = v / d;
                // Accept the Newton step only if it is small relative to the
                // root; near multiple roots the step is ill-defined.
                if step.norm() <= 1e-6 * r0.norm().max(1.0) {
                    r0 - step
                } else {
                    r0
                }
            } else {
                r0
            };
            let (res, dres) = dd::horner_with_derivative(&monic, polished);
            let condition = if dres.norm() > 0.0 {
                scale / (dres.norm() * polished.norm().max(1.0))
            } else {
                f64::INFINITY
            };
            roots.push(Root {
                value: polished,
                residual: res.norm(),
                condition,
            });
        }
        Ok(roots)
    }
}

/// A computed polynomial root with its (monic-scaled) residual and a
/// first-order condition estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: Complex64,
    pub residual: f64,
    pub condition: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_real_quartic() {
        // (s^2 + 1)(s + 2)(s - 3)
        let p = Poly::from_real(&[1.0, 0.0, 1.0])
            .mul(&Poly::from_real(&[2.0, 1.0]))
            .mul(&Poly::from_real(&[-3.0, 1.0]));
        let r = p.roots().unwrap();
        assert_eq!(r.len(), 4);
        for target in [
            Complex64::new(-2.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(3.0, 0.0),
        ] {
            let best = r
                .iter()
                .map(|x| (x.value - target).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-13, "{target}: {best}");
        }
    }

    #[test]
    fn roots_with_complex_coefficients() {
        let p = Poly::linear_factor(Complex64::new(0.0, -1.5))
            .mul(&Poly::linear_factor(Complex64::new(-0.1, 2.0)))
            .mul(&Poly::linear_factor(Complex64::new(-0.3, -0.7)));
        let r = p.roots().unwrap();
        for target in [
            Complex64::new(0.0, -1.5),
            Complex64::new(-0.1, 2.0),
            Complex64::new(-0.3, -0.7),
        ] {
            let best = r
                .iter()
                .map(|x| (x.value - target).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-13, "{target}: {best}");
        }
    }

    #[test]
    fn taylor_shift_reproduces_values() {
        let p = Poly::from_real(&[1.0, -2.0, 0.5, 3.0]);
        let at = Complex64::new(0.7, -0.2);
        let t = Poly::new(p.taylor_at(at));
        let u = Complex64::new(0.3, 0.1);
        assert!((t.eval(u) - p.eval(at + u)).norm() < 1e-13);
    }

    #[test]
    fn derivative_and_arithmetic() {
        let p = Poly::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(p.derivative(), Poly::from_real(&[2.0, 6.0]));
        assert_eq!(p.sub(&p), Poly::zero());
        assert_eq!(p.degree(), Some(2));
        assert_eq!(Poly::zero().degree(), None);
    }
}
