//! Bath dispersion relations `ω(|k|)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A map from bath wavenumber `|k|` to angular frequency. Only strictly
/// increasing maps are admissible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DispersionRelation {
    /// `ω = c |k|`
    Linear { c: f64 },
    /// `ω = a |k|^p`
    PowerLaw { a: f64, p: f64 },
    /// `ω = Σ_n coeffs[n] |k|^(n+1)`; admissibility is checked where used.
    Polynomial { coeffs: Vec<f64> },
}

impl DispersionRelation {
    pub fn linear(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "linear dispersion needs c > 0, got {c}"
            )));
        }
        Ok(Self::Linear { c })
    }

    pub fn power_law(a: f64, p: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0 && p.is_finite() && p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "power-law dispersion needs a > 0 and p > 0, got a = {a}, p = {p}"
            )));
        }
        Ok(Self::PowerLaw { a, p })
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "polynomial dispersion needs finite coefficients".into(),
            ));
        }
        Ok(Self::Polynomial { coeffs })
    }

    pub fn omega(&self, k: f64) -> f64 {
        match self {
            Self::Linear { c } => c * k,
            Self::PowerLaw { a, p } => a * k.powf(*p),
            Self::Polynomial { coeffs } => coeffs
                .iter()
                .rev()
                .fold(0.0, |acc, &a| (acc + a) * k),
        }
    }

    pub fn domega_dk(&self, k: f64) -> f64 {
        match self {
            Self::Linear { c } => *c,
            Self::PowerLaw { a, p } => a * p * k.powf(p - 1.0),
            Self::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (n, &a)| acc * k + (n as f64 + 1.0) * a),
        }
    }

    /// Inverse map `|k|(ω)`, verifying monotonicity on `[0, |k|(ω)]`.
    pub fn k_of_omega(&self, omega: f64) -> Result<f64> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega must be finite and non-negative, got {omega}"
            )));
        }
        match self {
            Self::Linear { c } => Ok(omega / c),
            Self::PowerLaw { a, p } => Ok((omega / a).powf(1.0 / p)),
            Self::Polynomial { .. } => self.invert_polynomial(omega),
        }
    }

    fn invert_polynomial(&self, omega: f64) -> Result<f64> {
        if omega == 0.0 {
            return Ok(0.0);
        }
        // Bracket and bisect, then require a positive slope on [0, k].
        let mut hi = 1.0;
        let mut guard = 0;
        while self.omega(hi) < omega {
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::InvalidParameter(format!(
                    "dispersion never reaches omega = {omega}"
                )));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.omega(mid) < omega {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * hi {
                break;
            }
        }
        let root = 0.5 * (lo + hi);
        let samples = 256;
        for i in 1..=samples {
            let k = root * i as f64 / samples as f64;
            let slope = self.domega_dk(k);
            if slope <= 0.0 {
                return Err(Error::UnphysicalDispersion { k, slope });
            }
        }
        Ok(root)
    }

    /// `d|k|³/dω` at angular frequency `ω`.
    pub fn dk3_domega(&self, omega: f64) -> Result<f64> {
        let k = self.k_of_omega(omega)?;
        let slope = self.domega_dk(k);
        if !(slope > 0.0) {
            return Err(Error::UnphysicalDispersion { k, slope });
        }
        Ok(3.0 * k * k / slope)
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Linear { c } => format!("linear(c={c})"),
            Self::PowerLaw { a, p } => format!("power_law(a={a}, p={p})"),
            Self::Polynomial { coeffs } => format!("polynomial({coeffs:?})"),
        }
    }
}
