//! Physical constants with the vacuum permeability derived from
//! `mu0 = 1 / (eps0 c^2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, vacuum permittivity and speed of light.
///
/// The vacuum permeability is never stored independently; it is always
/// recomputed from `eps0` and `c` so the two cannot drift apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    hbar: f64,
    eps0: f64,
    c: f64,
}

impl PhysicalConstants {
    /// `hbar = eps0 = c = 1`, hence `mu0 = 1`.
    pub const NATURAL: PhysicalConstants = PhysicalConstants {
        hbar: 1.0,
        eps0: 1.0,
        c: 1.0,
    };

    /// CODATA 2018 values in SI units.
    pub const SI: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-34,
        eps0: 8.854_187_812_8e-12,
        c: 299_792_458.0,
    };

    pub fn new(hbar: f64, eps0: f64, c: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("eps0", eps0), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        Ok(Self { hbar, eps0, c })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn mu0(&self) -> f64 {
        1.0 / (self.eps0 * self.c * self.c)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::NATURAL
    }
}
