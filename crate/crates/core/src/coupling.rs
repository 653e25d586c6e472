//! Two-way maps between susceptibilities and squared coupling magnitudes
//! `|f(ω)|²` (electric) and `|g(ω)|²` (magnetic).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::dispersion::DispersionRelation;
use crate::error::{Error, Result};
use crate::io;
use crate::medium::{ModelKind, Role, SusceptibilityModel};
use crate::numerics::accel::richardson;
use crate::numerics::oscillatory::{fourier_integral, OscillatoryOptions, Weight};
use crate::tabulated::sine_synthesis;

/// Abel damping rates for the step response, extrapolated to zero.
pub const ABEL_EPSILONS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Values below `-PASSIVITY_TOLERANCE · scale` are rejected; smaller
/// negative values are clamped to zero.
pub const PASSIVITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineTransform {
    /// `∫₀^∞ χ(t) sin ωt dt`.
    pub value: f64,
    pub error: f64,
    pub method: SineMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SineMethod {
    Exact,
    Panels,
    AbelRichardson,
    Tabulated,
}

/// `∫₀^∞ χ(t) sin ωt dt`, computed from `χ(t)` by half-period panels.
///
/// The step response is damped by `e^{-εt}` and extrapolated in `ε`. The
/// lossless oscillator has a line spectrum and reports it as an error.
pub fn sine_transform(model: &SusceptibilityModel, omega: f64) -> Result<SineTransform> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sine transform needs omega > 0, got {omega}"
        )));
    }
    let opts = OscillatoryOptions::default();
    let chi = |t: f64| model.chi_time(t).unwrap_or(0.0);
    let done = |value: f64, error: f64, method| SineTransform {
        value,
        error,
        method,
    };
    match &model.kind {
        ModelKind::Vacuum => Ok(done(0.0, 0.0, SineMethod::Exact)),
        ModelKind::Box { delta, .. } => {
            let r = fourier_integral(chi, omega, Weight::Sin, &[*delta], Some(*delta), opts);
            Ok(done(r.value, r.error, SineMethod::Panels))
        }
        ModelKind::Step { beta } => {
            let mut values = Vec::with_capacity(ABEL_EPSILONS.len());
            let mut error: f64 = 0.0;
            for eps in ABEL_EPSILONS {
                let r = fourier_integral(
                    |t: f64| beta * (-eps * t).exp(),
                    omega,
                    Weight::Sin,
                    &[],
                    None,
                    opts,
                );
                error = error.max(r.error);
                values.push(Complex64::new(r.value, 0.0));
            }
            // The damped transform is β ω/(ε² + ω²): even in ε.
            let v = richardson(&values, 10.0, 2.0).re;
            let spread = (v - values[values.len() - 1].re).abs();
            Ok(done(v, error + spread * 1e-4, SineMethod::AbelRichardson))
        }
        ModelKind::Lorentz {
            omega0,
            gamma,
            omegap,
        } => {
            if *gamma == 0.0 {
                return Err(Error::SpectralLine {
                    omega: *omega0,
                    weight: PI * omegap * omegap / (2.0 * omega0),
                });
            }
            let r = fourier_integral(chi, omega, Weight::Sin, &[], None, opts);
            Ok(done(r.value, r.error, SineMethod::Panels))
        }
        ModelKind::Tabulated(tab) => Ok(done(tab.freq(omega)?.value.im, 0.0, SineMethod::Tabulated)),
    }
}

/// `ħc³ε₀/(4π²ω²)` (electric) or `ħc³/(4π²μ₀ω²)` (magnetic).
fn prefactor(role: Role, omega: f64, k: &PhysicalConstants) -> f64 {
    let base = k.hbar() * k.c().powi(3) / (4.0 * PI * PI * omega * omega);
    match role {
        Role::Electric => base * k.eps0(),
        Role::Magnetic => base / k.mu0(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingValue {
    pub value: f64,
    pub error: f64,
    /// A slightly negative quadrature result was clamped to zero.
    pub clamped: bool,
}

/// `|f(ω)|²` or `|g(ω)|²` from the time-domain response of `model`.
pub fn coupling_from_chi(
    model: &SusceptibilityModel,
    omega: f64,
    constants: &PhysicalConstants,
) -> Result<CouplingValue> {
    if omega == 0.0 {
        return Ok(CouplingValue {
            value: 0.0,
            error: 0.0,
            clamped: false,
        });
    }
    let pre = prefactor(model.role, omega, constants);
    let st = match sine_transform(model, omega) {
        Err(Error::SpectralLine { omega: w0, weight }) => {
            return Err(Error::SpectralLine {
                omega: w0,
                weight: weight * prefactor(model.role, w0, constants),
            })
        }
        other => other?,
    };
    let value = pre * st.value;
    let error = pre * st.error;
    let slack = PASSIVITY_TOLERANCE.max(error);
    if value < -slack * pre.max(1.0) {
        return Err(Error::Passivity { omega, value });
    }
    Ok(CouplingValue {
        value: value.max(0.0),
        error,
        clamped: value < 0.0,
    })
}

/// `|f|² = Im χ · (3ħε₀/4π²) / (d|k|³/dω)`; the magnetic analogue uses `ħ/μ₀`.
pub fn coupling_from_im_chi(
    im_chi: f64,
    omega: f64,
    role: Role,
    dispersion: &DispersionRelation,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if im_chi < 0.0 {
        return Err(Error::Passivity {
            omega,
            value: im_chi,
        });
    }
    if omega == 0.0 || im_chi == 0.0 {
        dispersion.k_of_omega(omega)?;
        return Ok(0.0);
    }
    let dk3 = dispersion.dk3_domega(omega)?;
    Ok(im_chi * 3.0 * medium_scale(role, constants) / (4.0 * PI * PI) / dk3)
}

/// Inverse of [`coupling_from_im_chi`].
pub fn im_chi_from_coupling(
    value: f64,
    omega: f64,
    role: Role,
    dispersion: &DispersionRelation,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if omega == 0.0 || value == 0.0 {
        return Ok(0.0);
    }
    let dk3 = dispersion.dk3_domega(omega)?;
    Ok(value * 4.0 * PI * PI * dk3 / (3.0 * medium_scale(role, constants)))
}

/// `ħε₀` for the electric bath, `ħ/μ₀` for the magnetic one.
fn medium_scale(role: Role, k: &PhysicalConstants) -> f64 {
    match role {
        Role::Electric => k.hbar() * k.eps0(),
        Role::Magnetic => k.hbar() / k.mu0(),
    }
}

/// `Im χ(ω)` on the positive axis with the step response at its Abel limit.
pub(crate) fn im_chi(model: &SusceptibilityModel, omega: f64) -> Result<f64> {
    match &model.kind {
        ModelKind::Lorentz { gamma, omega0, .. } if *gamma == 0.0 && omega != *omega0 => Ok(0.0),
        _ => Ok(model.chi_freq(omega)?.im),
    }
}

/// Largest disagreement between the `Im χ` values reconstructed through
/// two dispersion relations on `omegas`.
pub fn dispersion_invariance_check(
    model: &SusceptibilityModel,
    first: &DispersionRelation,
    second: &DispersionRelation,
    omegas: &[f64],
    constants: &PhysicalConstants,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &w in omegas {
        let im = im_chi(model, w)?;
        let back = |d: &DispersionRelation| -> Result<f64> {
            let f2 = coupling_from_im_chi(im, w, model.role, d, constants)?;
            im_chi_from_coupling(f2, w, model.role, d, constants)
        };
        worst = worst.max((back(first)? - back(second)?).abs());
    }
    Ok(worst)
}

/// Sampled `|f(ω)|²` or `|g(ω)|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingTable {
    pub role: Role,
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub dispersion: DispersionRelation,
    pub constants: PhysicalConstants,
    /// Frequencies where a slightly negative value was clamped to zero.
    #[serde(default)]
    pub clamped: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiEstimate {
    pub value: f64,
    /// Boundary term dropped by truncating at the last frequency.
    pub tail: f64,
    pub warning: bool,
}

/// Default tolerance on the truncation tail of [`CouplingTable::chi_time`].
pub const SYNTHESIS_TAIL_TOLERANCE: f64 = 1e-4;

impl CouplingTable {
    pub fn new(
        role: Role,
        omega: Vec<f64>,
        values: Vec<f64>,
        dispersion: DispersionRelation,
        constants: PhysicalConstants,
    ) -> Result<Self> {
        let t = CouplingTable {
            role,
            omega,
            values,
            dispersion,
            constants,
            clamped: Vec::new(),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega.len() != self.values.len() || self.omega.is_empty() {
            return Err(Error::InvalidParameter(
                "coupling table needs equally many frequencies and values".into(),
            ));
        }
        if self.omega[0] < 0.0 || self.omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "coupling table frequencies must be non-negative and strictly increasing".into(),
            ));
        }
        for (&w, &v) in self.omega.iter().zip(&self.values) {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Passivity { omega: w, value: v });
            }
            if w == 0.0 && v != 0.0 {
                return Err(Error::InvalidParameter(
                    "squared coupling must vanish at omega = 0".into(),
                ));
            }
        }
        Ok(())
    }

    /// Samples `coupling_from_chi` on `omegas`; the implied dispersion is `ω = c|k|`.
    pub fn from_model(
        model: &SusceptibilityModel,
        omegas: &[f64],
        constants: &PhysicalConstants,
    ) -> Result<Self> {
        let results: Vec<Result<CouplingValue>> = omegas
            .par_iter()
            .map(|&w| coupling_from_chi(model, w, constants))
            .collect();
        let mut values = Vec::with_capacity(omegas.len());
        let mut clamped = Vec::new();
        for (&w, r) in omegas.iter().zip(results) {
            let v = r?;
            if v.clamped {
                clamped.push(w);
            }
            values.push(v.value);
        }
        let mut t = Self::new(
            model.role,
            omegas.to_vec(),
            values,
            DispersionRelation::linear(constants.c())?,
            *constants,
        )?;
        t.clamped = clamped;
        Ok(t)
    }

    /// Reads `omega,f2` (electric) or `omega,g2` (magnetic) CSV.
    pub fn from_csv<R: std::io::Read>(
        reader: R,
        dispersion: DispersionRelation,
        constants: PhysicalConstants,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.to_string()).collect();
        let role = match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["omega", "f2"] => Role::Electric,
            ["omega", "g2"] => Role::Magnetic,
            _ => {
                return Err(Error::Parse(format!(
                    "expected header `omega,f2` or `omega,g2`, found `{}`",
                    headers.join(",")
                )))
            }
        };
        let (mut omega, mut values) = (Vec::new(), Vec::new());
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let num = |i: usize| -> Result<f64> {
                let field = record.get(i).ok_or_else(|| Error::Parse(format!("row {} is short", line + 2)))?;
                field
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: `{field}` is not a number", line + 2)))
            };
            if record.len() != 2 {
                return Err(Error::Parse(format!("row {} has {} fields, expected 2", line + 2, record.len())));
            }
            omega.push(num(0)?);
            values.push(num(1)?);
        }
        Self::new(role, omega, values, dispersion, constants)
    }

    /// Samples `coupling_from_im_chi` on `omegas` for the given dispersion.
    pub fn from_im_chi(
        model: &SusceptibilityModel,
        omegas: &[f64],
        dispersion: &DispersionRelation,
        constants: &PhysicalConstants,
    ) -> Result<Self> {
        let values = omegas
            .iter()
            .map(|&w| {
                if w == 0.0 {
                    return Ok(0.0);
                }
                coupling_from_im_chi(im_chi(model, w)?, w, model.role, dispersion, constants)
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::new(model.role, omegas.to_vec(), values, dispersion.clone(), *constants)
    }

    /// `Im χ` implied by each sample.
    pub fn im_chi(&self) -> Result<Vec<f64>> {
        self.omega
            .iter()
            .zip(&self.values)
            .map(|(&w, &v)| im_chi_from_coupling(v, w, self.role, &self.dispersion, &self.constants))
            .collect()
    }

    /// `χ(t)` rebuilt from the table; exactly zero for `t <= 0`.
    pub fn chi_time(&self, t: f64) -> Result<ChiEstimate> {
        self.chi_time_with(t, SYNTHESIS_TAIL_TOLERANCE)
    }

    pub fn chi_time_with(&self, t: f64, tail_tolerance: f64) -> Result<ChiEstimate> {
        let im = self.im_chi()?;
        Ok(self.synthesize(&im, t, tail_tolerance))
    }

    /// `χ(t)` on many times, reusing the `Im χ` conversion.
    pub fn chi_time_series(&self, times: &[f64]) -> Result<Vec<ChiEstimate>> {
        let im = self.im_chi()?;
        Ok(times
            .par_iter()
            .map(|&t| self.synthesize(&im, t, SYNTHESIS_TAIL_TOLERANCE))
            .collect())
    }

    fn synthesize(&self, im: &[f64], t: f64, tail_tolerance: f64) -> ChiEstimate {
        let s = sine_synthesis(&self.omega, im, t);
        ChiEstimate {
            value: s.value,
            tail: s.tail,
            warning: s.tail > tail_tolerance,
        }
    }

    pub fn value_header(&self) -> &'static str {
        match self.role {
            Role::Electric => "f2",
            Role::Magnetic => "g2",
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        io::csv_string(
            &["omega", self.value_header()],
            self.omega.iter().zip(&self.values).map(|(&w, &v)| vec![w, v]),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Export<'a> {
            role: Role,
            dispersion: String,
            table: &'a CouplingTable,
        }
        io::json_string(&Export {
            role: self.role,
            dispersion: self.dispersion.describe(),
            table: self,
        })
    }
}

/// `n` log-spaced frequencies on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "log grid needs 0 < lo < hi, n >= 2");
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const K: PhysicalConstants = PhysicalConstants::NATURAL;

    #[test]
    fn step_coupling_matches_closed_form() {
        let m = SusceptibilityModel::step(4.0 * PI * PI, Role::Electric).unwrap();
        let v = coupling_from_chi(&m, 1.0, &K).unwrap();
        assert!((v.value - 1.0).abs() < 1e-6, "{v:?}");
    }

    #[test]
    fn csv_round_trip() {
        let m = SusceptibilityModel::lorentz(1.0, 0.2, 0.5, Role::Magnetic).unwrap();
        let lin = DispersionRelation::linear(1.0).unwrap();
        let t = CouplingTable::from_im_chi(&m, &[0.5, 1.0, 2.0], &lin, &K).unwrap();
        let back = CouplingTable::from_csv(t.to_csv().unwrap().as_bytes(), lin, K).unwrap();
        assert_eq!(back, t);
        assert!(CouplingTable::from_csv("omega,h2\n1,2\n".as_bytes(), DispersionRelation::linear(1.0).unwrap(), K).is_err());
    }

    #[test]
    fn vacuum_and_zero_frequency() {
        let vac = SusceptibilityModel::vacuum(Role::Electric);
        assert_eq!(coupling_from_chi(&vac, 2.0, &K).unwrap().value, 0.0);
        let m = SusceptibilityModel::lorentz(1.0, 0.2, 0.5, Role::Electric).unwrap();
        assert_eq!(coupling_from_chi(&m, 0.0, &K).unwrap().value, 0.0);
    }

    #[test]
    fn lossless_lorentz_is_a_line() {
        let m = SusceptibilityModel::lorentz(2.0, 0.0, 0.5, Role::Electric).unwrap();
        match coupling_from_chi(&m, 1.0, &K) {
            Err(Error::SpectralLine { omega, weight }) => {
                assert_eq!(omega, 2.0);
                let expected = 0.25 / (8.0 * PI * 8.0);
                assert!((weight - expected).abs() < 1e-16);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn im_chi_route_examples() {
        let lin = DispersionRelation::linear(1.0).unwrap();
        let v = coupling_from_im_chi(1.25, 1.0, Role::Electric, &lin, &K).unwrap();
        assert!((v - 1.25 / (4.0 * PI * PI)).abs() < 1e-15);
        assert_eq!(coupling_from_im_chi(0.0, 1.0, Role::Electric, &lin, &K).unwrap(), 0.0);
        let pl = DispersionRelation::power_law(1.0, 2.0).unwrap();
        let v = coupling_from_im_chi(1.0, 4.0, Role::Electric, &pl, &K).unwrap();
        assert!((v - 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
        let bad = DispersionRelation::polynomial(vec![1.0, -2.0, 1.2]).unwrap();
        assert!(matches!(
            coupling_from_im_chi(1.0, 2.0, Role::Electric, &bad, &K),
            Err(Error::UnphysicalDispersion { .. })
        ));
    }

    #[test]
    fn invariance_examples() {
        let grid: Vec<f64> = (0..100).map(|i| 0.1 + 4.9 * i as f64 / 99.0).collect();
        let lin = DispersionRelation::linear(1.0).unwrap();
        let pl = DispersionRelation::power_law(1.0, 2.0).unwrap();
        let m = SusceptibilityModel::lorentz(1.0, 0.2, 0.5, Role::Electric).unwrap();
        assert!(dispersion_invariance_check(&m, &lin, &pl, &grid, &K).unwrap() < 1e-12);
        let vac = SusceptibilityModel::vacuum(Role::Electric);
        assert_eq!(dispersion_invariance_check(&vac, &lin, &pl, &grid, &K).unwrap(), 0.0);
        let b = SusceptibilityModel::boxcar(1.0, 1.0, Role::Electric).unwrap();
        let lin2 = DispersionRelation::linear(2.0).unwrap();
        assert!(dispersion_invariance_check(&b, &lin, &lin2, &grid, &K).unwrap() < 1e-12);
    }

    #[test]
    fn table_csv_layout() {
        let m = SusceptibilityModel::step(1.0, Role::Magnetic).unwrap();
        let t = CouplingTable::from_model(&m, &[0.0, 1.0], &K).unwrap();
        let csv = t.to_csv().unwrap();
        assert!(csv.starts_with("omega,g2\n0.0,0.0\n"), "{csv}");
        assert!(t.to_json().unwrap().contains("\"dispersion\": \"linear(c=1)\""));
    }

    #[test]
    fn box_round_trip_at_centre() {
        let m = SusceptibilityModel::boxcar(3.0, 0.5, Role::Electric).unwrap();
        let omegas: Vec<f64> = (1..=2_000_000).map(|i| i as f64 * 0.05).collect();
        let t = CouplingTable::from_im_chi(&m, &omegas, &DispersionRelation::linear(1.0).unwrap(), &K).unwrap();
        let v = t.chi_time(0.25).unwrap();
        assert!((v.value - 6.0).abs() < 1e-4 * 6.0, "{v:?}");
    }
}
