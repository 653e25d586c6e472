//! Noise strengths tied to dissipation: the scalar coefficient of the
//! noise-polarization commutator and per-frequency weight bundles.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::coupling::{coupling_from_im_chi, im_chi, CouplingTable};
use crate::dispersion::DispersionRelation;
use crate::error::{Error, Result};
use crate::io::csv_string;
use crate::kernels::Medium;
use crate::medium::{Role, SusceptibilityModel};

/// Largest tolerated relative disagreement between a table and its model.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-6;

/// `(ħε₀/π)·Im χₑ(ω)`, or `(ħ/μ₀π)·Im χₘ(ω)` for a magnetic model.
pub fn noise_commutator_coefficient(model: &SusceptibilityModel, omega: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
    }
    let im = im_chi(model, omega)?;
    if im < 0.0 {
        return Err(Error::Passivity { omega, value: im });
    }
    Ok(scale(model.role, constants) / PI * im)
}

fn scale(role: Role, k: &PhysicalConstants) -> f64 {
    match role {
        Role::Electric => k.hbar() * k.eps0(),
        Role::Magnetic => k.hbar() / k.mu0(),
    }
}

/// Weight implied by a squared coupling: `(4π/3)·(d|k|³/dω)·|f|²`.
pub fn weight_from_coupling(value: f64, omega: f64, dispersion: &DispersionRelation) -> Result<f64> {
    if value == 0.0 {
        return Ok(0.0);
    }
    Ok(4.0 * PI / 3.0 * dispersion.dk3_domega(omega)? * value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseWeight {
    pub omega: f64,
    pub w_e: f64,
    pub w_m: f64,
    pub f2: f64,
    pub g2: f64,
}

/// Coupling tables supplied for a bundle. A missing table is derived from
/// the model's `Im χ` with the linear dispersion `ω = c|k|`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CouplingTables {
    pub electric: Option<CouplingTable>,
    pub magnetic: Option<CouplingTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseBundle {
    pub weights: Vec<NoiseWeight>,
    /// Largest relative table/model disagreement over the grid.
    pub max_mismatch: f64,
}

impl NoiseBundle {
    pub fn to_csv(&self) -> Result<String> {
        csv_string(
            &["omega", "w_e", "w_m", "f2", "g2"],
            self.weights.iter().map(|w| vec![w.omega, w.w_e, w.w_m, w.f2, w.g2]),
        )
    }
}

/// Linear interpolation inside the table; exact at its nodes.
fn table_value(table: &CouplingTable, omega: f64) -> Result<f64> {
    let w = &table.omega;
    let (lo, hi) = (w[0], w[w.len() - 1]);
    if omega < lo || omega > hi {
        return Err(Error::OutOfRange { value: omega, min: lo, max: hi });
    }
    let j = w.partition_point(|&x| x < omega);
    if w[j] == omega {
        return Ok(table.values[j]);
    }
    let (w0, w1) = (w[j - 1], w[j]);
    let u = (omega - w0) / (w1 - w0);
    Ok(table.values[j - 1] * (1.0 - u) + table.values[j] * u)
}

fn mismatch(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

/// One role's `(weight, squared coupling, mismatch)` at `omega`.
fn role_weight(
    model: &SusceptibilityModel,
    table: Option<&CouplingTable>,
    omega: f64,
    constants: &PhysicalConstants,
) -> Result<(f64, f64, f64)> {
    let w = noise_commutator_coefficient(model, omega, constants)?;
    match table {
        Some(t) => {
            let v = table_value(t, omega)?;
            let implied = weight_from_coupling(v, omega, &t.dispersion)?;
            let mm = mismatch(w, implied);
            if mm > CONSISTENCY_TOLERANCE {
                return Err(Error::Consistency { omega, mismatch: mm });
            }
            Ok((w, v, mm))
        }
        None => {
            let linear = DispersionRelation::linear(constants.c())?;
            let v = coupling_from_im_chi(im_chi(model, omega)?, omega, model.role, &linear, constants)?;
            Ok((w, v, 0.0))
        }
    }
}

/// Noise weights and squared couplings for both baths on `omegas`.
pub fn noise_weight_bundle(
    medium: &Medium,
    tables: &CouplingTables,
    omegas: &[f64],
    constants: &PhysicalConstants,
) -> Result<NoiseBundle> {
    medium.validate()?;
    if omegas.is_empty() || omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "frequency grid must be non-empty and strictly increasing".into(),
        ));
    }
    for (table, role) in [(&tables.electric, Role::Electric), (&tables.magnetic, Role::Magnetic)] {
        if let Some(t) = table {
            t.validate()?;
            if t.role != role {
                return Err(Error::InvalidParameter(format!(
                    "{} table supplied for the {} bath",
                    t.role.as_str(),
                    role.as_str()
                )));
            }
        }
    }
    let rows = omegas
        .par_iter()
        .map(|&omega| {
            let (w_e, f2, me) = role_weight(&medium.electric, tables.electric.as_ref(), omega, constants)?;
            let (w_m, g2, mm) = role_weight(&medium.magnetic, tables.magnetic.as_ref(), omega, constants)?;
            Ok((NoiseWeight { omega, w_e, w_m, f2, g2 }, me.max(mm)))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_mismatch = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(NoiseBundle {
        weights: rows.into_iter().map(|r| r.0).collect(),
        max_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const K: PhysicalConstants = PhysicalConstants::NATURAL;

    fn lorentz(gamma: f64) -> SusceptibilityModel {
        SusceptibilityModel::lorentz(1.0, gamma, 0.5, Role::Electric).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(noise_commutator_coefficient(&SusceptibilityModel::vacuum(Role::Electric), 1.0, &K).unwrap(), 0.0);
        let w = noise_commutator_coefficient(&lorentz(0.2), 1.0, &K).unwrap();
        assert!((w - 1.25 / PI).abs() < 1e-15);
        assert!((w - 0.39788735772973836).abs() < 1e-15);
        let step = SusceptibilityModel::step(2.0, Role::Electric).unwrap();
        assert!((noise_commutator_coefficient(&step, 4.0, &K).unwrap() - 0.5 / PI).abs() < 1e-16);
        assert!(noise_commutator_coefficient(&step, 0.0, &K).is_err());
    }

    #[test]
    fn magnetic_coefficient_uses_hbar_over_mu0() {
        let k = PhysicalConstants::new(2.0, 3.0, 0.5).unwrap();
        let m = SusceptibilityModel::lorentz(1.0, 0.2, 0.5, Role::Magnetic).unwrap();
        let w = noise_commutator_coefficient(&m, 1.0, &k).unwrap();
        assert!((w - 2.0 / k.mu0() * 1.25 / PI).abs() < 1e-14);
    }

    #[test]
    fn weight_is_linear_in_damping() {
        let w: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&g| noise_commutator_coefficient(&lorentz(g), 2.0, &K).unwrap())
            .collect();
        for pair in w.windows(2) {
            assert!((pair[0] / pair[1] / 10.0 - 1.0).abs() < 0.05);
        }
        assert_eq!(noise_commutator_coefficient(&lorentz(0.0), 2.0, &K).unwrap(), 0.0);
    }

    #[test]
    fn derived_table_is_consistent_under_any_dispersion() {
        let model = lorentz(0.2);
        let medium = Medium::electric(model.clone()).unwrap();
        let grid: Vec<f64> = (1..=50).map(|i| 0.1 * i as f64).collect();
        for d in [DispersionRelation::linear(1.0).unwrap(), DispersionRelation::power_law(1.3, 1.7).unwrap()] {
            let table = CouplingTable::from_im_chi(&model, &grid, &d, &K).unwrap();
            let tables = CouplingTables { electric: Some(table), magnetic: None };
            let b = noise_weight_bundle(&medium, &tables, &grid, &K).unwrap();
            assert!(b.max_mismatch < 1e-12, "{}", b.max_mismatch);
            for w in &b.weights {
                assert!(w.w_e >= 0.0 && w.w_m == 0.0 && w.g2 == 0.0);
            }
        }
    }

    #[test]
    fn mismatched_table_is_rejected() {
        let grid = [0.5, 1.0, 2.0];
        let table = CouplingTable::from_im_chi(&lorentz(0.1), &grid, &DispersionRelation::linear(1.0).unwrap(), &K).unwrap();
        let medium = Medium::electric(lorentz(0.2)).unwrap();
        let tables = CouplingTables { electric: Some(table), magnetic: None };
        assert!(matches!(noise_weight_bundle(&medium, &tables, &grid, &K), Err(Error::Consistency { .. })));
    }

    #[test]
    fn vacuum_bundle_is_zero() {
        let grid = [0.5, 1.0, 2.0];
        let zero = CouplingTable::new(Role::Electric, grid.to_vec(), vec![0.0; 3], DispersionRelation::linear(1.0).unwrap(), K).unwrap();
        let tables = CouplingTables { electric: Some(zero), magnetic: None };
        let b = noise_weight_bundle(&Medium::vacuum(), &tables, &grid, &K).unwrap();
        assert!(b.weights.iter().all(|w| w.w_e == 0.0 && w.w_m == 0.0 && w.f2 == 0.0 && w.g2 == 0.0));
        assert_eq!(b.to_csv().unwrap().lines().next(), Some("omega,w_e,w_m,f2,g2"));
    }

    #[test]
    fn negative_loss_sample_is_a_passivity_error() {
        use crate::tabulated::{OutOfRange, Tabulated, TabulatedData};
        let data = TabulatedData::Frequency {
            omega: vec![0.5, 1.0, 1.5, 2.0],
            re_chi: vec![0.1; 4],
            im_chi: vec![0.2, -0.01, 0.2, 0.1],
        };
        let tab = Tabulated::new(data, OutOfRange::default()).unwrap();
        let model = SusceptibilityModel::tabulated(tab, Role::Electric).unwrap();
        assert!(matches!(noise_commutator_coefficient(&model, 1.0, &K), Err(Error::Passivity { omega, .. }) if omega == 1.0));
        let medium = Medium::electric(model).unwrap();
        let r = noise_weight_bundle(&medium, &CouplingTables::default(), &[0.5, 1.0], &K);
        assert!(matches!(r, Err(Error::Passivity { .. })));
    }
}
