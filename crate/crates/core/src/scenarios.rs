//! The four worked media (vacuum, box, step, Lorentz) as end-to-end runs
//! comparing numerically inverted kernels with their closed forms.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::coupling::{log_grid, CouplingTable};
use crate::dispersion::DispersionRelation;
use crate::error::{Error, Result};
use crate::io::json_string;
use crate::kernels::{
    asymptotic_decay_check, energy_invariant, kernel, resolve_prefactor, uniform_grid, validate_grid, DecayCheck,
    KernelKind, KernelRequest, KernelSeries, Medium, Method, Route, Sign, RESONANCE_DISTANCE,
};
use crate::medium::{Role, SusceptibilityModel};
use crate::noise::{noise_weight_bundle, CouplingTables, NoiseBundle};

/// Points in every default time grid.
pub const DEFAULT_POINTS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    Vacuum,
    Box,
    Step,
    Lorentz,
}

impl ScenarioName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::Vacuum => "vacuum",
            ScenarioName::Box => "box",
            ScenarioName::Step => "step",
            ScenarioName::Lorentz => "lorentz",
        }
    }
}

/// Parameter overrides; anything left out takes the scenario default.
///
/// `chi_m0` is the static magnetic susceptibility; the magnetic response
/// kernel of the box medium then has strength `χₘ⁰/(1 + χₘ⁰)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub omega_q: Option<f64>,
    pub omega_k: Option<f64>,
    pub beta: Option<f64>,
    pub chi_e0: Option<f64>,
    pub chi_m0: Option<f64>,
    pub delta: Option<f64>,
    pub omega0: Option<f64>,
    pub gamma: Option<f64>,
    pub omegap: Option<f64>,
}

/// Fully specified parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub omega_q: f64,
    pub omega_k: f64,
    pub beta: f64,
    pub chi_e0: f64,
    pub chi_m0: f64,
    pub delta: f64,
    pub omega0: f64,
    pub gamma: f64,
    pub omegap: f64,
}

impl ScenarioParams {
    pub fn resolve(&self, name: ScenarioName) -> ResolvedParams {
        let (omega_q, omega_k) = match name {
            ScenarioName::Step => (2.0, 1.0),
            ScenarioName::Lorentz => (1.0, 0.3),
            _ => (1.0, 0.5),
        };
        ResolvedParams {
            omega_q: self.omega_q.unwrap_or(omega_q),
            omega_k: self.omega_k.unwrap_or(omega_k),
            beta: self.beta.unwrap_or(1.0),
            chi_e0: self.chi_e0.unwrap_or(3.0),
            chi_m0: self.chi_m0.unwrap_or(1.0),
            delta: self.delta.unwrap_or(1e-3),
            omega0: self.omega0.unwrap_or(1.0),
            gamma: self.gamma.unwrap_or(0.0),
            omegap: self.omegap.unwrap_or(0.5),
        }
    }
}

impl ResolvedParams {
    pub fn medium(&self, name: ScenarioName) -> Result<Medium> {
        match name {
            ScenarioName::Vacuum => Ok(Medium::vacuum()),
            ScenarioName::Box => {
                if !(self.chi_m0 > -1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "chi_m0 must exceed -1, got {}",
                        self.chi_m0
                    )));
                }
                let e = SusceptibilityModel::boxcar(self.chi_e0, self.delta, Role::Electric)?;
                let m = if self.chi_m0 == 0.0 {
                    SusceptibilityModel::vacuum(Role::Magnetic)
                } else {
                    SusceptibilityModel::boxcar(self.chi_m0 / (1.0 + self.chi_m0), self.delta, Role::Magnetic)?
                };
                Medium::new(e, m)
            }
            ScenarioName::Step => Medium::electric(SusceptibilityModel::step(self.beta, Role::Electric)?),
            ScenarioName::Lorentz => Medium::electric(SusceptibilityModel::lorentz(
                self.omega0,
                self.gamma,
                self.omegap,
                Role::Electric,
            )?),
        }
    }

    /// Decay rate of the medium's transient, zero where there is none.
    pub fn characteristic_rate(&self, name: ScenarioName) -> f64 {
        match name {
            ScenarioName::Step => self.beta / 2.0,
            ScenarioName::Lorentz => self.gamma / 2.0,
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega_q > 0.0 && self.omega_q.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega_q must be positive, got {}", self.omega_q)));
        }
        if !(self.omega_k >= 0.0 && self.omega_k.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega_k must be non-negative, got {}", self.omega_k)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    /// Kernel kinds to compute; the scenario's default set when absent.
    pub kernels: Option<Vec<KernelKind>>,
    pub signs: Option<Vec<Sign>>,
    pub couplings: bool,
    pub noise: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub t_max: Option<f64>,
    pub points: Option<usize>,
    pub omega: Option<FrequencyGrid>,
}

/// A comparison passes when every bound that is set holds. Relative
/// deviations are taken against the sup norm of the reference series.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub abs: Option<f64>,
    pub rel: Option<f64>,
}

impl Tolerances {
    pub fn defaults(name: ScenarioName) -> Self {
        match name {
            ScenarioName::Vacuum => Tolerances { abs: Some(1e-8), rel: None },
            ScenarioName::Box => Tolerances { abs: Some(1e-2), rel: None },
            ScenarioName::Step => Tolerances { abs: None, rel: Some(1e-6) },
            ScenarioName::Lorentz => Tolerances { abs: Some(1e-9), rel: None },
        }
    }

    fn accepts(&self, abs: f64, rel: f64) -> bool {
        self.abs.is_none_or(|a| abs <= a) && self.rel.is_none_or(|r| rel <= r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: ScenarioName,
    #[serde(default)]
    pub params: ScenarioParams,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub constants: PhysicalConstants,
}

impl ScenarioSpec {
    pub fn new(name: ScenarioName) -> Self {
        ScenarioSpec {
            name,
            params: ScenarioParams::default(),
            outputs: Outputs::default(),
            grids: Grids::default(),
            tolerances: None,
            constants: PhysicalConstants::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario spec: {e}")))
    }

    fn kernels(&self) -> Vec<KernelKind> {
        self.outputs.kernels.clone().unwrap_or_else(|| match self.name {
            ScenarioName::Vacuum | ScenarioName::Box => vec![KernelKind::Z],
            ScenarioName::Step => vec![KernelKind::Z, KernelKind::Zeta],
            ScenarioName::Lorentz => vec![KernelKind::Q, KernelKind::Z],
        })
    }

    fn signs(&self) -> Vec<Sign> {
        self.outputs.signs.clone().unwrap_or_else(|| vec![Sign::Plus, Sign::Minus])
    }

    /// `DEFAULT_POINTS` samples over `[0, 20/max(ω_q, rate)]` unless overridden.
    pub fn times(&self) -> Result<Vec<f64>> {
        let p = self.params.resolve(self.name);
        let t_max = self
            .grids
            .t_max
            .unwrap_or(20.0 / p.omega_q.max(p.characteristic_rate(self.name)));
        uniform_grid(t_max, self.grids.points.unwrap_or(DEFAULT_POINTS))
    }

    fn omegas(&self) -> Result<Vec<f64>> {
        let g = self.grids.omega.unwrap_or(FrequencyGrid { lo: 0.1, hi: 5.0, points: 50 });
        if !(g.lo > 0.0 && g.hi > g.lo && g.points >= 2 && g.hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "frequency grid needs 0 < lo < hi and at least 2 points, got {g:?}"
            )));
        }
        Ok(log_grid(g.lo, g.hi, g.points))
    }

    fn route(&self) -> Route {
        match self.name {
            ScenarioName::Step => Route::Contour,
            _ => Route::Auto,
        }
    }
}

/// Result of one requested output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "result", rename_all = "snake_case")]
pub enum Outcome<T> {
    Ok(T),
    /// Not applicable for these parameters; does not affect the verdict.
    Skipped(String),
    Failed(String),
}

impl<T> Outcome<T> {
    pub fn ok(&self) -> Option<&T> {
        match self {
            Outcome::Ok(t) => Some(t),
            _ => None,
        }
    }

    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(t) => Outcome::Ok(t),
            Err(e) => Outcome::Failed(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub origin: String,
    pub series: KernelSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelComparison {
    pub label: String,
    pub series: KernelSeries,
    pub reference: Option<Reference>,
    pub max_abs_deviation: Option<f64>,
    pub max_rel_deviation: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySummary {
    pub max_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingComparison {
    pub table: CouplingTable,
    pub reference: Option<Vec<f64>>,
    pub max_rel_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: ScenarioName,
    pub params: ResolvedParams,
    pub tolerances: Tolerances,
    pub kernels: Vec<Outcome<KernelComparison>>,
    /// Conservation of `H(t)` on the limiting box kernel.
    pub energy: Option<Outcome<EnergySummary>>,
    /// Envelope decay of `Z+` against `β/2`.
    pub decay: Option<Outcome<DecayCheck>>,
    pub couplings: Option<Outcome<CouplingComparison>>,
    pub noise: Option<Outcome<NoiseBundle>>,
    pub pass: bool,
}

/// Relative tolerance on the conserved box energy.
pub const ENERGY_TOLERANCE: f64 = 1e-10;

const SUPPORTED: &str = "vacuum: Z, zeta, eta, Q; box: Z (delta -> 0 limit); step: Z, zeta; lorentz: Q with gamma = 0";

fn label(kind: KernelKind, sign: Sign) -> String {
    format!("{}{}", kind.as_str(), if sign == Sign::Plus { "+" } else { "-" })
}

/// Where a closed form comes from, recorded with every reference series.
pub fn reference_origin(name: ScenarioName, kind: KernelKind) -> Option<&'static str> {
    Some(match (name, kind) {
        (ScenarioName::Vacuum, KernelKind::Z | KernelKind::Q) => "free oscillation exp(-i sigma omega t)",
        (ScenarioName::Vacuum, _) => "no bath coupling: identically zero",
        (ScenarioName::Box, KernelKind::Z) => "nondispersive limit of the box medium (delta -> 0)",
        (ScenarioName::Step, KernelKind::Z) => "step medium: damped oscillator with rate beta/2",
        (ScenarioName::Step, KernelKind::Zeta) => "step medium: persistent drive plus damped transient",
        (ScenarioName::Lorentz, KernelKind::Q) => "lossless oscillator: longitudinal kernel",
        _ => return None,
    })
}

fn closed_series(kind: KernelKind, sign: Sign, times: &[f64], values: Vec<Complex64>, derivative: Option<Vec<Complex64>>, prefactor: f64) -> KernelSeries {
    KernelSeries {
        kind,
        sign,
        times: times.to_vec(),
        values,
        derivative,
        method: Method::ClosedForm,
        accuracy: 0.0,
        poles: Vec::new(),
        prefactor,
        persistent: None,
        request: None,
    }
}

fn ci(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

/// Closed-form kernel on `times` where one exists.
pub fn reference_kernel(
    name: ScenarioName,
    params: &ResolvedParams,
    kind: KernelKind,
    sign: Sign,
    times: &[f64],
    constants: &PhysicalConstants,
) -> Result<KernelSeries> {
    validate_grid(times)?;
    params.validate()?;
    let p = *params;
    let s = sign.sigma();
    let unsupported = || {
        Err(Error::Unsupported(format!(
            "no closed form for {} {}; available: {SUPPORTED}",
            name.as_str(),
            kind.as_str()
        )))
    };
    let prefactor = |kind| {
        let req = KernelRequest::new(p.medium(name)?, p.omega_q, p.omega_k, sign, times.to_vec())
            .with_constants(*constants);
        resolve_prefactor(kind, &req)
    };
    let series = match (name, kind) {
        (ScenarioName::Vacuum, KernelKind::Z | KernelKind::Q) => {
            let w = if kind == KernelKind::Z { p.omega_q } else { p.omega_k };
            let v: Vec<Complex64> = times.iter().map(|&t| ci(-s * w * t).exp()).collect();
            let d = v.iter().map(|z| z * ci(-s * w)).collect();
            closed_series(kind, sign, times, v, Some(d), 1.0)
        }
        (ScenarioName::Vacuum, _) => {
            let zero = vec![Complex64::new(0.0, 0.0); times.len()];
            closed_series(kind, sign, times, zero.clone(), Some(zero), 0.0)
        }
        (ScenarioName::Box, KernelKind::Z) => {
            p.medium(name)?;
            let (a, b) = (1.0 + p.chi_e0, 1.0 + p.chi_m0);
            let w = p.omega_q / (a * b).sqrt();
            let r = (b / a).sqrt();
            let v = times
                .iter()
                .map(|&t| Complex64::new((w * t).cos(), -s * r * (w * t).sin()))
                .collect();
            let d = times
                .iter()
                .map(|&t| Complex64::new(-w * (w * t).sin(), -s * r * w * (w * t).cos()))
                .collect();
            closed_series(kind, sign, times, v, Some(d), 1.0)
        }
        (ScenarioName::Step, KernelKind::Z) => {
            p.medium(name)?;
            let (v, d) = step_z(p.beta, p.omega_q, s, times);
            closed_series(kind, sign, times, v, Some(d), 1.0)
        }
        (ScenarioName::Step, KernelKind::Zeta) => {
            p.medium(name)?;
            let f = prefactor(kind)?;
            let v = step_zeta(p.beta, p.omega_q, p.omega_k, s, f, times);
            closed_series(kind, sign, times, v, None, f)
        }
        (ScenarioName::Lorentz, KernelKind::Q) if p.gamma == 0.0 => {
            p.medium(name)?;
            let v = lossless_q(p.omega0, p.omegap, s * p.omega_k, times)?;
            closed_series(kind, sign, times, v, None, 1.0)
        }
        _ => return unsupported(),
    };
    Ok(series)
}

/// `sin(Ωt)/Ω` on the principal branch, `t` at `Ω = 0`.
fn sin_over(omega: Complex64, t: f64) -> Complex64 {
    if omega.norm() * t < 1e-8 {
        Complex64::new(t, 0.0)
    } else {
        (omega * t).sin() / omega
    }
}

/// `Z = e^{−βt/2}[cos Ωt + (β/2 − iσω_q) sin(Ωt)/Ω]` and its derivative.
fn step_z(beta: f64, omega_q: f64, s: f64, times: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let a = beta / 2.0;
    let big = Complex64::new(omega_q * omega_q - a * a, 0.0).sqrt();
    let c = Complex64::new(a, -s * omega_q);
    times
        .iter()
        .map(|&t| {
            let env = (-a * t).exp();
            let (cs, sn) = ((big * t).cos(), sin_over(big, t));
            (
                env * (cs + c * sn),
                env * ((c - a) * cs - (c * a + big * big) * sn),
            )
        })
        .unzip()
}

/// Persistent response at the bath pole plus the damped transient, written
/// as a divided difference over the two medium roots.
fn step_zeta(beta: f64, omega_q: f64, omega_k: f64, s: f64, f: f64, times: &[f64]) -> Vec<Complex64> {
    let a = beta / 2.0;
    let big = Complex64::new(omega_q * omega_q - a * a, 0.0).sqrt();
    let p0 = ci(-s * omega_k);
    let (rp, rm) = (-a + ci(1.0) * big, -a - ci(1.0) * big);
    let amp = f * p0 / (p0 * p0 + beta * p0 + omega_q * omega_q);
    let h = |r: Complex64, t: f64| f * r * (r * t).exp() / (r - p0);
    times
        .iter()
        .map(|&t| {
            let transient = if big.norm() < 1e-6 * omega_q {
                let r = Complex64::new(-a, 0.0);
                f * (r * t).exp() * ((1.0 + r * t) * (r - p0) - r) / ((r - p0) * (r - p0))
            } else {
                (h(rp, t) - h(rm, t)) / (rp - rm)
            };
            amp * (p0 * t).exp() + transient
        })
        .collect()
}

/// Longitudinal kernel of the lossless oscillator, `κ = σω_k`.
fn lossless_q(omega0: f64, omegap: f64, kappa: f64, times: &[f64]) -> Result<Vec<Complex64>> {
    let w = (omega0 * omega0 + omegap * omegap).sqrt();
    let distance = (w - kappa.abs()).abs();
    if distance < RESONANCE_DISTANCE {
        return Err(Error::Resonance {
            omega_k: kappa.abs(),
            resonance: w,
            distance,
        });
    }
    let bath = (omega0 * omega0 - kappa * kappa) / (w * w - kappa * kappa);
    let line = omegap * omegap / (2.0 * w);
    Ok(times
        .iter()
        .map(|&t| {
            bath * ci(-kappa * t).exp() + line * (ci(w * t).exp() / (w + kappa) + ci(-w * t).exp() / (w - kappa))
        })
        .collect())
}

fn compare(name: ScenarioName, p: &ResolvedParams, kind: KernelKind, sign: Sign, spec: &ScenarioSpec, tol: &Tolerances, times: &[f64]) -> Result<KernelComparison> {
    let req = KernelRequest::new(p.medium(name)?, p.omega_q, p.omega_k, sign, times.to_vec())
        .with_route(spec.route())
        .with_constants(spec.constants);
    let series = kernel(kind, &req)?;
    let reference = reference_origin(name, kind).and_then(|origin| {
        reference_kernel(name, p, kind, sign, times, &spec.constants)
            .ok()
            .map(|series| Reference {
                origin: origin.to_string(),
                series,
            })
    });
    let (abs, rel, pass) = match &reference {
        Some(r) => {
            let abs = series.max_abs_diff(&r.series)?;
            let norm = r.series.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let rel = if norm > 0.0 { abs / norm } else { abs };
            (Some(abs), Some(rel), Some(tol.accepts(abs, rel)))
        }
        None => (None, None, None),
    };
    Ok(KernelComparison {
        label: label(kind, sign),
        series,
        reference,
        max_abs_deviation: abs,
        max_rel_deviation: rel,
        pass,
    })
}

fn decay(name: ScenarioName, p: &ResolvedParams, spec: &ScenarioSpec) -> Option<Outcome<DecayCheck>> {
    if name != ScenarioName::Step {
        return None;
    }
    let rate = p.beta / 2.0;
    if p.omega_q <= rate {
        return Some(Outcome::Skipped(format!(
            "overdamped (omega_q = {} <= beta/2 = {rate}): the envelope has no oscillation peaks and decays at \
             beta/2 - sqrt(beta^2/4 - omega_q^2)",
            p.omega_q
        )));
    }
    let run = || -> Result<DecayCheck> {
        let times = uniform_grid(20.0 / rate, DEFAULT_POINTS)?;
        let req = KernelRequest::new(p.medium(name)?, p.omega_q, p.omega_k, Sign::Plus, times)
            .with_route(spec.route())
            .with_constants(spec.constants);
        asymptotic_decay_check(&kernel(KernelKind::Z, &req)?, rate)
    };
    Some(match run() {
        Err(Error::Inconclusive(m)) => Outcome::Skipped(m),
        other => Outcome::from_result(other),
    })
}

fn energy(name: ScenarioName, p: &ResolvedParams, times: &[f64], constants: &PhysicalConstants) -> Option<Outcome<EnergySummary>> {
    if name != ScenarioName::Box {
        return None;
    }
    let run = || -> Result<EnergySummary> {
        let z = reference_kernel(name, p, KernelKind::Z, Sign::Plus, times, constants)?;
        let e = energy_invariant(&z, p.chi_e0, p.chi_m0, p.omega_q)?;
        Ok(EnergySummary {
            max_deviation: e.max_deviation,
            pass: e.max_deviation <= ENERGY_TOLERANCE,
        })
    };
    Some(Outcome::from_result(run()))
}

fn couplings(name: ScenarioName, p: &ResolvedParams, spec: &ScenarioSpec) -> Result<CouplingComparison> {
    let medium = p.medium(name)?;
    let omegas = spec.omegas()?;
    let table = CouplingTable::from_model(&medium.electric, &omegas, &spec.constants)?;
    let reference = match name {
        ScenarioName::Step | ScenarioName::Lorentz => {
            let linear = DispersionRelation::linear(spec.constants.c())?;
            Some(CouplingTable::from_im_chi(&medium.electric, &omegas, &linear, &spec.constants)?.values)
        }
        _ => None,
    };
    let max_rel_deviation = reference.as_ref().map(|r| {
        table
            .values
            .iter()
            .zip(r)
            .map(|(a, b)| if *b == 0.0 { a.abs() } else { (a - b).abs() / b.abs() })
            .fold(0.0, f64::max)
    });
    Ok(CouplingComparison {
        table,
        reference,
        max_rel_deviation,
    })
}

/// Runs every requested output; failures are recorded per output.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioReport> {
    let name = spec.name;
    let p = spec.params.resolve(name);
    p.validate()?;
    p.medium(name)?;
    let tol = spec.tolerances.unwrap_or_else(|| Tolerances::defaults(name));
    let times = spec.times()?;

    let mut jobs = Vec::new();
    for kind in spec.kernels() {
        for sign in spec.signs() {
            jobs.push((kind, sign));
        }
    }
    let kernels: Vec<Outcome<KernelComparison>> = jobs
        .iter()
        .map(|&(kind, sign)| Outcome::from_result(compare(name, &p, kind, sign, spec, &tol, &times)))
        .collect();
    let couplings = spec.outputs.couplings.then(|| Outcome::from_result(couplings(name, &p, spec)));
    let noise = spec.outputs.noise.then(|| {
        Outcome::from_result((|| {
            let medium = p.medium(name)?;
            let tables = CouplingTables {
                electric: couplings
                    .as_ref()
                    .and_then(|c| c.ok())
                    .map(|c| c.table.clone())
                    .filter(|t| t.clamped.is_empty()),
                magnetic: None,
            };
            let omegas = spec.omegas()?;
            noise_weight_bundle(&medium, &tables, &omegas, &spec.constants)
                .or_else(|_| noise_weight_bundle(&medium, &CouplingTables::default(), &omegas, &spec.constants))
        })())
    });
    let energy = energy(name, &p, &times, &spec.constants);
    let decay = decay(name, &p, spec);

    let kernels_pass = kernels.iter().all(|k| match k {
        Outcome::Ok(c) => c.pass != Some(false),
        Outcome::Skipped(_) => true,
        Outcome::Failed(_) => false,
    });
    let pass = kernels_pass
        && verdict(&energy, |e| e.pass)
        && verdict(&decay, |d| d.pass)
        && verdict(&couplings, |_| true)
        && verdict(&noise, |_| true);
    Ok(ScenarioReport {
        name,
        params: p,
        tolerances: tol,
        kernels,
        energy,
        decay,
        couplings,
        noise,
        pass,
    })
}

fn verdict<T>(o: &Option<Outcome<T>>, pass: impl Fn(&T) -> bool) -> bool {
    match o {
        None | Some(Outcome::Skipped(_)) => true,
        Some(Outcome::Ok(t)) => pass(t),
        Some(Outcome::Failed(_)) => false,
    }
}

fn file_label(label: &str) -> String {
    label.replace('+', "_plus").replace('-', "_minus")
}

impl ScenarioReport {
    pub fn to_json(&self) -> Result<String> {
        json_string(self)
    }

    /// Writes `report.json` and one CSV per series into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |file: String, body: String| -> Result<()> {
            fs::write(dir.join(&file), body)?;
            written.push(file);
            Ok(())
        };
        put("report.json".into(), self.to_json()?)?;
        for k in self.kernels.iter().filter_map(|k| k.ok()) {
            let stem = file_label(&k.label);
            put(format!("{stem}.csv"), k.series.to_csv()?)?;
            if let Some(r) = &k.reference {
                put(format!("{stem}_reference.csv"), r.series.to_csv()?)?;
            }
        }
        if let Some(c) = self.couplings.as_ref().and_then(|c| c.ok()) {
            put("couplings.csv".into(), c.table.to_csv()?)?;
        }
        if let Some(n) = self.noise.as_ref().and_then(|n| n.ok()) {
            put("noise.csv".into(), n.to_csv()?)?;
        }
        Ok(written)
    }
}
