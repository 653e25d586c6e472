//! Field-evolution kernels `Z±`, `ζ±`, `η±` and `Q±` as time series.
//!
//! With `D(s) = s²(1 + χ̃ₑ) + ω_q²(1 − χ̃ₘ)` and `σ = ±1` the images are
//!
//! ```text
//! Z: (s(1 + χ̃ₑ) − iσω_q) / D
//! ζ: f(ω_k) s / ((s + iσω_k) D)
//! η: g(ω_k)   / ((s + iσω_k) D)
//! Q: 1 / ((1 + χ̃ₑ)(s + iσω_k))
//! ```
//!
//! The backward (`σ = −1`) series is stored on `t ≥ 0`: its value at `τ`
//! is the backward kernel at time `−τ`.

mod validate;

pub use validate::{
    asymptotic_decay_check, energy_invariant, ode_residual, DecayCheck, EnergyReport, ResidualReport,
    MIN_POINTS_PER_PERIOD,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::coupling::coupling_from_chi;
use crate::error::{Error, Result};
use crate::io::{csv_string, json_string};
use crate::laplace::{invert_contour_grid, ContourParams, RationalImage, ResidueExpansion};
use crate::medium::{ModelKind, Role, SusceptibilityModel};
use crate::numerics::poly::Poly;

/// Distance from a zero of the transverse or longitudinal response below
/// which `ω_k` is treated as resonant.
pub const RESONANCE_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    #[serde(rename = "Z")]
    Z,
    #[serde(rename = "zeta")]
    Zeta,
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "Q")]
    Q,
}

impl KernelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelKind::Z => "Z",
            KernelKind::Zeta => "zeta",
            KernelKind::Eta => "eta",
            KernelKind::Q => "Q",
        }
    }

    fn has_bath_pole(&self) -> bool {
        !matches!(self, KernelKind::Z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn sigma(&self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Residues when both susceptibilities are rational, contour otherwise.
    #[default]
    Auto,
    Residue,
    Contour,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Residue,
    Contour,
    ClosedForm,
}

/// Source of the coupling factor `f(ω_k)` in `ζ` or `g(ω_k)` in `η`.
///
/// Only `|f|²` is fixed by the medium; the factor is taken real and
/// non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "source", content = "value", rename_all = "snake_case")]
pub enum Prefactor {
    #[default]
    FromMedium,
    Unit,
    Value(f64),
}

/// Electric and magnetic response of the medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub electric: SusceptibilityModel,
    pub magnetic: SusceptibilityModel,
}

impl Medium {
    pub fn new(electric: SusceptibilityModel, magnetic: SusceptibilityModel) -> Result<Self> {
        let m = Medium { electric, magnetic };
        m.validate()?;
        Ok(m)
    }

    pub fn vacuum() -> Self {
        Medium {
            electric: SusceptibilityModel::vacuum(Role::Electric),
            magnetic: SusceptibilityModel::vacuum(Role::Magnetic),
        }
    }

    /// Purely electric medium.
    pub fn electric(model: SusceptibilityModel) -> Result<Self> {
        Self::new(model, SusceptibilityModel::vacuum(Role::Magnetic))
    }

    pub fn validate(&self) -> Result<()> {
        if self.electric.role != Role::Electric || self.magnetic.role != Role::Magnetic {
            return Err(Error::InvalidParameter(
                "medium needs an electric and a magnetic susceptibility, in that order".into(),
            ));
        }
        self.electric.validate()?;
        self.magnetic.validate()
    }

    fn models(&self) -> [&SusceptibilityModel; 2] {
        [&self.electric, &self.magnetic]
    }

    /// `(Nₑ, Dₑ, Nₘ, Dₘ)` when both images are rational.
    fn rational(&self) -> Option<(Poly, Poly, Poly, Poly)> {
        let (ne, de) = self.electric.rational_image()?;
        let (nm, dm) = self.magnetic.rational_image()?;
        Some((ne, de, nm, dm))
    }

    /// Largest oscillation frequency the media contribute.
    fn bandwidth(&self) -> f64 {
        self.models()
            .iter()
            .map(|m| match m.kind {
                ModelKind::Lorentz { .. } => m.characteristic_frequency(),
                _ => 0.0,
            })
            .sum()
    }

    /// A non-rational model without any loss would need contour inversion
    /// of an image with poles on the imaginary axis.
    fn lossless_non_rational(&self) -> bool {
        let lossless = |m: &SusceptibilityModel| match &m.kind {
            ModelKind::Tabulated(t) => t.im_samples().is_some_and(|(_, im)| im.iter().all(|&v| v == 0.0)),
            _ => false,
        };
        self.models().iter().any(|m| lossless(m)) && self.rational().is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRequest {
    pub medium: Medium,
    pub omega_q: f64,
    pub omega_k: f64,
    pub sign: Sign,
    /// Uniform, strictly increasing, starting at 0.
    pub times: Vec<f64>,
    #[serde(default)]
    pub constants: PhysicalConstants,
    #[serde(default)]
    pub route: Route,
    #[serde(default)]
    pub prefactor: Prefactor,
    #[serde(default)]
    pub contour: ContourParams,
}

impl KernelRequest {
    pub fn new(medium: Medium, omega_q: f64, omega_k: f64, sign: Sign, times: Vec<f64>) -> Self {
        KernelRequest {
            medium,
            omega_q,
            omega_k,
            sign,
            times,
            constants: PhysicalConstants::default(),
            route: Route::Auto,
            prefactor: Prefactor::FromMedium,
            contour: ContourParams::default(),
        }
    }

    pub fn with_route(mut self, route: Route) -> Self {
        self.route = route;
        self
    }

    pub fn with_prefactor(mut self, prefactor: Prefactor) -> Self {
        self.prefactor = prefactor;
        self
    }

    pub fn with_constants(mut self, constants: PhysicalConstants) -> Self {
        self.constants = constants;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        for (name, v) in [("omega_q", self.omega_q), ("omega_k", self.omega_k)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        validate_grid(&self.times)?;
        self.contour.validate()
    }

    fn bath_pole(&self) -> Complex64 {
        Complex64::new(0.0, -self.sign.sigma() * self.omega_k)
    }
}

/// `n` equally spaced times on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time grid needs t_max > 0 and at least 2 points, got t_max = {t_max}, n = {n}"
        )));
    }
    let h = t_max / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    g[n - 1] = t_max;
    Ok(g)
}

pub fn validate_grid(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(Error::InvalidParameter("time grid must start at 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidParameter(
            "time grid must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Undamped part `amplitude · e^{pole t}` left by the bath pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistentPart {
    pub pole: Complex64,
    pub amplitude: Complex64,
}

impl PersistentPart {
    pub fn eval(&self, t: f64) -> Complex64 {
        self.amplitude * (self.pole * t).exp()
    }
}

/// Echo of the request parameters stored with a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestEcho {
    pub medium: Medium,
    pub omega_q: f64,
    pub omega_k: f64,
    pub route: Route,
    pub prefactor: Prefactor,
    pub constants: PhysicalConstants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSeries {
    pub kind: KernelKind,
    pub sign: Sign,
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Exact time derivative, when the route provides one.
    pub derivative: Option<Vec<Complex64>>,
    pub method: Method,
    /// Estimated absolute error of `values`.
    pub accuracy: f64,
    /// Poles of the image (residue route only).
    pub poles: Vec<Complex64>,
    /// `f(ω_k)` or `g(ω_k)` multiplying `ζ` or `η`; 1 for `Z` and `Q`.
    pub prefactor: f64,
    pub persistent: Option<PersistentPart>,
    pub request: Option<RequestEcho>,
}

impl KernelSeries {
    pub fn to_csv(&self) -> Result<String> {
        csv_string(
            &["t", "re", "im"],
            self.times
                .iter()
                .zip(&self.values)
                .map(|(&t, v)| vec![t, v.re, v.im]),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        json_string(self)
    }

    /// Largest absolute difference from `other` on a shared grid.
    pub fn max_abs_diff(&self, other: &KernelSeries) -> Result<f64> {
        if self.times != other.times {
            return Err(Error::InvalidParameter("series are on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

pub fn kernel_z(req: &KernelRequest) -> Result<KernelSeries> {
    kernel(KernelKind::Z, req)
}

pub fn kernel_zeta(req: &KernelRequest) -> Result<KernelSeries> {
    kernel(KernelKind::Zeta, req)
}

pub fn kernel_eta(req: &KernelRequest) -> Result<KernelSeries> {
    kernel(KernelKind::Eta, req)
}

pub fn kernel_q(req: &KernelRequest) -> Result<KernelSeries> {
    kernel(KernelKind::Q, req)
}

pub fn kernel(kind: KernelKind, req: &KernelRequest) -> Result<KernelSeries> {
    req.validate()?;
    if matches!(kind, KernelKind::Zeta | KernelKind::Eta) && !(req.omega_k > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{} needs omega_k > 0, got {}",
            kind.as_str(),
            req.omega_k
        )));
    }
    let prefactor = resolve_prefactor(kind, req)?;
    let echo = RequestEcho {
        medium: req.medium.clone(),
        omega_q: req.omega_q,
        omega_k: req.omega_k,
        route: req.route,
        prefactor: req.prefactor,
        constants: req.constants,
    };
    let mut series = if prefactor == 0.0 {
        let n = req.times.len();
        KernelSeries {
            kind,
            sign: req.sign,
            times: req.times.clone(),
            values: vec![Complex64::new(0.0, 0.0); n],
            derivative: Some(vec![Complex64::new(0.0, 0.0); n]),
            method: Method::ClosedForm,
            accuracy: 0.0,
            poles: Vec::new(),
            prefactor,
            persistent: None,
            request: None,
        }
    } else {
        let rational = req.medium.rational();
        match (req.route, rational) {
            (Route::Residue, None) => {
                return Err(Error::Unsupported(
                    "residue route needs rational susceptibilities (vacuum, step or lorentz)".into(),
                ))
            }
            (Route::Auto | Route::Residue, Some(r)) => residue_route(kind, req, prefactor, r)?,
            (Route::Contour, Some(r)) => {
                refuse_axis_poles(kind, req, prefactor, &r)?;
                contour_route(kind, req, prefactor)?
            }
            (_, None) => {
                if req.medium.lossless_non_rational() {
                    return Err(Error::Unsupported(
                        "lossless non-rational medium: contour inversion cannot converge".into(),
                    ));
                }
                contour_route(kind, req, prefactor)?
            }
        }
    };
    series.request = Some(echo);
    Ok(series)
}

pub(crate) fn resolve_prefactor(kind: KernelKind, req: &KernelRequest) -> Result<f64> {
    let model = match kind {
        KernelKind::Z | KernelKind::Q => return Ok(1.0),
        KernelKind::Zeta => &req.medium.electric,
        KernelKind::Eta => &req.medium.magnetic,
    };
    match req.prefactor {
        Prefactor::Unit => Ok(1.0),
        Prefactor::Value(v) if v.is_finite() => Ok(v),
        Prefactor::Value(v) => Err(Error::InvalidParameter(format!("prefactor must be finite, got {v}"))),
        Prefactor::FromMedium => match coupling_from_chi(model, req.omega_k, &req.constants) {
            Ok(c) => Ok(c.value.sqrt()),
            Err(Error::SpectralLine { omega, weight }) => Err(Error::Unsupported(format!(
                "the lossless oscillator couples only at omega = {omega} (line weight {weight}); \
                 pass an explicit prefactor"
            ))),
            Err(e) => Err(e),
        },
    }
}

fn x() -> Poly {
    Poly::from_real(&[0.0, 1.0])
}

fn ci(v: f64) -> Complex64 {
    Complex64::new(0.0, v)
}

/// `s²(Dₑ+Nₑ)Dₘ + ω_q²(Dₘ−Nₘ)Dₑ`, the numerator of `D(s)` over `DₑDₘ`.
fn transverse_denominator(req: &KernelRequest, r: &(Poly, Poly, Poly, Poly)) -> Poly {
    let (ne, de, nm, dm) = r;
    let s2 = x().mul(&x());
    s2.mul(&de.add(ne)).mul(dm).add(
        &dm.sub(nm)
            .mul(de)
            .scale(Complex64::new(req.omega_q * req.omega_q, 0.0)),
    )
}

/// The factor whose zeros would coincide with the bath pole at resonance.
fn response_factor(kind: KernelKind, req: &KernelRequest, r: &(Poly, Poly, Poly, Poly)) -> Poly {
    match kind {
        KernelKind::Q => r.1.add(&r.0),
        _ => transverse_denominator(req, r),
    }
}

fn rational_image(kind: KernelKind, req: &KernelRequest, pref: f64, r: &(Poly, Poly, Poly, Poly)) -> Result<RationalImage> {
    let (ne, de, _, dm) = r;
    let bath = Poly::linear_factor(req.bath_pole());
    let p = Complex64::new(pref, 0.0);
    let (num, den) = match kind {
        KernelKind::Z => (
            x().mul(&de.add(ne))
                .mul(dm)
                .sub(&de.mul(dm).scale(ci(req.sign.sigma() * req.omega_q))),
            transverse_denominator(req, r),
        ),
        KernelKind::Zeta => (x().mul(de).mul(dm).scale(p), bath.mul(&transverse_denominator(req, r))),
        KernelKind::Eta => (de.mul(dm).scale(p), bath.mul(&transverse_denominator(req, r))),
        KernelKind::Q => (de.clone(), de.add(ne).mul(&bath)),
    };
    RationalImage::new(num, den)
}

fn check_resonance(kind: KernelKind, req: &KernelRequest, r: &(Poly, Poly, Poly, Poly)) -> Result<()> {
    if !kind.has_bath_pole() {
        return Ok(());
    }
    let p0 = req.bath_pole();
    for root in response_factor(kind, req, r).roots()? {
        let distance = (root.value - p0).norm();
        if distance < RESONANCE_DISTANCE {
            return Err(Error::Resonance {
                omega_k: req.omega_k,
                resonance: root.value.im.abs(),
                distance,
            });
        }
    }
    Ok(())
}

fn refuse_axis_poles(kind: KernelKind, req: &KernelRequest, pref: f64, r: &(Poly, Poly, Poly, Poly)) -> Result<()> {
    check_resonance(kind, req, r)?;
    // Poles whose residues vanish (a cancelled factor) do not matter.
    let expansion = rational_image(kind, req, pref.max(1.0), r)?.expansion()?;
    let weight = |t: &crate::laplace::PoleTerm| t.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let scale = expansion.terms.iter().map(weight).fold(0.0, f64::max);
    let p0 = req.bath_pole();
    for term in &expansion.terms {
        let p = term.pole;
        if kind.has_bath_pole() && (p - p0).norm() < RESONANCE_DISTANCE {
            continue;
        }
        if p.re >= -1e-10 * p.norm().max(1.0) && weight(term) > 1e-12 * scale {
            return Err(Error::ImaginaryAxisPole { pole: p });
        }
    }
    Ok(())
}

fn residue_route(kind: KernelKind, req: &KernelRequest, pref: f64, r: (Poly, Poly, Poly, Poly)) -> Result<KernelSeries> {
    check_resonance(kind, req, &r)?;
    let image = rational_image(kind, req, pref, &r)?;
    let expansion: ResidueExpansion = image.expansion()?;
    let values: Vec<Complex64> = req.times.iter().map(|&t| expansion.eval(t)).collect();
    let derivative: Vec<Complex64> = req.times.iter().map(|&t| expansion.derivative(t)).collect();
    let t_max = *req.times.last().expect("validated grid");
    let scale: f64 = expansion
        .terms
        .iter()
        .map(|term| {
            term.coefficients
                .iter()
                .enumerate()
                .map(|(j, c)| c.norm() * t_max.max(1.0).powi(j as i32))
                .sum::<f64>()
        })
        .sum();
    let persistent = if kind.has_bath_pole() {
        let p0 = req.bath_pole();
        expansion
            .terms
            .iter()
            .filter(|t| t.multiplicity == 1)
            .min_by(|a, b| (a.pole - p0).norm().total_cmp(&(b.pole - p0).norm()))
            .map(|t| PersistentPart {
                pole: p0,
                amplitude: t.coefficients[0],
            })
    } else {
        None
    };
    Ok(KernelSeries {
        kind,
        sign: req.sign,
        times: req.times.clone(),
        values,
        derivative: Some(derivative),
        method: Method::Residue,
        accuracy: 16.0 * f64::EPSILON * scale * expansion.max_condition().max(1.0),
        poles: expansion.poles(),
        prefactor: pref,
        persistent,
        request: None,
    })
}

/// `χ̃(p)` for `p` on the imaginary axis, where the Laplace integral of a
/// tabulated response is not available but its Fourier transform is.
fn chi_tilde_at(model: &SusceptibilityModel, p: Complex64) -> Result<Complex64> {
    if p.re == 0.0 {
        if p.im == 0.0 {
            return model.static_chi().map(|v| Complex64::new(v, 0.0)).ok_or_else(|| {
                Error::Unsupported("static susceptibility is unbounded at omega_k = 0".into())
            });
        }
        model.chi_freq(-p.im)
    } else {
        model.chi_laplace(p)
    }
}

/// `G(s)` such that the image is `G(s)/(s − p₀)` (bath kinds) or the full
/// image (`Z`).
fn image_factor(kind: KernelKind, req: &KernelRequest, pref: f64, s: Complex64) -> Result<Complex64> {
    let m = &req.medium;
    let one = Complex64::new(1.0, 0.0);
    let chi_e = chi_tilde_at(&m.electric, s)?;
    if kind == KernelKind::Q {
        return Ok(one / (one + chi_e));
    }
    let chi_m = chi_tilde_at(&m.magnetic, s)?;
    let w2 = req.omega_q * req.omega_q;
    let d = s * s * (one + chi_e) + (one - chi_m) * w2;
    Ok(match kind {
        KernelKind::Z => (s * (one + chi_e) - ci(req.sign.sigma() * req.omega_q)) / d,
        KernelKind::Zeta => s * pref / d,
        KernelKind::Eta => Complex64::new(pref, 0.0) / d,
        KernelKind::Q => unreachable!(),
    })
}

/// `1 + χ̃ₑ(s)` for `Q`, `D(s)` otherwise.
fn response_value(kind: KernelKind, req: &KernelRequest, s: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let chi_e = chi_tilde_at(&req.medium.electric, s)?;
    if kind == KernelKind::Q {
        return Ok(one + chi_e);
    }
    let chi_m = chi_tilde_at(&req.medium.magnetic, s)?;
    Ok(s * s * (one + chi_e) + (one - chi_m) * (req.omega_q * req.omega_q))
}

/// Newton-step distance from the bath pole to the nearest zero of the
/// response, for images that are not rational.
fn check_resonance_numeric(kind: KernelKind, req: &KernelRequest) -> Result<()> {
    let p0 = req.bath_pole();
    let r0 = response_value(kind, req, p0)?;
    let h = 1e-4 * req.omega_k.max(1e-3);
    let dr = (response_value(kind, req, p0 + ci(h))? - response_value(kind, req, p0 - ci(h))?) / ci(2.0 * h);
    let distance = r0.norm() / dr.norm().max(f64::MIN_POSITIVE);
    if r0 == Complex64::new(0.0, 0.0) || distance < RESONANCE_DISTANCE {
        let zero = p0 - r0 / dr;
        return Err(Error::Resonance {
            omega_k: req.omega_k,
            resonance: if zero.is_finite() { zero.im.abs() } else { req.omega_k },
            distance,
        });
    }
    Ok(())
}

fn contour_route(kind: KernelKind, req: &KernelRequest, pref: f64) -> Result<KernelSeries> {
    let t_max = *req.times.last().expect("validated grid");
    let p0 = req.bath_pole();
    // The bath pole sits on the imaginary axis; take it out analytically.
    let (residue, image): (Complex64, Box<dyn Fn(Complex64) -> Result<Complex64> + Sync>) =
        if kind.has_bath_pole() {
            check_resonance_numeric(kind, req)?;
            let g0 = image_factor(kind, req, pref, p0)?;
            (
                g0,
                Box::new(move |s: Complex64| Ok((image_factor(kind, req, pref, s)? - g0) / (s - p0))),
            )
        } else {
            (
                Complex64::new(0.0, 0.0),
                Box::new(move |s: Complex64| image_factor(kind, req, pref, s)),
            )
        };
    let mut params = req.contour;
    params.time_range = Some((0.0, t_max));
    params.bandwidth = params
        .bandwidth
        .max(req.omega_q + req.omega_k + req.medium.bandwidth());
    let coarse = invert_contour_grid(&image, &req.times, &params)?;
    let fine = invert_contour_grid(
        &image,
        &req.times,
        &ContourParams {
            nodes: params.nodes + 8,
            ..params
        },
    )?;
    let accuracy = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let persistent = kind.has_bath_pole().then_some(PersistentPart {
        pole: p0,
        amplitude: residue,
    });
    let values = fine
        .iter()
        .zip(&req.times)
        .map(|(v, &t)| v + persistent.map_or(Complex64::new(0.0, 0.0), |p| p.eval(t)))
        .collect();
    Ok(KernelSeries {
        kind,
        sign: req.sign,
        times: req.times.clone(),
        values,
        derivative: None,
        method: Method::Contour,
        accuracy: accuracy.max(f64::EPSILON),
        poles: Vec::new(),
        prefactor: pref,
        persistent,
        request: None,
    })
}
