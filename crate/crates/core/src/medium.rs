//! Causal susceptibility models in the time, frequency and Laplace domains.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::poly::Poly;
use crate::numerics::quadrature::integrate_with_breaks;
use crate::numerics::{one_minus_exp_neg_over, sinc_t};
use crate::tabulated::{Sampled, Tabulated};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Electric,
    Magnetic,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Electric => "electric",
            Role::Magnetic => "magnetic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Vacuum,
    /// `χ(t) = χ⁰/Δ` on `0 < t < Δ`.
    Box { chi0: f64, delta: f64 },
    /// `χ(t) = β u(t)`.
    Step { beta: f64 },
    /// Damped oscillator with image `ωₚ² / (s² + γ s + ω₀²)`.
    Lorentz {
        omega0: f64,
        gamma: f64,
        omegap: f64,
    },
    Tabulated(Tabulated),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityModel {
    #[serde(flatten)]
    pub kind: ModelKind,
    pub role: Role,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

impl SusceptibilityModel {
    pub fn new(kind: ModelKind, role: Role) -> Result<Self> {
        let m = SusceptibilityModel { kind, role };
        m.validate()?;
        Ok(m)
    }

    pub fn vacuum(role: Role) -> Self {
        SusceptibilityModel {
            kind: ModelKind::Vacuum,
            role,
        }
    }

    pub fn boxcar(chi0: f64, delta: f64, role: Role) -> Result<Self> {
        Self::new(ModelKind::Box { chi0, delta }, role)
    }

    pub fn step(beta: f64, role: Role) -> Result<Self> {
        Self::new(ModelKind::Step { beta }, role)
    }

    pub fn lorentz(omega0: f64, gamma: f64, omegap: f64, role: Role) -> Result<Self> {
        Self::new(
            ModelKind::Lorentz {
                omega0,
                gamma,
                omegap,
            },
            role,
        )
    }

    pub fn tabulated(table: Tabulated, role: Role) -> Result<Self> {
        Self::new(ModelKind::Tabulated(table), role)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            ModelKind::Vacuum => Ok(()),
            ModelKind::Box { chi0, delta } => require(
                chi0.is_finite() && *chi0 >= 0.0 && delta.is_finite() && *delta > 0.0,
                || format!("box model needs chi0 >= 0 and delta > 0, got chi0 = {chi0}, delta = {delta}"),
            ),
            ModelKind::Step { beta } => require(beta.is_finite() && *beta >= 0.0, || {
                format!("step model needs beta >= 0, got {beta}")
            }),
            ModelKind::Lorentz {
                omega0,
                gamma,
                omegap,
            } => require(
                omega0.is_finite()
                    && *omega0 > 0.0
                    && gamma.is_finite()
                    && *gamma >= 0.0
                    && omegap.is_finite()
                    && *omegap >= 0.0,
                || {
                    format!(
                        "lorentz model needs omega0 > 0, gamma >= 0, omegap >= 0, \
                         got omega0 = {omega0}, gamma = {gamma}, omegap = {omegap}"
                    )
                },
            ),
            ModelKind::Tabulated(t) => t.validate(),
        }
    }

    pub fn is_vacuum(&self) -> bool {
        match &self.kind {
            ModelKind::Vacuum => true,
            ModelKind::Box { chi0, .. } => *chi0 == 0.0,
            ModelKind::Step { beta } => *beta == 0.0,
            ModelKind::Lorentz { omegap, .. } => *omegap == 0.0,
            ModelKind::Tabulated(_) => false,
        }
    }

    /// `χ̃(s) = N(s)/D(s)` for the kinds whose image is rational.
    pub fn rational_image(&self) -> Option<(Poly, Poly)> {
        match &self.kind {
            ModelKind::Vacuum => Some((Poly::zero(), Poly::from_real(&[1.0]))),
            ModelKind::Step { beta } => {
                Some((Poly::from_real(&[*beta]), Poly::from_real(&[0.0, 1.0])))
            }
            ModelKind::Lorentz {
                omega0,
                gamma,
                omegap,
            } => Some((
                Poly::from_real(&[omegap * omegap]),
                Poly::from_real(&[omega0 * omega0, *gamma, 1.0]),
            )),
            ModelKind::Box { chi0, .. } if *chi0 == 0.0 => {
                Some((Poly::zero(), Poly::from_real(&[1.0])))
            }
            ModelKind::Box { .. } | ModelKind::Tabulated(_) => None,
        }
    }

    /// Poles of `χ̃(s)` for the rational kinds.
    pub fn poles(&self) -> Vec<Complex64> {
        match &self.kind {
            ModelKind::Step { beta } if *beta > 0.0 => vec![c(0.0)],
            ModelKind::Lorentz {
                omega0,
                gamma,
                omegap,
            } if *omegap > 0.0 => {
                let nu = c(omega0 * omega0 - gamma * gamma / 4.0).sqrt();
                let a = c(-gamma / 2.0);
                vec![a + Complex64::i() * nu, a - Complex64::i() * nu]
            }
            _ => Vec::new(),
        }
    }

    fn check_pole(&self, s: Complex64) -> Result<()> {
        for p in self.poles() {
            if (s - p).norm() <= 1e-12 * p.norm().max(1.0) {
                return Err(Error::Pole { s, pole: p });
            }
        }
        Ok(())
    }

    /// `χ(t)`, exactly zero for `t <= 0`.
    pub fn chi_time(&self, t: f64) -> Result<f64> {
        Ok(self.chi_time_sampled(t)?.value)
    }

    /// As [`chi_time`](Self::chi_time), flagging zero extrapolation of tables.
    pub fn chi_time_sampled(&self, t: f64) -> Result<Sampled<f64>> {
        let exact = |value| Sampled {
            value,
            extrapolated: false,
        };
        if !(t > 0.0) {
            return Ok(exact(0.0));
        }
        Ok(match &self.kind {
            ModelKind::Vacuum => exact(0.0),
            ModelKind::Box { chi0, delta } => exact(if t < *delta { chi0 / delta } else { 0.0 }),
            ModelKind::Step { beta } => exact(*beta),
            ModelKind::Lorentz {
                omega0,
                gamma,
                omegap,
            } => {
                let nu2 = c(omega0 * omega0 - gamma * gamma / 4.0);
                exact(omegap * omegap * (-gamma * t / 2.0).exp() * sinc_t(nu2, t).re)
            }
            ModelKind::Tabulated(tab) => return tab.time(t),
        })
    }

    /// `χ(ω) = ∫₀^∞ χ(t) e^{iωt} dt`; the step response uses its Abel limit.
    pub fn chi_freq(&self, omega: f64) -> Result<Complex64> {
        Ok(self.chi_freq_sampled(omega)?.value)
    }

    pub fn chi_freq_sampled(&self, omega: f64) -> Result<Sampled<Complex64>> {
        let exact = |value| Sampled {
            value,
            extrapolated: false,
        };
        Ok(match &self.kind {
            ModelKind::Vacuum => exact(c(0.0)),
            ModelKind::Box { chi0, delta } => {
                let x = omega * delta;
                if x == 0.0 {
                    exact(c(*chi0))
                } else {
                    let h = (x / 2.0).sin();
                    exact(Complex64::new(chi0 * x.sin() / x, chi0 * 2.0 * h * h / x))
                }
            }
            ModelKind::Step { beta } => {
                if omega == 0.0 {
                    return Err(Error::ZeroFrequencySingularity);
                }
                exact(Complex64::new(0.0, beta / omega))
            }
            ModelKind::Lorentz {
                omega0,
                gamma,
                omegap,
            } => {
                let s = Complex64::new(0.0, -omega);
                self.check_pole(s)?;
                exact(c(omegap * omegap) / Complex64::new(omega0 * omega0 - omega * omega, -gamma * omega))
            }
            ModelKind::Tabulated(tab) => return tab.freq(omega),
        })
    }

    /// `χ̃(s) = ∫₀^∞ χ(t) e^{-st} dt`.
    pub fn chi_laplace(&self, s: Complex64) -> Result<Complex64> {
        match &self.kind {
            ModelKind::Vacuum => Ok(c(0.0)),
            ModelKind::Box { chi0, delta } => Ok(one_minus_exp_neg_over(s * delta) * chi0),
            ModelKind::Tabulated(tab) => tab.laplace(s),
            ModelKind::Step { .. } | ModelKind::Lorentz { .. } => {
                self.check_pole(s)?;
                let (n, d) = self.rational_image().expect("rational kind");
                Ok(n.eval(s) / d.eval(s))
            }
        }
    }

    /// Instantaneous static response `χ̃(0)`, where finite.
    pub fn static_chi(&self) -> Option<f64> {
        match &self.kind {
            ModelKind::Vacuum => Some(0.0),
            ModelKind::Box { chi0, .. } => Some(*chi0),
            ModelKind::Step { beta } if *beta == 0.0 => Some(0.0),
            ModelKind::Step { .. } => None,
            ModelKind::Lorentz { omega0, omegap, .. } => Some(omegap * omegap / (omega0 * omega0)),
            ModelKind::Tabulated(tab) => tab.laplace(c(1e-12)).ok().map(|z| z.re),
        }
    }

    /// Largest natural frequency of the model, used to size time grids.
    pub fn characteristic_frequency(&self) -> f64 {
        match &self.kind {
            ModelKind::Lorentz { omega0, omegap, .. } => {
                (omega0 * omega0 + omegap * omegap).sqrt()
            }
            ModelKind::Step { beta } => *beta,
            ModelKind::Box { delta, .. } => 1.0 / delta,
            _ => 0.0,
        }
    }

    /// Imaginary part on the positive axis, zero-extrapolated for tables and
    /// `β/ω` for the step kind (finite away from the origin).
    fn im_chi_lenient(&self, omega: f64) -> f64 {
        match &self.kind {
            ModelKind::Step { beta } => beta / omega,
            ModelKind::Lorentz { gamma, .. } if *gamma == 0.0 => 0.0,
            _ => self.chi_freq(omega).map(|z| z.im).unwrap_or(0.0),
        }
    }

    /// `Re χ(ω)` rebuilt from `Im χ` on `(0, ω_max]` by principal-value
    /// quadrature, with a tail estimate for the truncated range.
    pub fn kk_real_from_imag(&self, omega: f64, omega_max: f64) -> Result<KkEstimate> {
        self.kk_real_from_imag_with(omega, omega_max, KK_TAIL_TOLERANCE)
    }

    pub fn kk_real_from_imag_with(
        &self,
        omega: f64,
        omega_max: f64,
        tail_tolerance: f64,
    ) -> Result<KkEstimate> {
        require(omega.is_finite() && omega > 0.0, || {
            format!("KK reconstruction needs omega > 0, got {omega}")
        })?;
        require(omega_max > omega, || {
            format!("cutoff {omega_max} must exceed omega = {omega}")
        })?;
        let two_over_pi = 2.0 / PI;
        match &self.kind {
            ModelKind::Vacuum => {
                return Ok(KkEstimate {
                    value: 0.0,
                    error: 0.0,
                    tail: 0.0,
                    warning: false,
                })
            }
            ModelKind::Lorentz {
                omega0,
                gamma,
                omegap,
            } if *gamma == 0.0 => {
                // Im χ is the line (π ωₚ²/2ω₀) δ(ω' - ω₀).
                let inside = *omega0 <= omega_max;
                let value = if inside {
                    omegap * omegap / (omega0 * omega0 - omega * omega)
                } else {
                    0.0
                };
                let tail = if inside {
                    0.0
                } else {
                    (omegap * omegap / (omega0 * omega0 - omega * omega)).abs()
                };
                return Ok(KkEstimate {
                    value,
                    error: 0.0,
                    tail,
                    warning: tail > tail_tolerance,
                });
            }
            _ => {}
        }

        let h = match &self.kind {
            ModelKind::Lorentz { gamma, .. } => gamma / 10.0,
            ModelKind::Tabulated(tab) => tab.local_step(omega),
            ModelKind::Box { delta, .. } => 0.1 / delta,
            _ => 0.1 * omega,
        }
        .min(0.5 * omega)
        .min(0.5 * (omega_max - omega));

        // Re χ = (2/π) PV ∫ g(ω')/(ω' - ω) dω' with g = Im χ(ω') ω'/(ω' + ω).
        let g = |w: f64| self.im_chi_lenient(w) * w / (w + omega);
        let mut breaks: Vec<f64> = match &self.kind {
            ModelKind::Lorentz { omega0, gamma, .. } => {
                vec![omega0 - gamma, *omega0, omega0 + gamma]
            }
            ModelKind::Box { delta, .. } => (1..2000)
                .map(|k| 2.0 * PI * k as f64 / delta)
                .take_while(|&w| w < omega_max)
                .collect(),
            ModelKind::Tabulated(tab) => tab
                .im_samples()
                .map(|(ws, _)| ws.to_vec())
                .unwrap_or_default(),
            _ => Vec::new(),
        };
        breaks.retain(|&b| b > 0.0 && b < omega_max);
        let (abs_tol, rel_tol, limit) = (1e-13, 1e-11, 4000);
        let lower = integrate_with_breaks(
            |w: f64| g(w) / (w - omega),
            0.0,
            omega - h,
            &breaks,
            abs_tol,
            rel_tol,
            limit,
        );
        let upper = integrate_with_breaks(
            |w: f64| g(w) / (w - omega),
            omega + h,
            omega_max,
            &breaks,
            abs_tol,
            rel_tol,
            limit,
        );
        let centre = integrate_with_breaks(
            |u: f64| (g(omega + u) - g(omega - u)) / u,
            0.0,
            h,
            &[],
            abs_tol,
            rel_tol,
            limit,
        );
        let value = two_over_pi * (lower.value + upper.value + centre.value);
        let error = two_over_pi * (lower.error + upper.error + centre.error);

        // Beyond the cutoff Im χ ~ ω^{-p}; the dropped integral is ≈ Im χ(W)/p.
        let w = omega_max;
        let im_w = self.im_chi_lenient(w).abs();
        let im_in = self.im_chi_lenient(0.9 * w).abs();
        let p = if im_w > 0.0 && im_in > 0.0 {
            ((im_in / im_w).ln() / (1.0 / 0.9f64).ln()).max(0.5)
        } else {
            1.0
        };
        let tail = two_over_pi * im_w / p;
        Ok(KkEstimate {
            value,
            error,
            tail,
            warning: tail > tail_tolerance,
        })
    }

    /// Lists grid points violating causality (`χ(t) ≠ 0` for `t ≤ 0`) or
    /// passivity (`Im χ(ω) < 0` for `ω > 0`). Never fails.
    pub fn check_causality_passivity(&self, grid: &[f64]) -> ValidationReport {
        let mut violations = Vec::new();
        for &x in grid {
            let a = x.abs();
            for t in [-a, 0.0] {
                if let Ok(v) = self.chi_time(t) {
                    if v != 0.0 {
                        violations.push(Violation {
                            check: Check::Causality,
                            at: t,
                            value: v,
                        });
                    }
                }
            }
            if a > 0.0 {
                if let Ok(z) = self.chi_freq(a) {
                    if z.im < -PASSIVITY_SLACK * z.norm().max(1.0) {
                        violations.push(Violation {
                            check: Check::Passivity,
                            at: a,
                            value: z.im,
                        });
                    }
                }
            }
        }
        if let ModelKind::Tabulated(tab) = &self.kind {
            if let Some((ws, ims)) = tab.im_samples() {
                for (&w, &im) in ws.iter().zip(ims) {
                    if w > 0.0 && im < 0.0 {
                        violations.push(Violation {
                            check: Check::Passivity,
                            at: w,
                            value: im,
                        });
                    }
                }
            }
        }
        violations.sort_by(|a, b| a.at.total_cmp(&b.at));
        violations.dedup();
        ValidationReport { violations }
    }
}

pub const KK_TAIL_TOLERANCE: f64 = 1e-6;
const PASSIVITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KkEstimate {
    pub value: f64,
    /// Quadrature error estimate over `(0, ω_max]`.
    pub error: f64,
    /// Estimated contribution of `Im χ` beyond the cutoff.
    pub tail: f64,
    /// Set when the tail exceeds the requested tolerance.
    pub warning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Causality,
    Passivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: Check,
    pub at: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}
