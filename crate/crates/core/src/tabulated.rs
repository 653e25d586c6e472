//! Sampled susceptibilities: linear interpolation, CSV ingestion, and the
//! sine synthesis that rebuilds `χ(t)` from `Im χ(ω)` samples.

use std::io::Read;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::integrate_with_breaks;
use crate::numerics::segment::{linear_segment_exp, piecewise_linear_sine};

/// What to do when a sample is requested outside the tabulated range.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutOfRange {
    /// Return zero and raise the `extrapolated` flag.
    #[default]
    Zero,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum TabulatedData {
    Time {
        t: Vec<f64>,
        chi: Vec<f64>,
    },
    Frequency {
        omega: Vec<f64>,
        re_chi: Vec<f64>,
        im_chi: Vec<f64>,
    },
}

/// A value together with a flag telling whether it came from extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampled<T> {
    pub value: T,
    pub extrapolated: bool,
}

impl<T> Sampled<T> {
    fn exact(value: T) -> Self {
        Sampled {
            value,
            extrapolated: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    pub data: TabulatedData,
    #[serde(default)]
    pub out_of_range: OutOfRange,
}

fn check_axis(name: &str, xs: &[f64]) -> Result<()> {
    if xs.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "tabulated {name} needs at least two samples"
        )));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite {name} sample")));
    }
    if xs[0] < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tabulated {name} must be non-negative, first sample is {}",
            xs[0]
        )));
    }
    if let Some(w) = xs.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "tabulated {name} must be strictly increasing ({} followed by {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

fn check_values(name: &str, n: usize, ys: &[f64]) -> Result<()> {
    if ys.len() != n {
        return Err(Error::InvalidParameter(format!(
            "column {name} has {} samples, expected {n}",
            ys.len()
        )));
    }
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite {name} sample")));
    }
    Ok(())
}

/// Linear interpolation; `None` outside `[xs[0], xs[n-1]]`.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let n = xs.len();
    if n == 0 || x < xs[0] || x > xs[n - 1] {
        return None;
    }
    let i = xs.partition_point(|&v| v <= x);
    if i >= n {
        return Some(ys[n - 1]);
    }
    if i == 0 {
        return Some(ys[0]);
    }
    let (x0, x1) = (xs[i - 1], xs[i]);
    let u = (x - x0) / (x1 - x0);
    Some(ys[i - 1] + u * (ys[i] - ys[i - 1]))
}

/// `(2/π) ∫ y(ω) sin(ωt) dω` over the linear interpolant of the samples,
/// continued linearly to `y(0) = 0` below the first sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Synthesis {
    pub value: f64,
    /// Size of the boundary term dropped by truncating at the last sample.
    pub tail: f64,
}

pub fn sine_synthesis(omegas: &[f64], values: &[f64], t: f64) -> Synthesis {
    if t <= 0.0 || omegas.is_empty() {
        return Synthesis {
            value: 0.0,
            tail: 0.0,
        };
    }
    let mut acc = piecewise_linear_sine(omegas, values, t);
    if omegas[0] > 0.0 {
        acc += piecewise_linear_sine(&[0.0, omegas[0]], &[0.0, values[0]], t);
    }
    // Envelope of the last few samples sets the size of the boundary term.
    let n = omegas.len();
    let w = omegas[n - 1];
    let envelope = values[n - (n / 20).max(1)..]
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    Synthesis {
        value: 2.0 / std::f64::consts::PI * acc,
        tail: 2.0 / std::f64::consts::PI * envelope / (w * t),
    }
}

impl Tabulated {
    pub fn new(data: TabulatedData, out_of_range: OutOfRange) -> Result<Self> {
        let table = Tabulated { data, out_of_range };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.data {
            TabulatedData::Time { t, chi } => {
                check_axis("t", t)?;
                check_values("chi", t.len(), chi)
            }
            TabulatedData::Frequency {
                omega,
                re_chi,
                im_chi,
            } => {
                check_axis("omega", omega)?;
                check_values("re_chi", omega.len(), re_chi)?;
                check_values("im_chi", omega.len(), im_chi)
            }
        }
    }

    fn outside<T: Default>(&self, x: f64, xs: &[f64]) -> Result<Sampled<T>> {
        match self.out_of_range {
            OutOfRange::Zero => Ok(Sampled {
                value: T::default(),
                extrapolated: true,
            }),
            OutOfRange::Error => Err(Error::OutOfRange {
                value: x,
                min: xs[0],
                max: xs[xs.len() - 1],
            }),
        }
    }

    pub fn time(&self, t: f64) -> Result<Sampled<f64>> {
        if t <= 0.0 {
            return Ok(Sampled::exact(0.0));
        }
        match &self.data {
            TabulatedData::Time { t: ts, chi } => match interpolate(ts, chi, t) {
                Some(v) => Ok(Sampled::exact(v)),
                None => self.outside(t, ts),
            },
            TabulatedData::Frequency { omega, im_chi, .. } => {
                Ok(Sampled::exact(sine_synthesis(omega, im_chi, t).value))
            }
        }
    }

    pub fn freq(&self, w: f64) -> Result<Sampled<Complex64>> {
        match &self.data {
            TabulatedData::Time { t, chi } => {
                let kappa = Complex64::new(0.0, w);
                Ok(Sampled::exact(segment_transform(t, chi, kappa)))
            }
            TabulatedData::Frequency {
                omega,
                re_chi,
                im_chi,
            } => {
                let a = w.abs();
                let v = match (interpolate(omega, re_chi, a), interpolate(omega, im_chi, a)) {
                    (Some(re), Some(im)) => Sampled::exact(Complex64::new(re, im)),
                    _ => self.outside(a, omega)?,
                };
                // χ(-ω) = χ(ω)* for a real response.
                Ok(if w < 0.0 {
                    Sampled {
                        value: v.value.conj(),
                        ..v
                    }
                } else {
                    v
                })
            }
        }
    }

    pub fn laplace(&self, s: Complex64) -> Result<Complex64> {
        match &self.data {
            TabulatedData::Time { t, chi } => Ok(segment_transform(t, chi, -s)),
            TabulatedData::Frequency { omega, im_chi, .. } => {
                if !(s.re > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Laplace image of a frequency table needs Re(s) > 0, got {s}"
                    )));
                }
                let s2 = s * s;
                let f = |w: f64| {
                    let y = interpolate(omega, im_chi, w).unwrap_or_else(|| {
                        // linear ramp from the origin to the first sample
                        im_chi[0] * w / omega[0]
                    });
                    w * y / (s2 + w * w)
                };
                let w_max = omega[omega.len() - 1];
                let q = integrate_with_breaks(f, 0.0, w_max, omega, 1e-13, 1e-11, 20_000);
                Ok(q.value * (2.0 / std::f64::consts::PI))
            }
        }
    }

    /// Tabulated `Im χ(ω)` samples, when the table is frequency-domain.
    pub fn im_samples(&self) -> Option<(&[f64], &[f64])> {
        match &self.data {
            TabulatedData::Frequency { omega, im_chi, .. } => Some((omega, im_chi)),
            TabulatedData::Time { .. } => None,
        }
    }

    /// Smallest gap between consecutive samples around `x`.
    pub fn local_step(&self, x: f64) -> f64 {
        let xs = match &self.data {
            TabulatedData::Time { t, .. } => t,
            TabulatedData::Frequency { omega, .. } => omega,
        };
        let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
        let mut h = xs[i] - xs[i - 1];
        if i + 1 < xs.len() {
            h = h.min(xs[i + 1] - xs[i]);
        }
        if i >= 2 {
            h = h.min(xs[i - 1] - xs[i - 2]);
        }
        h
    }

    /// Reads `t,chi` or `omega,re_chi,im_chi` CSV.
    pub fn from_csv<R: Read>(reader: R, out_of_range: OutOfRange) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.to_string()).collect();
        let cols: Vec<&str> = headers.iter().map(String::as_str).collect();
        let width = match cols.as_slice() {
            ["t", "chi"] => 2,
            ["omega", "re_chi", "im_chi"] => 3,
            _ => {
                return Err(Error::Parse(format!(
                    "expected header `t,chi` or `omega,re_chi,im_chi`, found `{}`",
                    headers.join(",")
                )))
            }
        };
        let mut columns = vec![Vec::new(); width];
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != width {
                return Err(Error::Parse(format!(
                    "row {} has {} fields, expected {width}",
                    line + 2,
                    record.len()
                )));
            }
            for (col, field) in columns.iter_mut().zip(record.iter()) {
                let v: f64 = field.parse().map_err(|_| {
                    Error::Parse(format!("row {}: `{field}` is not a number", line + 2))
                })?;
                col.push(v);
            }
        }
        let data = if width == 2 {
            let chi = columns.pop().unwrap_or_default();
            let t = columns.pop().unwrap_or_default();
            TabulatedData::Time { t, chi }
        } else {
            let im_chi = columns.pop().unwrap_or_default();
            let re_chi = columns.pop().unwrap_or_default();
            let omega = columns.pop().unwrap_or_default();
            TabulatedData::Frequency {
                omega,
                re_chi,
                im_chi,
            }
        };
        Tabulated::new(data, out_of_range)
    }
}

/// `∫ χ(t) e^{κt} dt` over the interpolant, zero outside the samples.
fn segment_transform(ts: &[f64], chi: &[f64], kappa: Complex64) -> Complex64 {
    ts.windows(2)
        .zip(chi.windows(2))
        .map(|(t, y)| {
            linear_segment_exp(
                t[0],
                t[1],
                Complex64::new(y[0], 0.0),
                Complex64::new(y[1], 0.0),
                kappa,
            )
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> Tabulated {
        Tabulated::new(
            TabulatedData::Time {
                t: vec![0.0, 1.0, 2.0],
                chi: vec![0.0, 1.0, 0.0],
            },
            OutOfRange::Error,
        )
        .unwrap()
    }

    #[test]
    fn interpolates_and_refuses_outside() {
        let tab = ramp();
        assert_eq!(tab.time(0.5).unwrap().value, 0.5);
        assert_eq!(tab.time(-1.0).unwrap().value, 0.0);
        assert!(matches!(tab.time(3.0), Err(Error::OutOfRange { .. })));
        let lenient = Tabulated {
            out_of_range: OutOfRange::Zero,
            ..tab
        };
        let v = lenient.time(3.0).unwrap();
        assert!(v.extrapolated && v.value == 0.0);
    }

    #[test]
    fn tent_transforms() {
        let tab = ramp();
        // ∫ tent(t) sin t dt = 2 sin 1 - sin 2
        let im = tab.freq(1.0).unwrap().value.im;
        assert!((im - (2.0 * 1f64.sin() - 2f64.sin())).abs() < 1e-14);
        // ∫ tent e^{-st} at s=1: (1 - e^{-1})^2
        let l = tab.laplace(Complex64::new(1.0, 0.0)).unwrap();
        let e = (1.0 - (-1f64).exp()).powi(2);
        assert!((l.re - e).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_monotone_axis() {
        let r = Tabulated::new(
            TabulatedData::Time {
                t: vec![0.0, 2.0, 1.0],
                chi: vec![0.0; 3],
            },
            OutOfRange::Zero,
        );
        assert!(r.is_err());
    }

    #[test]
    fn parses_both_csv_layouts() {
        let t = Tabulated::from_csv("t,chi\n0,0\n1,2\n".as_bytes(), OutOfRange::Zero).unwrap();
        assert!(matches!(t.data, TabulatedData::Time { .. }));
        let f = Tabulated::from_csv(
            "omega,re_chi,im_chi\n0.5,1,0.1\n1.0,0.5,0.2\n".as_bytes(),
            OutOfRange::Zero,
        )
        .unwrap();
        let v = f.freq(-0.75).unwrap().value;
        assert!((v.re - 0.75).abs() < 1e-15 && (v.im + 0.15).abs() < 1e-15);
        assert!(Tabulated::from_csv("x,y\n1,2\n".as_bytes(), OutOfRange::Zero).is_err());
        assert!(Tabulated::from_csv("t,chi\n0,a\n1,2\n".as_bytes(), OutOfRange::Zero).is_err());
    }

    #[test]
    fn synthesis_of_lorentzian_line() {
        // (2/π) ∫ ω/(1+ω²) sin ωt dω = e^{-t}
        let omegas: Vec<f64> = (1..=200_000).map(|i| i as f64 * 0.005).collect();
        let ys: Vec<f64> = omegas.iter().map(|w| w / (1.0 + w * w)).collect();
        let s = sine_synthesis(&omegas, &ys, 1.0);
        assert!((s.value - (-1f64).exp()).abs() < 1e-3 + s.tail, "{s:?}");
    }
}
