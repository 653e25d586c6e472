//! Numerical inversion along fixed contours.
//!
//! The default is the de Hoog–Knight–Stokes scheme: the Bromwich integral
//! is discretised by the trapezoid rule on `Re s = γ` and the resulting
//! Fourier series is summed by a quotient-difference continued fraction.
//! One set of image samples serves every time in a window `[t/10, t]`, so
//! grids are split into decades. Complex-valued originals need both the
//! positive- and negative-frequency halves of the series; each half gets
//! its own continued fraction. A fixed Talbot contour is also available.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplace::rational::RationalImage;
use crate::numerics::accel::richardson;
use crate::numerics::dd::CDd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourMethod {
    DeHoog,
    Talbot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourParams {
    pub method: ContourMethod,
    /// de Hoog: number of continued-fraction levels (2M+1 samples per
    /// half-line). Talbot: number of contour nodes.
    pub nodes: usize,
    /// de Hoog: half-period `T = scale · t_max` of the window.
    pub scale: f64,
    /// Target accuracy; sets the distance of the Bromwich line.
    pub tolerance: f64,
    /// Abscissa of convergence of the image (rightmost singularity).
    pub abscissa: f64,
    /// Optional `(t_min, t_max)` the caller intends to evaluate. de Hoog
    /// windows are anchored at `t_max`, so a time gets the same value
    /// whether it is inverted alone or as part of a grid.
    pub time_range: Option<(f64, f64)>,
    /// Largest oscillation frequency expected in the original. de Hoog
    /// windows add enough samples to reach past it.
    pub bandwidth: f64,
}

impl Default for ContourParams {
    fn default() -> Self {
        ContourParams {
            method: ContourMethod::DeHoog,
            nodes: 32,
            scale: 1.25,
            tolerance: 1e-12,
            abscissa: 0.0,
            time_range: None,
            bandwidth: 0.0,
        }
    }
}

impl ContourParams {
    pub fn talbot(nodes: usize) -> Self {
        ContourParams {
            method: ContourMethod::Talbot,
            nodes,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(Error::InvalidParameter(format!(
                "contour needs at least 8 nodes, got {}",
                self.nodes
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "contour scale must be positive, got {}",
                self.scale
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "contour tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if !(self.bandwidth >= 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "contour bandwidth must be finite and non-negative, got {}",
                self.bandwidth
            )));
        }
        Ok(())
    }

    /// de Hoog levels used for a window of half-period `period`.
    fn levels(&self, period: f64) -> usize {
        self.nodes + (period * self.bandwidth / std::f64::consts::PI).ceil() as usize
    }
}

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Samples of one half of the Bromwich series and its continued fraction.
///
/// The quotient-difference table loses digits quickly in double precision
/// once `M` reaches a few dozen, so it is built in double-double.
struct HalfSeries {
    d: Vec<CDd>,
}

impl HalfSeries {
    /// `a[0]` must already carry the factor 1/2.
    fn new(a: &[Complex64], m: usize) -> Result<Self> {
        let n = 2 * m;
        let a: Vec<CDd> = a.iter().map(|&x| CDd::from_c64(x)).collect();
        let mut e_prev = vec![CDd::ZERO; n + 1];
        let mut q: Vec<CDd> = (0..n).map(|i| a[i + 1].div(a[i])).collect();
        let mut d = vec![CDd::ZERO; n + 1];
        d[0] = a[0];
        for r in 1..=m {
            let len = n - 2 * r + 1;
            let e: Vec<CDd> = (0..len).map(|i| q[i + 1].sub(q[i]).add(e_prev[i + 1])).collect();
            d[2 * r - 1] = q[0].neg();
            d[2 * r] = e[0].neg();
            if r < m {
                q = (0..len - 1).map(|i| q[i + 1].mul(e[i + 1]).div(e[i])).collect();
            }
            e_prev = e;
        }
        if d.iter().any(|z| !z.is_finite()) {
            return Err(Error::Divergence(
                "quotient-difference table broke down (non-finite coefficients)".into(),
            ));
        }
        Ok(HalfSeries { d })
    }

    /// Continued-fraction sum of `Σ a_k z^k`.
    fn sum(&self, z: Complex64) -> Complex64 {
        let d = &self.d;
        let n = d.len() - 1;
        let zz = CDd::from_c64(z);
        let one = CDd::from_c64(cz(1.0, 0.0));
        let (mut a_prev, mut a_cur) = (CDd::ZERO, d[0]);
        let (mut b_prev, mut b_cur) = (one, one);
        for &dk in d.iter().take(n).skip(1) {
            let dz = dk.mul(zz);
            let a_next = a_cur.add(dz.mul(a_prev));
            let b_next = b_cur.add(dz.mul(b_prev));
            a_prev = a_cur;
            a_cur = a_next;
            b_prev = b_cur;
            b_cur = b_next;
            // Rescale by a power of two to keep the recurrence in range.
            let s = b_cur.to_c64().norm();
            if s > 1e100 || (s < 1e-100 && s > 0.0) {
                let k = CDd::from_c64(cz(2f64.powi(-s.log2().round() as i32), 0.0));
                a_prev = a_prev.mul(k);
                a_cur = a_cur.mul(k);
                b_prev = b_prev.mul(k);
                b_cur = b_cur.mul(k);
            }
        }
        let (dl, dn) = (d[n - 1].to_c64(), d[n].to_c64());
        let h = (cz(1.0, 0.0) + (dl - dn) * z) * 0.5;
        let rem = if h.norm() == 0.0 {
            cz(0.0, 0.0)
        } else {
            -h * (cz(1.0, 0.0) - (cz(1.0, 0.0) + dn * z / (h * h)).sqrt())
        };
        let rem = CDd::from_c64(rem);
        let a = a_cur.add(rem.mul(a_prev));
        let b = b_cur.add(rem.mul(b_prev));
        a.div(b).to_c64()
    }
}

/// de Hoog data for one time window.
struct DeHoogWindow {
    gamma: f64,
    period: f64,
    plus: HalfSeries,
    minus: HalfSeries,
}

impl DeHoogWindow {
    fn new<F>(image: &F, t_max: f64, params: &ContourParams) -> Result<Self>
    where
        F: Fn(Complex64) -> Result<Complex64>,
    {
        let period = params.scale * t_max;
        let m = params.levels(period);
        let gamma = params.abscissa - params.tolerance.ln() / (2.0 * period);
        let step = std::f64::consts::PI / period;
        let f0 = image(cz(gamma, 0.0))?;
        let mut plus = Vec::with_capacity(2 * m + 1);
        let mut minus = Vec::with_capacity(2 * m + 1);
        plus.push(f0 * 0.5);
        minus.push(f0 * 0.5);
        for k in 1..=2 * m {
            let y = k as f64 * step;
            plus.push(image(cz(gamma, y))?);
            minus.push(image(cz(gamma, -y))?);
        }
        for v in plus.iter().chain(&minus) {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Divergence("image is not finite on the contour".into()));
            }
        }
        let decay = |xs: &[Complex64]| xs[2 * m].norm() <= 2.0 * xs[1].norm().max(f64::MIN_POSITIVE);
        if !(decay(&plus) && decay(&minus)) {
            return Err(Error::Divergence("image does not decay along the contour".into()));
        }
        Ok(DeHoogWindow {
            gamma,
            period,
            plus: HalfSeries::new(&plus, m)?,
            minus: HalfSeries::new(&minus, m)?,
        })
    }

    fn eval(&self, t: f64) -> Complex64 {
        let phase = std::f64::consts::PI * t / self.period;
        let zp = Complex64::from_polar(1.0, phase);
        let zm = zp.conj();
        let s = self.plus.sum(zp) + self.minus.sum(zm);
        s * ((self.gamma * t).exp() / (2.0 * self.period))
    }
}

fn talbot<F>(image: &F, t: f64, m: usize) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let r = 2.0 * m as f64 / (5.0 * t);
    let mut acc = image(cz(r, 0.0))? * (r * t).exp();
    for k in 1..m {
        let theta = k as f64 * std::f64::consts::PI / m as f64;
        let cot = 1.0 / theta.tan();
        let s = cz(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let w = cz(1.0, sigma);
        for (sk, wk) in [(s, w), (s.conj(), w.conj())] {
            let f = image(sk)?;
            if !(f.re.is_finite() && f.im.is_finite()) {
                return Err(Error::Divergence("image is not finite on the contour".into()));
            }
            acc += f * (sk * t).exp() * wk;
        }
    }
    Ok(acc * (r / (2.0 * m as f64)))
}

/// `f(0⁺) = lim s F(s)`, extrapolated from three large real `s`.
pub fn initial_value<F>(image: &F) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let radius = 1e7;
    let vals = [radius, 10.0 * radius, 100.0 * radius]
        .iter()
        .map(|&r| image(cz(r, 0.0)).map(|f| f * r))
        .collect::<Result<Vec<_>>>()?;
    Ok(richardson(&vals, 10.0, 1.0))
}

/// Single-time inversion of `image` along the configured contour.
pub fn invert_contour<F>(image: &F, t: f64, params: &ContourParams) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    Ok(invert_contour_grid(image, &[t], params)?[0])
}

/// Inversion over a time grid; de Hoog windows are shared per decade.
/// `t = 0` uses the initial-value theorem.
pub fn invert_contour_grid<F>(image: &F, times: &[f64], params: &ContourParams) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    params.validate()?;
    if let Some(&bad) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "inversion times must be finite and non-negative, got {bad}"
        )));
    }
    let mut out = vec![cz(0.0, 0.0); times.len()];
    if times.iter().any(|&t| t == 0.0) {
        let v0 = initial_value(image)?;
        for (o, &t) in out.iter_mut().zip(times) {
            if t == 0.0 {
                *o = v0;
            }
        }
    }
    match params.method {
        ContourMethod::Talbot => {
            for (o, &t) in out.iter_mut().zip(times) {
                if t > 0.0 {
                    *o = talbot(image, t, params.nodes)?;
                }
            }
        }
        ContourMethod::DeHoog => {
            let positive: Vec<usize> = (0..times.len()).filter(|&i| times[i] > 0.0).collect();
            let latest = positive.iter().map(|&i| times[i]).fold(0.0, f64::max);
            let anchor = match params.time_range {
                Some((_, hi)) => {
                    if latest > hi {
                        return Err(Error::InvalidParameter(format!(
                            "time {latest} lies beyond the declared range end {hi}"
                        )));
                    }
                    hi
                }
                None => latest,
            };
            // Window k serves (anchor/10^{k+1}, anchor/10^k].
            let mut windows: std::collections::BTreeMap<i32, Vec<usize>> = Default::default();
            for &i in &positive {
                let mut k = (anchor / times[i]).log10().floor() as i32;
                while k > 0 && times[i] > anchor * 10f64.powi(-k) {
                    k -= 1;
                }
                windows.entry(k.max(0)).or_default().push(i);
            }
            for (k, members) in windows {
                let window = DeHoogWindow::new(image, anchor * 10f64.powi(-k), params)?;
                for i in members {
                    out[i] = window.eval(times[i]);
                }
            }
        }
    }
    if out.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Divergence("inversion produced non-finite values".into()));
    }
    Ok(out)
}

/// Contour inversion of a rational image, refused for poles on (or to the
/// right of) the imaginary axis where a fixed contour cannot converge.
pub fn invert_contour_rational(
    image: &RationalImage,
    times: &[f64],
    params: &ContourParams,
) -> Result<Vec<Complex64>> {
    let expansion = image.expansion()?;
    for p in expansion.poles() {
        if p.re >= params.abscissa - 1e-10 * p.norm().max(1.0) {
            return Err(Error::ImaginaryAxisPole { pole: p });
        }
    }
    invert_contour_grid(&|s| Ok(image.eval(s)), times, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_image(s: Complex64) -> Result<Complex64> {
        Ok(1.0 / (s + 1.0))
    }

    #[test]
    fn decaying_exponential() {
        let v = invert_contour(&exp_image, 1.0, &ContourParams::default()).unwrap();
        assert!((v - cz((-1f64).exp(), 0.0)).norm() < 1e-10, "{v}");
        let t = invert_contour(&exp_image, 1.0, &ContourParams::talbot(32)).unwrap();
        assert!((t - cz((-1f64).exp(), 0.0)).norm() < 1e-10, "{t}");
    }

    #[test]
    fn oscillatory_image_on_axis() {
        let v = invert_contour(&|s: Complex64| Ok(1.0 / (s * s + 1.0)), std::f64::consts::FRAC_PI_2, &ContourParams::default())
            .unwrap();
        assert!((v - cz(1.0, 0.0)).norm() < 1e-6, "{v}");
    }

    #[test]
    fn ramp_from_box_image() {
        // (1 - e^{-s}) / s² -> min(t, 1)
        let img = |s: Complex64| Ok((1.0 - (-s).exp()) / (s * s));
        let v = invert_contour(&img, 0.5, &ContourParams::default()).unwrap();
        assert!((v - cz(0.5, 0.0)).norm() < 1e-8, "{v}");
    }

    #[test]
    fn complex_original() {
        // 1/(s + 0.3 + 2i) -> e^{-(0.3 + 2i) t}
        let p = cz(-0.3, -2.0);
        let img = move |s: Complex64| Ok(1.0 / (s - p));
        let times: Vec<f64> = (0..=200).map(|k| k as f64 * 0.1).collect();
        let params = ContourParams {
            bandwidth: 2.0,
            ..Default::default()
        };
        let vals = invert_contour_grid(&img, &times, &params).unwrap();
        for (&t, v) in times.iter().zip(&vals) {
            assert!((v - (p * t).exp()).norm() < 1e-9, "t = {t}: {v}");
        }
        let alone = invert_contour(&img, times[3], &ContourParams { time_range: Some((0.0, 20.0)), ..params }).unwrap();
        assert_eq!(alone, vals[3]);
    }

    #[test]
    fn refuses_axis_poles_for_rational_images() {
        let f = RationalImage::from_real(&[1.0], &[1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            invert_contour_rational(&f, &[1.0], &ContourParams::default()),
            Err(Error::ImaginaryAxisPole { .. })
        ));
    }

    #[test]
    fn non_decaying_image_is_rejected() {
        let r = invert_contour(&|s: Complex64| Ok(s), 1.0, &ContourParams::default());
        assert!(matches!(r, Err(Error::Divergence(_))));
    }
}
