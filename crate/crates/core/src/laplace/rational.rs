//! Exact inversion of strictly proper rational images by residues.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::poly::Poly;

/// `N(s) / D(s)` with `deg N < deg D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalImage {
    num: Poly,
    den: Poly,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl RationalImage {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        let Some(dd) = den.degree() else {
            return Err(Error::InvalidParameter("denominator is identically zero".into()));
        };
        if let Some(nd) = num.degree() {
            if nd >= dd {
                return Err(Error::NotStrictlyProper {
                    numerator: nd,
                    denominator: dd,
                });
            }
        }
        let (mut num, mut den) = (num, den);
        // Cancel exact common powers of s.
        while !num.is_zero() && num.coeffs()[0] == zero() && den.coeffs()[0] == zero() {
            num = Poly::new(num.coeffs()[1..].to_vec());
            den = Poly::new(den.coeffs()[1..].to_vec());
        }
        Ok(RationalImage { num, den })
    }

    pub fn from_real(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Poly::from_real(num), Poly::from_real(den))
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval(s) / self.den.eval(s)
    }

    /// `α F + β G` over the common denominator.
    pub fn combine(&self, alpha: Complex64, other: &RationalImage, beta: Complex64) -> Result<Self> {
        let num = self
            .num
            .mul(&other.den)
            .scale(alpha)
            .add(&other.num.mul(&self.den).scale(beta));
        Self::new(num, self.den.mul(&other.den))
    }

    /// `lim_{s→∞} s F(s)`, the value of the inverse at `t = 0⁺`.
    pub fn initial_value(&self) -> Complex64 {
        match (self.num.degree(), self.den.degree()) {
            (Some(n), Some(d)) if n + 1 == d => self.num.leading() / self.den.leading(),
            _ => zero(),
        }
    }

    /// Pole/residue decomposition of the inverse transform.
    pub fn expansion(&self) -> Result<ResidueExpansion> {
        ResidueExpansion::new(self)
    }
}

/// Contribution `e^{pt} Σ_j c_j t^j` of one (possibly repeated) pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleTerm {
    pub pole: Complex64,
    pub multiplicity: usize,
    /// Polynomial coefficients in `t`, ascending.
    pub coefficients: Vec<Complex64>,
    /// Condition estimate of the pole location.
    pub condition: f64,
    /// Residual of the characteristic polynomial at the pole.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueExpansion {
    pub terms: Vec<PoleTerm>,
}

/// Largest spread of a cluster of `m` computed roots that is still read as
/// one pole of multiplicity `m`.
///
/// Eigenvalue solvers split an `m`-fold root by about `ε^{1/m}·|p|`, so a
/// fixed `1e-8` would leave genuine double poles unmerged. Multiplicities
/// above three are not recognised.
pub fn merge_tolerance(pole: Complex64, m: usize) -> f64 {
    let rel = match m {
        0 | 1 => 0.0,
        2 => 2e-7,
        3 => 5e-5,
        _ => return 0.0,
    };
    1e-8_f64.max(rel * pole.norm().max(1.0))
}

type Root = crate::numerics::poly::Root;

/// Single-linkage groups of roots closer than `radius(p)`.
fn link(roots: Vec<Root>, radius: impl Fn(Complex64) -> f64) -> Vec<Vec<Root>> {
    let mut groups: Vec<Vec<Root>> = Vec::new();
    for r in roots {
        let hits: Vec<usize> = (0..groups.len())
            .filter(|&g| groups[g].iter().any(|x| (x.value - r.value).norm() <= radius(r.value)))
            .collect();
        let mut merged = vec![r];
        for &g in hits.iter().rev() {
            merged.extend(groups.remove(g));
        }
        groups.push(merged);
    }
    groups
}

fn spread(c: &[Root]) -> f64 {
    c.iter()
        .flat_map(|a| c.iter().map(move |b| (a.value - b.value).norm()))
        .fold(0.0, f64::max)
}

fn mean(c: &[Root]) -> Complex64 {
    c.iter().map(|r| r.value).sum::<Complex64>() / c.len() as f64
}

/// Groups computed roots into poles with multiplicities.
fn cluster(roots: Vec<Root>) -> Vec<Vec<Root>> {
    let mut out = Vec::new();
    for group in link(roots, |p| merge_tolerance(p, 3)) {
        if group.len() == 1 || spread(&group) <= merge_tolerance(mean(&group), group.len()) {
            out.push(group);
            continue;
        }
        for sub in link(group, |p| merge_tolerance(p, 2)) {
            if sub.len() == 1 || spread(&sub) <= merge_tolerance(mean(&sub), sub.len()) {
                out.push(sub);
            } else {
                out.extend(sub.into_iter().map(|r| vec![r]));
            }
        }
    }
    out
}

/// Truncated power-series quotient `a / b`, `b[0] ≠ 0`.
fn series_div(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let mut c = vec![zero(); n];
    for k in 0..n {
        let mut acc = a[k];
        for j in 1..=k.min(b.len() - 1) {
            acc -= b[j] * c[k - j];
        }
        c[k] = acc / b[0];
    }
    c
}

fn series_mul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut c = vec![zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        for (j, y) in b.iter().enumerate().take(n - i) {
            c[i + j] += x * y;
        }
    }
    c
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl ResidueExpansion {
    fn new(image: &RationalImage) -> Result<Self> {
        if image.num.is_zero() {
            return Ok(ResidueExpansion { terms: Vec::new() });
        }
        let roots = image.den.roots()?;
        let clusters = cluster(roots);
        let poles: Vec<(Complex64, usize, f64, f64)> = clusters
            .iter()
            .map(|c| {
                let cond = c.iter().map(|r| r.condition).fold(0.0, f64::max);
                let res = c.iter().map(|r| r.residual).fold(0.0, f64::max);
                (mean(c), c.len(), cond, res)
            })
            .collect();
        let lead = image.den.leading();
        let mut terms = Vec::with_capacity(poles.len());
        for (i, &(p, m, condition, residual)) in poles.iter().enumerate() {
            // G(s) = N(s) / (lead · Π_{q≠p} (s - q)^{m_q}) expanded around p.
            let mut num_series = image.num.taylor_at(p);
            num_series.resize(m.max(num_series.len()), zero());
            num_series.truncate(m);
            let mut den_series = vec![zero(); m];
            den_series[0] = lead;
            for (j, &(q, mq, _, _)) in poles.iter().enumerate() {
                if i == j {
                    continue;
                }
                let factor = Poly::linear_factor(q);
                let mut pw = Poly::constant(Complex64::new(1.0, 0.0));
                for _ in 0..mq {
                    pw = pw.mul(&factor);
                }
                den_series = series_mul(&den_series, &pw.taylor_at(p), m);
            }
            if den_series[0].norm() == 0.0 {
                return Err(Error::RootFinding {
                    message: "distinct poles collapsed onto each other".into(),
                    condition,
                });
            }
            let g = series_div(&num_series, &den_series);
            // Residue of G(s) e^{st}/(s-p)^m: Σ_k g_k t^{m-1-k}/(m-1-k)!.
            let mut coefficients = vec![zero(); m];
            for (k, gk) in g.iter().enumerate() {
                let j = m - 1 - k;
                coefficients[j] = gk / factorial(j);
            }
            terms.push(PoleTerm {
                pole: p,
                multiplicity: m,
                coefficients,
                condition,
                residual,
            });
        }
        terms.sort_by(|a, b| {
            a.pole
                .re
                .total_cmp(&b.pole.re)
                .then(a.pole.im.total_cmp(&b.pole.im))
        });
        Ok(ResidueExpansion { terms })
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| {
                let poly = term
                    .coefficients
                    .iter()
                    .rev()
                    .fold(zero(), |acc, &c| acc * t + c);
                (term.pole * t).exp() * poly
            })
            .sum()
    }

    /// Time derivative of [`eval`](Self::eval).
    pub fn derivative(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| {
                let c = &term.coefficients;
                let poly = c.iter().rev().fold(zero(), |acc, &x| acc * t + x);
                let dpoly = c
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(zero(), |acc, (j, &x)| acc * t + x * j as f64);
                (term.pole * t).exp() * (term.pole * poly + dpoly)
            })
            .sum()
    }

    /// Part of the inverse carried by poles in `keep`.
    pub fn restricted<P: Fn(Complex64) -> bool>(&self, keep: P) -> ResidueExpansion {
        ResidueExpansion {
            terms: self.terms.iter().filter(|t| keep(t.pole)).cloned().collect(),
        }
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.terms.iter().map(|t| t.pole).collect()
    }

    pub fn max_condition(&self) -> f64 {
        self.terms.iter().map(|t| t.condition).fold(0.0, f64::max)
    }
}

/// `L⁻¹{F}(t)` as the sum of residues of `F(s) e^{st}`.
pub fn invert_rational(image: &RationalImage, t: f64) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inversion time must be non-negative, got {t}"
        )));
    }
    Ok(image.expansion()?.eval(t))
}
