//! Named operator models, referenced by name from spec files.
//!
//! Syntax: `name(arg, key=value, ...)`, e.g. `log_kernel(p0=1)`,
//! `homog0(dipole)`, `graded_norm_power(-4)`, `bessel_potential(-2, 3)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::graded::{surface_area, Grading, QuasiNorm};
use crate::quadrature::{gauss_legendre, integrate_panels, uniform_breaks};
use crate::residue::OperatorModel;
use crate::special::{bessel_potential_kernel, critical_bessel_kernel, critical_constant};
use crate::symbols::{bessel_potential_expansion, CutoffFunction, HomogeneousTerm, KernelExpansion, PolySymbol, PseudoHomogeneousTerm, TermFn};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Base-point coefficient of a log kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    /// exp(1 − 1/(1 − |x|²/R²)) scaled to unit integral over ℝ^dim.
    Bump(f64),
}

impl Coefficient {
    pub fn evaluator(&self, dim: usize) -> Result<Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>> {
        match *self {
            Coefficient::Constant(c) => Ok(Arc::new(move |_| c)),
            Coefficient::Bump(r) => {
                if !(r > 0.0) {
                    return Err(Error::invalid(format!("bump radius must be positive, got {r}")));
                }
                let mass = bump_mass(dim, r)?;
                Ok(Arc::new(move |x: &[f64]| {
                    let q = x.iter().map(|v| v * v).sum::<f64>() / (r * r);
                    if q < 1.0 {
                        (1.0 - 1.0 / (1.0 - q)).exp() / mass
                    } else {
                        0.0
                    }
                }))
            }
        }
    }
}

/// ∫_{ℝ^d} exp(1 − 1/(1 − |x|²/R²)) dx.
pub fn bump_mass(d: usize, r: f64) -> Result<f64> {
    let rule = gauss_legendre(32);
    let radial = integrate_panels(&uniform_breaks(0.0, 1.0, 1.0 / 32.0), &rule, |t| {
        if t >= 1.0 {
            0.0
        } else {
            t.powi(d as i32 - 1) * (1.0 - 1.0 / (1.0 - t * t)).exp()
        }
    });
    Ok(surface_area(d)? * r.powi(d as i32) * radial)
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "{c}"),
            Coefficient::Bump(r) => write!(f, "bump({r})"),
        }
    }
}

/// Angular profile of a degree-0 kernel, a sum of harmonic pieces P_k(z)/|z|^k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Dipole,
    Quadrupole,
    Mixed,
}

#[derive(Debug, Clone, Copy)]
enum Harmonic {
    One,
    X1,
    X1sqMinusX2sq,
    X1X2,
}

impl Harmonic {
    fn degree(self) -> i32 {
        match self {
            Harmonic::One => 0,
            Harmonic::X1 => 1,
            _ => 2,
        }
    }

    fn eval(self, z: &[f64]) -> f64 {
        match self {
            Harmonic::One => 1.0,
            Harmonic::X1 => z[0],
            Harmonic::X1sqMinusX2sq => z[0] * z[0] - z[1] * z[1],
            Harmonic::X1X2 => z[0] * z[1],
        }
    }
}

impl Profile {
    fn pieces(self, d: usize) -> Vec<(f64, Harmonic)> {
        use Harmonic::*;
        match (self, d) {
            (Profile::Dipole, _) => vec![(1.0, X1)],
            (Profile::Quadrupole, 1) => vec![(0.5, One), (0.5, X1)],
            (Profile::Quadrupole, _) => vec![(1.0, X1sqMinusX2sq)],
            (Profile::Mixed, 1) => vec![(0.7, One), (-0.4, X1)],
            (Profile::Mixed, _) => vec![(0.7, One), (1.0, X1), (0.5, X1X2)],
        }
    }

    /// f0(z) on ℝ^d \ {0}.
    pub fn kernel(self, d: usize) -> impl Fn(&[f64]) -> f64 + Send + Sync + Clone {
        let pieces = self.pieces(d);
        move |z: &[f64]| {
            let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            pieces.iter().map(|(c, h)| c * h.eval(z) / r.powi(h.degree())).sum()
        }
    }

    /// The degree −d part of the Fourier transform of f0, in closed form.
    pub fn symbol(self, d: usize) -> impl Fn(&[f64]) -> Complex64 + Send + Sync + Clone {
        let dd = d as f64;
        let pieces: Vec<(Complex64, Harmonic)> = self
            .pieces(d)
            .into_iter()
            .filter(|(_, h)| h.degree() > 0)
            .map(|(c, h)| {
                let k = h.degree();
                let kf = k as f64;
                let scale = (2.0 * PI).powf(dd) * gamma((kf + dd) / 2.0) / (PI.powf(dd / 2.0) * gamma(kf / 2.0));
                (Complex64::new(0.0, -1.0).powi(k) * c * scale, h)
            })
            .collect();
        move |xi: &[f64]| {
            let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            pieces
                .iter()
                .map(|(c, h)| c * h.eval(xi) / r.powi(h.degree() + d as i32))
                .sum()
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Dipole => "dipole",
            Profile::Quadrupole => "quadrupole",
            Profile::Mixed => "mixed",
        })
    }
}

/// A catalog entry with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CatalogTerm {
    LogKernel { p0: Coefficient },
    Homog0 { profile: Profile },
    NormPower { m: i32 },
    GradedNormPower { m: i32 },
    BesselPotential { m: i32, terms: usize },
    Gaussian,
}

impl fmt::Display for CatalogTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogTerm::LogKernel { p0 } => write!(f, "log_kernel(p0={p0})"),
            CatalogTerm::Homog0 { profile } => write!(f, "homog0({profile})"),
            CatalogTerm::NormPower { m } => write!(f, "norm_power({m})"),
            CatalogTerm::GradedNormPower { m } => write!(f, "graded_norm_power({m})"),
            CatalogTerm::BesselPotential { m, terms } => write!(f, "bessel_potential({m},{terms})"),
            CatalogTerm::Gaussian => write!(f, "gaussian"),
        }
    }
}

impl From<CatalogTerm> for String {
    fn from(t: CatalogTerm) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for CatalogTerm {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn split_args(body: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for c in body.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

struct Args<'a> {
    term: &'a str,
    items: Vec<(Option<String>, String)>,
}

impl Args<'_> {
    fn get(&self, pos: usize, key: &str) -> Option<&str> {
        self.items
            .iter()
            .find(|(k, _)| k.as_deref() == Some(key))
            .or_else(|| self.items.iter().filter(|(k, _)| k.is_none()).nth(pos))
            .map(|(_, v)| v.as_str())
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            context: self.term.to_string(),
            message: msg.into(),
        }
    }

    fn int(&self, pos: usize, key: &str) -> Result<i32> {
        let v = self.get(pos, key).ok_or_else(|| self.err(format!("missing argument `{key}`")))?;
        v.parse().map_err(|_| self.err(format!("`{key}` must be an integer, got `{v}`")))
    }
}

impl FromStr for CatalogTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().replace('−', "-");
        let (name, body) = match s.find('(') {
            Some(i) => {
                if !s.ends_with(')') {
                    return Err(Error::Parse {
                        context: s.clone(),
                        message: "unbalanced parentheses".into(),
                    });
                }
                (s[..i].trim(), &s[i + 1..s.len() - 1])
            }
            None => (s.as_str(), ""),
        };
        let items = split_args(body)
            .into_iter()
            .map(|a| match a.split_once('=') {
                Some((k, v)) => (Some(k.trim().to_string()), v.trim().to_string()),
                None => (None, a),
            })
            .collect();
        let args = Args { term: &s, items };
        match name {
            "log_kernel" => {
                let raw = args.get(0, "p0").unwrap_or("1");
                let p0 = if let Ok(c) = raw.parse::<f64>() {
                    Coefficient::Constant(c)
                } else if raw == "bump" {
                    Coefficient::Bump(1.0)
                } else if let Some(r) = raw.strip_prefix("bump(").and_then(|r| r.strip_suffix(')')) {
                    Coefficient::Bump(r.trim().parse().map_err(|_| args.err(format!("bad bump radius `{r}`")))?)
                } else {
                    return Err(args.err(format!("p0 must be a number or bump(R), got `{raw}`")));
                };
                Ok(CatalogTerm::LogKernel { p0 })
            }
            "homog0" => {
                let raw = args.get(0, "profile").or_else(|| args.get(0, "Ω")).unwrap_or("dipole");
                let profile = match raw {
                    "dipole" => Profile::Dipole,
                    "quadrupole" => Profile::Quadrupole,
                    "mixed" => Profile::Mixed,
                    other => return Err(args.err(format!("unknown profile `{other}`"))),
                };
                Ok(CatalogTerm::Homog0 { profile })
            }
            "norm_power" => Ok(CatalogTerm::NormPower { m: args.int(0, "m")? }),
            "graded_norm_power" => Ok(CatalogTerm::GradedNormPower { m: args.int(0, "m")? }),
            "bessel_potential" => {
                let m = args.int(0, "m")?;
                let terms = match args.get(1, "J") {
                    Some(_) => args.int(1, "J")?,
                    None => 3,
                };
                if terms < 1 {
                    return Err(args.err("J must be at least 1"));
                }
                Ok(CatalogTerm::BesselPotential { m, terms: terms as usize })
            }
            "gaussian" => Ok(CatalogTerm::Gaussian),
            other => Err(Error::UnknownTerm(other.to_string())),
        }
    }
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn constant_term(g: &Grading, degree: f64, label: &str, c: f64) -> HomogeneousTerm {
    HomogeneousTerm::new(g.clone(), degree, label, move |_, _| Complex64::new(c, 0.0))
}

fn require_trivial(g: &Grading, what: &CatalogTerm) -> Result<()> {
    if g.is_trivial() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} is only available on trivial gradings")))
    }
}

impl CatalogTerm {
    /// The operator model of this entry on `grading`.
    pub fn build(&self, grading: &Grading) -> Result<OperatorModel> {
        let g = grading.clone();
        let d = g.dim();
        let dh = g.homogeneous_dimension() as i32;
        let label = self.to_string();
        match *self {
            CatalogTerm::LogKernel { p0 } => {
                let p = p0.evaluator(d)?;
                let pk = p.clone();
                let p_term = HomogeneousTerm::new(g.clone(), 0.0, "p0", move |x, _| Complex64::new(pk(x), 0.0));
                let k0 = PseudoHomogeneousTerm::new(HomogeneousTerm::zero(g.clone(), 0.0), Some(p_term))?;
                let kernel = KernelExpansion::new(0, vec![k0], None)?;
                let symbol = if g.is_trivial() {
                    let c = (2.0 * PI).powi(d as i32) / surface_area(d)?;
                    let a = HomogeneousTerm::new(g.clone(), -(d as f64), "-p0*(2pi)^d/(omega_d|xi|^d)", move |x, xi| {
                        Complex64::new(-p(x) * c * euclid(xi).powi(-(d as i32)), 0.0)
                    });
                    Some(PolySymbol::new(-dh, vec![a])?)
                } else {
                    None
                };
                OperatorModel::new(label, g, -dh, symbol, Some(kernel))
            }
            CatalogTerm::Homog0 { profile } => {
                require_trivial(&g, self)?;
                let f0 = profile.kernel(d);
                let a = profile.symbol(d);
                let k0 = PseudoHomogeneousTerm::homogeneous(HomogeneousTerm::new(g.clone(), 0.0, profile.to_string(), move |_, z| {
                    Complex64::new(f0(z), 0.0)
                }));
                let kernel = KernelExpansion::new(0, vec![k0], None)?;
                let sym = HomogeneousTerm::new(g.clone(), -(d as f64), format!("ft[{profile}]"), move |_, xi| a(xi));
                OperatorModel::new(label, g, -dh, Some(PolySymbol::new(-dh, vec![sym])?), Some(kernel))
            }
            CatalogTerm::NormPower { m } | CatalogTerm::GradedNormPower { m } => {
                let graded = matches!(self, CatalogTerm::GradedNormPower { .. });
                let q = QuasiNorm::new(g.clone());
                let gg = g.clone();
                let norm: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = if graded {
                    Arc::new(move |xi| gg.gauge(xi))
                } else {
                    Arc::new(move |xi| q.norm(xi))
                };
                let sym = HomogeneousTerm::new(g.clone(), m as f64, label.clone(), move |_, xi| Complex64::new(norm(xi).powi(m), 0.0));
                let symbol = PolySymbol::new(m, vec![sym])?;
                let kernel = if g.is_trivial() { riesz_kernel(&g, m)? } else { None };
                OperatorModel::new(label, g, m, Some(symbol), kernel)
            }
            CatalogTerm::BesselPotential { m, terms } => {
                require_trivial(&g, self)?;
                let symbol = bessel_potential_expansion(m, d, terms)?;
                let kernel = if m == -(d as i32) {
                    let c = critical_constant(d)?;
                    let k0 = PseudoHomogeneousTerm::new(
                        constant_term(&g, 0.0, "c(log2-gamma)", c * (2f64.ln() - EULER_GAMMA)),
                        Some(constant_term(&g, 0.0, "-c", -c)),
                    )?;
                    let chi = CutoffFunction::new(0.5, 1.0, g.clone())?;
                    let k0r = k0.clone();
                    let rem: TermFn = Arc::new(move |x, z| {
                        let r = euclid(z);
                        let g = critical_bessel_kernel(d, r).unwrap_or(f64::NAN);
                        Complex64::new(g, 0.0) - k0r.eval_raw(x, z) * chi.eval(z)
                    });
                    KernelExpansion::new(0, vec![k0], Some(rem))?
                } else {
                    let alpha = -m as f64;
                    let rem: TermFn = Arc::new(move |_, z| Complex64::new(bessel_potential_kernel(alpha, d, euclid(z)).unwrap_or(f64::NAN), 0.0));
                    KernelExpansion::new(-m - d as i32, vec![], Some(rem))?
                };
                OperatorModel::new(label, g, m, Some(symbol), Some(kernel))
            }
            CatalogTerm::Gaussian => {
                let m = -dh - 1;
                let symbol = PolySymbol::new(m, vec![HomogeneousTerm::zero(g.clone(), m as f64)])?;
                let rem: TermFn = Arc::new(|_, z| Complex64::new((-z.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0));
                let kernel = KernelExpansion::new(1, vec![], Some(rem))?;
                OperatorModel::new(label, g, m, Some(symbol), Some(kernel))
            }
        }
    }
}

/// Kernel of |ξ|^m on ℝ^d: −c log|z| at m = −d, the Riesz kernel
/// c_m |z|^{−m−d} when −m−d is odd, and nothing otherwise.
fn riesz_kernel(g: &Grading, m: i32) -> Result<Option<KernelExpansion>> {
    let d = g.dim() as i32;
    if m == -d {
        let c = critical_constant(d as usize)?;
        let k0 = PseudoHomogeneousTerm::new(HomogeneousTerm::zero(g.clone(), 0.0), Some(constant_term(g, 0.0, "-c", -c)))?;
        return Ok(Some(KernelExpansion::new(0, vec![k0], None)?));
    }
    let kappa = -m - d;
    if kappa % 2 == 0 {
        return Ok(None);
    }
    let df = d as f64;
    let mf = m as f64;
    let c = (2.0 * PI).powi(-d) * 2f64.powf(mf + df) * PI.powf(df / 2.0) * gamma((mf + df) / 2.0) / gamma(-mf / 2.0);
    let term = HomogeneousTerm::new(g.clone(), kappa as f64, "riesz", move |_, z| Complex64::new(c * euclid(z).powi(kappa), 0.0));
    Ok(Some(KernelExpansion::new(kappa, vec![PseudoHomogeneousTerm::homogeneous(term)], None)?))
}
