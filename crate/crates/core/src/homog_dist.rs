//! Extensions of homogeneous functions across the origin, their dilation
//! cocycles, and the angular decomposition of Fourier transforms of
//! degree-0 homogeneous functions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::{sphere_quadrature, surface_area, Grading, QuasiNorm, SphereRule};
use crate::quadrature::{gauss_legendre, geometric_breaks, richardson, uniform_breaks, GaussRule};
use crate::symbols::{fourier_limit, CutoffFunction, FourierOptions, HomogeneousTerm};

/// Smooth compactly supported test function on ℝ^dim.
#[derive(Clone)]
pub struct TestFunction {
    dim: usize,
    support_radius: f64,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("dim", &self.dim)
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

impl TestFunction {
    /// `f` must vanish outside the Euclidean ball of radius `support_radius`.
    pub fn new<F>(dim: usize, support_radius: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(Error::invalid("support radius must be positive"));
        }
        Ok(TestFunction {
            dim,
            support_radius,
            f: Arc::new(f),
        })
    }

    /// exp(1 − 1/(1 − |v|²/R²)) inside the ball of radius R, with value 1 at 0.
    pub fn bump(dim: usize, radius: f64) -> Result<Self> {
        TestFunction::new(dim, radius, move |v| {
            let q = v.iter().map(|x| x * x).sum::<f64>() / (radius * radius);
            if q >= 1.0 {
                0.0
            } else {
                (1.0 - 1.0 / (1.0 - q)).exp()
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        (self.f)(v)
    }

    pub fn value_at_zero(&self) -> f64 {
        self.eval(&vec![0.0; self.dim])
    }

    /// φ∘δ_{1/s}.
    pub fn dilated(&self, grading: &Grading, s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::invalid("dilation factor must be positive"));
        }
        Error::check_dim(self.dim, grading.dim())?;
        let grow = grading
            .weights()
            .iter()
            .map(|&w| s.powi(w as i32))
            .fold(0.0, f64::max);
        let inner = self.f.clone();
        let g = grading.clone();
        TestFunction::new(self.dim, self.support_radius * grow, move |v| {
            inner(&g.dilate_unchecked(1.0 / s, v))
        })
    }

    /// Sampled check that the function vanishes outside its declared support.
    pub fn respects_support(&self, samples: usize, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples).all(|_| {
            let dir: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            let r = self.support_radius * rng.random_range(1.0..3.0);
            let v: Vec<f64> = dir.iter().map(|x| x * r / n).collect();
            self.eval(&v) == 0.0
        })
    }
}

/// A homogeneous function u of degree m ≥ −d_H extended across 0. In the
/// critical degree the extension is the canonical one,
/// ⟨u, φ⟩ = ∫_{|v|≤1} u (φ − φ(0)) dv + ∫_{|v|>1} u φ dv.
#[derive(Debug, Clone)]
pub struct ExtendedHomogeneousDistribution {
    u: HomogeneousTerm,
    x: Vec<f64>,
}

impl ExtendedHomogeneousDistribution {
    pub fn new(u: HomogeneousTerm, x: Vec<f64>) -> Result<Self> {
        let dh = u.grading().homogeneous_dimension() as f64;
        if u.degree() < -dh {
            return Err(Error::invalid(format!(
                "degree {} is below −d_H = {}; only the critical and integrable cases are extended",
                u.degree(),
                -dh
            )));
        }
        Ok(ExtendedHomogeneousDistribution { u, x })
    }

    pub fn term(&self) -> &HomogeneousTerm {
        &self.u
    }

    pub fn grading(&self) -> &Grading {
        self.u.grading()
    }

    pub fn is_critical(&self) -> bool {
        self.u.degree() == -(self.grading().homogeneous_dimension() as f64)
    }
}

/// Quadrature settings for pairings in graded polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingOptions {
    pub sphere_degree: usize,
    pub radial_panels: usize,
    pub radial_nodes: usize,
}

impl Default for PairingOptions {
    fn default() -> Self {
        PairingOptions {
            sphere_degree: 48,
            radial_panels: 16,
            radial_nodes: 20,
        }
    }
}

/// Smallest r with |δ_r ω|_E ≥ radius.
fn euclidean_exit(grading: &Grading, omega: &[f64], radius: f64) -> f64 {
    let size = |r: f64| {
        grading
            .dilate_unchecked(r, omega)
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    };
    let mut hi = radius.max(1.0);
    while size(hi) < radius {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if size(mid) < radius {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

fn radial_integral<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, rule: &GaussRule, mut f: F) -> f64 {
    if b <= a {
        return 0.0;
    }
    let breaks: Vec<f64> = (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect();
    breaks.windows(2).map(|w| rule.integrate(w[0], w[1], &mut f)).sum()
}

/// ⟨u, φ⟩ in graded polar coordinates v = δ_r ω, ω on the Euclidean sphere,
/// where dv = r^{d_H−1} J(ω) dr dσ(ω) with J(ω) = Σ wᵢωᵢ².
pub fn pair(
    u: &ExtendedHomogeneousDistribution,
    phi: &TestFunction,
    opts: &PairingOptions,
) -> Result<Complex64> {
    let grading = u.grading();
    let d = grading.dim();
    Error::check_dim(d, phi.dim())?;
    let dh = grading.homogeneous_dimension() as f64;
    let m = u.u.degree();
    let qn = QuasiNorm::new(grading.clone());
    let sphere = sphere_quadrature(d, opts.sphere_degree)?;
    let gl = gauss_legendre(opts.radial_nodes);
    let phi0 = phi.value_at_zero();
    let critical = u.is_critical();

    let value = sphere.integrate_complex(|omega| {
        let uw = u.u.eval(&u.x, omega)?;
        let jac = grading.euler_density(omega);
        let edge = euclidean_exit(grading, omega, phi.support_radius());
        let at = |r: f64| phi.eval(&grading.dilate_unchecked(r, omega));
        let radial = if critical {
            let rstar = 1.0 / qn.norm(omega);
            let a = rstar.min(edge);
            let mut v = radial_integral(0.0, a, opts.radial_panels, &gl, |r| (at(r) - phi0) / r);
            if edge < rstar {
                v -= phi0 * (rstar / edge).ln();
            } else {
                v += radial_integral(rstar, edge, opts.radial_panels, &gl, |r| at(r) / r);
            }
            v
        } else {
            // r^{m+d_H−1} is singular but integrable at 0
            let p = m + dh - 1.0;
            let mut breaks = geometric_breaks(edge / 2.0, 50);
            breaks.extend(uniform_breaks(edge / 2.0, edge, edge / opts.radial_panels as f64).into_iter().skip(1));
            breaks
                .windows(2)
                .map(|w| gl.integrate(w[0], w[1], |r| r.powf(p) * at(r)))
                .sum()
        };
        Ok(uw * jac * radial)
    })?;
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonConvergence {
            what: "pairing".into(),
            detail: "non-finite quadrature value".into(),
        })
    }
}

/// s^{−d_H}⟨u, φ∘δ_{1/s}⟩ − s^{−d_H}⟨u, φ⟩, the failure of exact homogeneity
/// of the extension tested against φ.
pub fn dilation_cocycle(
    u: &ExtendedHomogeneousDistribution,
    s: f64,
    phi: &TestFunction,
    opts: &PairingOptions,
) -> Result<Complex64> {
    if !(s > 0.0 && s.is_finite()) || s == 1.0 {
        return Err(Error::invalid(format!("cocycle needs s > 0 and s ≠ 1, got {s}")));
    }
    if !u.is_critical() {
        return Err(Error::invalid("the dilation cocycle is defined for the critical degree"));
    }
    let dh = u.grading().homogeneous_dimension() as i32;
    let moved = pair(u, &phi.dilated(u.grading(), s)?, opts)?;
    let base = pair(u, phi, opts)?;
    Ok((moved - base) * s.powi(-dh))
}

/// The predicted cocycle s^{−d_H} log(s) c0(u) φ(0).
pub fn cocycle_prediction(c0: Complex64, grading: &Grading, s: f64, phi0: f64) -> Complex64 {
    c0 * s.powi(-(grading.homogeneous_dimension() as i32)) * s.ln() * phi0
}

/// c0(u) = ∫_{S^{d−1}} u(x, ω) J(ω) dσ(ω): the integral of u against the
/// contraction of Lebesgue measure with the graded Euler field, restricted
/// to the Euclidean unit sphere. J ≡ 1 for the trivial grading.
pub fn c0(u: &HomogeneousTerm, x: &[f64], rule: &SphereRule) -> Result<Complex64> {
    Error::check_dim(u.grading().dim(), rule.dim)?;
    let g = u.grading();
    rule.integrate_complex(|omega| Ok(u.eval(x, omega)? * g.euler_density(omega)))
}

/// Fourier transform of log|z| on ℝ^d away from the origin:
/// −(2π)^d / (ω_d |ξ|^d).
pub fn ft_log(d: usize, xi: &[f64]) -> Result<f64> {
    Error::check_dim(d, xi.len())?;
    let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::invalid("ξ = 0 is not in the domain"));
    }
    Ok(-(2.0 * PI).powi(d as i32) / (surface_area(d)? * r.powi(d as i32)))
}

/// Fourier transform of a degree-0 homogeneous function split as
/// b δ₀ + W, where W restricts to Ω(ξ/|ξ|)|ξ|^{−d} away from 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AngularDecomposition {
    pub b: Complex64,
    pub b_error: f64,
    /// Ω at the nodes of `rule`.
    pub omega: Vec<Complex64>,
    pub rule: SphereRule,
    /// ∫ Ω dσ.
    pub mean: Complex64,
    pub max_abs: f64,
    /// Largest disagreement of r^d·f̂(rθ) across the probe radii.
    pub radius_spread: f64,
}

impl AngularDecomposition {
    /// |∫Ω dσ| ≤ tol·max|Ω|, or everything below `floor`.
    pub fn mean_zero(&self, tol: f64, floor: f64) -> bool {
        self.mean.norm() <= tol * self.max_abs || self.max_abs <= floor
    }
}

/// Settings for [`grafakos_decompose`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionOptions {
    pub probe_radii: Vec<f64>,
    pub sphere_degree: usize,
    pub t_sequence: Vec<f64>,
    pub fourier: FourierOptions,
    /// Widths ε of the Gaussian probes e^{−ε²|ξ|²} used to read off b.
    pub delta_widths: Vec<f64>,
}

impl Default for DecompositionOptions {
    fn default() -> Self {
        DecompositionOptions {
            probe_radii: vec![1.0, 2.0, 4.0],
            sphere_degree: 16,
            t_sequence: vec![8.0, 16.0, 32.0, 64.0],
            fourier: FourierOptions::default(),
            delta_widths: vec![1.0, 0.5, 0.25],
        }
    }
}

/// Decompose f̂₀ for a degree-0 homogeneous f₀ on the trivial grading.
///
/// Ω(θ) is r^d f̂₀(rθ) from the numerical Fourier limit, averaged over the
/// probe radii. b is the limit of ⟨f̂₀, e^{−ε²|·|²}⟩ as ε → 0, evaluated
/// through Parseval as ∫ f₀(z) (π/ε²)^{d/2} e^{−|z|²/(4ε²)} dz; W pairs to
/// zero with radial probes, so only the delta part survives.
pub fn grafakos_decompose(
    f0: &HomogeneousTerm,
    x: &[f64],
    opts: &DecompositionOptions,
) -> Result<AngularDecomposition> {
    let grading = f0.grading();
    if !grading.is_trivial() || f0.degree() != 0.0 {
        return Err(Error::invalid("the decomposition needs a degree-0 term on a trivial grading"));
    }
    if opts.probe_radii.is_empty() || opts.probe_radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::invalid("probe radii must be positive"));
    }
    let d = grading.dim();
    let psi = CutoffFunction::new(0.5, 1.0, grading.clone())?;
    let rule = sphere_quadrature(d, opts.sphere_degree)?;

    let mut omega = Vec::with_capacity(rule.len());
    let mut spread: f64 = 0.0;
    for theta in &rule.nodes {
        let mut values = Vec::with_capacity(opts.probe_radii.len());
        for &r in &opts.probe_radii {
            let xi: Vec<f64> = theta.iter().map(|t| t * r).collect();
            let lim = fourier_limit(
                |z| f0.eval_raw(x, z),
                Some(0.0),
                &psi,
                &opts.t_sequence,
                &xi,
                &opts.fourier,
            )?;
            values.push(lim.value * r.powi(d as i32));
        }
        let mean = values.iter().sum::<Complex64>() / values.len() as f64;
        for v in &values {
            spread = spread.max((v - mean).norm());
        }
        omega.push(mean);
    }
    let mean: Complex64 = omega.iter().zip(&rule.weights).map(|(o, w)| o * w).sum();
    let max_abs = omega.iter().map(|o| o.norm()).fold(0.0, f64::max);

    let (b, b_error) = delta_coefficient(f0, x, &opts.delta_widths)?;
    Ok(AngularDecomposition {
        b,
        b_error,
        omega,
        rule,
        mean,
        max_abs,
        radius_spread: spread,
    })
}

fn delta_coefficient(f0: &HomogeneousTerm, x: &[f64], widths: &[f64]) -> Result<(Complex64, f64)> {
    let d = f0.grading().dim();
    let rule = sphere_quadrature(d, 32)?;
    let gl = gauss_legendre(24);
    let values: Vec<Complex64> = widths
        .iter()
        .map(|&eps| {
            let norm = (PI / (eps * eps)).powf(d as f64 / 2.0);
            let reach = 2.0 * eps * 9.0;
            let breaks = uniform_breaks(0.0, reach, reach / 12.0);
            let radial: Vec<(f64, f64)> = breaks.windows(2).flat_map(|w| gl.mapped(w[0], w[1]).collect::<Vec<_>>()).collect();
            rule.integrate_complex(|omega| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(r, w) in &radial {
                    let z: Vec<f64> = omega.iter().map(|o| o * r).collect();
                    acc += f0.eval(x, &z)? * (w * r.powi(d as i32 - 1) * (-r * r / (4.0 * eps * eps)).exp());
                }
                Ok(acc * norm)
            })
        })
        .collect::<Result<_>>()?;
    if values.len() < 2 {
        return Ok((values[0], f64::NAN));
    }
    let ex = richardson(widths, &values, 2.0, 2.0)?;
    Ok((ex.value, ex.error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn norm_power(d: usize) -> HomogeneousTerm {
        HomogeneousTerm::new(Grading::trivial(d).unwrap(), -(d as f64), "|xi|^-d", move |_, xi| {
            let r2: f64 = xi.iter().map(|v| v * v).sum();
            Complex64::new(r2.powf(-(d as f64) / 2.0), 0.0)
        })
    }

    fn koranyi() -> HomogeneousTerm {
        HomogeneousTerm::new(Grading::heisenberg(1, 0).unwrap(), -4.0, "koranyi^-4", |_, xi| {
            let q = xi[1] * xi[1] + xi[2] * xi[2];
            Complex64::new(1.0 / (xi[0] * xi[0] + q * q), 0.0)
        })
    }

    /// Adaptive Simpson on [a, b].
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
    }

    fn bump_profile(r: f64) -> f64 {
        if r >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - r * r)).exp()
        }
    }

    #[test]
    fn pairing_with_vanishing_test_function_is_plain_integral() {
        // φ(v) = |v|² bump: ∫ |v|^{-2} |v|² bump dv = 2π ∫ r bump(r) dr
        let u = ExtendedHomogeneousDistribution::new(norm_power(2), vec![]).unwrap();
        let phi = TestFunction::new(2, 1.0, |v| {
            let q = v[0] * v[0] + v[1] * v[1];
            q * bump_profile(q.sqrt())
        })
        .unwrap();
        let got = pair(&u, &phi, &PairingOptions::default()).unwrap();
        let oracle = 2.0 * PI * simpson(&|r| r * bump_profile(r), 0.0, 1.0, 1e-13);
        assert_relative_eq!(got.re, oracle, max_relative = 1e-8);
    }

    #[test]
    fn pairing_matches_radial_oracle() {
        for d in 1..=3 {
            let u = ExtendedHomogeneousDistribution::new(norm_power(d), vec![]).unwrap();
            let phi = TestFunction::bump(d, 1.7).unwrap();
            let got = pair(&u, &phi, &PairingOptions::default()).unwrap();
            let prof = |r: f64| bump_profile(r / 1.7);
            let inner = simpson(&|r: f64| if r == 0.0 { 0.0 } else { (prof(r) - 1.0) / r }, 0.0, 1.0, 1e-13);
            let outer = simpson(&|r: f64| prof(r) / r, 1.0, 1.7, 1e-13);
            let oracle = surface_area(d).unwrap() * (inner + outer);
            assert_relative_eq!(got.re, oracle, max_relative = 1e-8);
        }
    }

    #[test]
    fn odd_distribution_kills_even_test_function() {
        let g = Grading::heisenberg(1, 0).unwrap();
        let gg = g.clone();
        let odd = HomogeneousTerm::new(g, -4.0, "odd", move |_, xi| {
            Complex64::new(xi[1] * gg.gauge(xi).powi(-5), 0.0)
        });
        let u = ExtendedHomogeneousDistribution::new(odd, vec![]).unwrap();
        let phi = TestFunction::bump(3, 1.0).unwrap();
        assert!(pair(&u, &phi, &PairingOptions::default()).unwrap().norm() < 1e-12);
    }

    #[test]
    fn cocycle_example_trivial_grading() {
        let u = ExtendedHomogeneousDistribution::new(norm_power(2), vec![]).unwrap();
        let phi = TestFunction::bump(2, 1.0).unwrap();
        let got = dilation_cocycle(&u, 2.0, &phi, &PairingOptions::default()).unwrap();
        assert_relative_eq!(got.re, PI / 2.0 * 2f64.ln(), max_relative = 1e-8);
        assert!(dilation_cocycle(&u, 1.0, &phi, &PairingOptions::default()).is_err());
        assert!(dilation_cocycle(&u, -2.0, &phi, &PairingOptions::default()).is_err());
    }

    #[test]
    fn cocycle_vanishes_when_test_function_vanishes_at_zero() {
        let u = ExtendedHomogeneousDistribution::new(koranyi(), vec![]).unwrap();
        let phi = TestFunction::new(3, 1.0, |v| {
            let q = v.iter().map(|x| x * x).sum::<f64>();
            q * bump_profile(q.sqrt())
        })
        .unwrap();
        let got = dilation_cocycle(&u, 3.0, &phi, &PairingOptions::default()).unwrap();
        assert!(got.norm() < 1e-8, "{got}");
    }

    #[test]
    fn heisenberg_cocycle_uses_euler_measure() {
        let u = ExtendedHomogeneousDistribution::new(koranyi(), vec![]).unwrap();
        let phi = TestFunction::bump(3, 1.0).unwrap();
        let rule = sphere_quadrature(3, 64).unwrap();
        let c = c0(u.term(), &[], &rule).unwrap();
        for s in [0.5, 2.0, 3.0] {
            let got = dilation_cocycle(&u, s, &phi, &PairingOptions::default()).unwrap();
            let want = cocycle_prediction(c, u.grading(), s, 1.0);
            assert!((got - want).norm() <= 1e-6 * (1.0 + c.norm()), "s={s}: {got} vs {want}");
        }
    }

    #[test]
    fn c0_examples() {
        let rule = sphere_quadrature(3, 64).unwrap();
        assert_relative_eq!(c0(&norm_power(3), &[], &rule).unwrap().re, 4.0 * PI, max_relative = 1e-13);
        let odd = HomogeneousTerm::new(Grading::trivial(3).unwrap(), -3.0, "odd", |_, xi| {
            Complex64::new(xi[0].powi(3) / (xi.iter().map(|v| v * v).sum::<f64>()).powi(3), 0.0)
        });
        assert!(c0(&odd, &[], &rule).unwrap().norm() < 1e-14);
        // polar reduction with t = ω₀: 2π ∫ (1 + t²)/(t² + (1−t²)²) dt
        let oracle = 2.0 * PI * simpson(&|t| (1.0 + t * t) / (t * t + (1.0 - t * t).powi(2)), -1.0, 1.0, 1e-14);
        let got = c0(&koranyi(), &[], &rule).unwrap();
        assert_relative_eq!(got.re, oracle, max_relative = 1e-9);
    }

    #[test]
    fn ft_log_examples() {
        assert_relative_eq!(ft_log(1, &[1.0]).unwrap(), -PI, max_relative = 1e-15);
        assert_relative_eq!(ft_log(2, &[0.0, 2.0]).unwrap(), -PI / 2.0, max_relative = 1e-15);
        assert!(ft_log(2, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn bump_respects_support() {
        let phi = TestFunction::bump(3, 0.8).unwrap();
        assert!(phi.respects_support(200, 3));
        assert_eq!(phi.value_at_zero(), 1.0);
        let g = Grading::heisenberg(1, 0).unwrap();
        assert!(phi.dilated(&g, 3.0).unwrap().respects_support(200, 4));
        assert!(phi.dilated(&g, 0.3).unwrap().respects_support(200, 5));
    }

    #[test]
    fn decomposition_of_constant_and_dipole() {
        let opts = DecompositionOptions {
            sphere_degree: 8,
            ..DecompositionOptions::default()
        };
        let g = Grading::trivial(2).unwrap();
        let one = HomogeneousTerm::new(g.clone(), 0.0, "1", |_, _| Complex64::new(1.0, 0.0));
        let dec = grafakos_decompose(&one, &[], &opts).unwrap();
        assert!(dec.max_abs < 1e-4, "{dec:?}");
        assert_relative_eq!(dec.b.re, (2.0 * PI).powi(2), max_relative = 1e-8);

        let dip = HomogeneousTerm::new(g, 0.0, "z1/|z|", |_, z| {
            Complex64::new(z[0] / (z[0] * z[0] + z[1] * z[1]).sqrt(), 0.0)
        });
        let dec = grafakos_decompose(&dip, &[], &opts).unwrap();
        assert!(dec.mean_zero(1e-3, 1e-9));
        assert!(dec.max_abs > 1.0);
        assert!(dec.b.norm() < 1e-8);
        // Ω(θ) = −2πi θ₁ for this profile
        for (theta, o) in dec.rule.nodes.iter().zip(&dec.omega) {
            assert!((o - Complex64::new(0.0, -2.0 * PI * theta[0])).norm() < 1e-4, "{theta:?} {o}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn cocycle_composes(s in 0.3f64..3.0, t in 0.3f64..3.0) {
            prop_assume!((s - 1.0).abs() > 0.05 && (t - 1.0).abs() > 0.05 && (s * t - 1.0).abs() > 0.05);
            let u = ExtendedHomogeneousDistribution::new(norm_power(2), vec![]).unwrap();
            let phi = TestFunction::bump(2, 1.0).unwrap();
            let o = PairingOptions::default();
            let cs = dilation_cocycle(&u, s, &phi, &o).unwrap();
            let ct = dilation_cocycle(&u, t, &phi, &o).unwrap();
            let cst = dilation_cocycle(&u, s * t, &phi, &o).unwrap();
            let composed = ct * s.powi(-2) + cs * t.powi(-2);
            prop_assert!((cst - composed).norm() <= 1e-6 * (1.0 + cst.norm()));
        }

        #[test]
        fn pairing_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let u = ExtendedHomogeneousDistribution::new(koranyi(), vec![]).unwrap();
            let p1 = TestFunction::bump(3, 1.0).unwrap();
            let p2 = TestFunction::bump(3, 0.6).unwrap();
            let (q1, q2) = (p1.clone(), p2.clone());
            let comb = TestFunction::new(3, 1.0, move |v| a * q1.eval(v) + b * q2.eval(v)).unwrap();
            let o = PairingOptions { sphere_degree: 24, ..PairingOptions::default() };
            let lhs = pair(&u, &comb, &o).unwrap();
            let rhs = pair(&u, &p1, &o).unwrap() * a + pair(&u, &p2, &o).unwrap() * b;
            prop_assert!((lhs - rhs).norm() <= 1e-6 * (1.0 + rhs.norm()));
        }
    }
}
