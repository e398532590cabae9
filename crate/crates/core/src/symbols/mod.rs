//! Homogeneous and pseudo-homogeneous terms, truncated polyhomogeneous
//! symbols and kernel expansions.

mod fourier;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::{Grading, QuasiNorm};

pub use fourier::{fourier_limit, kernel_term_to_symbol_term, FourierLimit, FourierOptions};

/// Evaluable function of (base point x, fiber variable ξ or z).
pub type TermFn = Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>;

/// A function h(x, ξ) with h(x, δ_s ξ) = s^m h(x, ξ).
#[derive(Clone)]
pub struct HomogeneousTerm {
    grading: Grading,
    degree: f64,
    label: String,
    f: TermFn,
}

impl fmt::Debug for HomogeneousTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogeneousTerm")
            .field("label", &self.label)
            .field("degree", &self.degree)
            .field("weights", &self.grading.weights())
            .finish()
    }
}

impl HomogeneousTerm {
    pub fn new<F>(grading: Grading, degree: f64, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    {
        HomogeneousTerm {
            grading,
            degree,
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn zero(grading: Grading, degree: f64) -> Self {
        HomogeneousTerm::new(grading, degree, "0", |_, _| Complex64::new(0.0, 0.0))
    }

    pub fn grading(&self) -> &Grading {
        &self.grading
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_zero(&self) -> bool {
        self.label == "0"
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Result<Complex64> {
        Error::check_dim(self.grading.dim(), xi.len())?;
        let v = (self.f)(x, xi);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                point: xi.to_vec(),
                reason: format!("{} is not finite", self.label),
            })
        }
    }

    pub(crate) fn eval_raw(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        (self.f)(x, xi)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let f = self.f.clone();
        HomogeneousTerm {
            grading: self.grading.clone(),
            degree: self.degree,
            label: format!("({c})*{}", self.label),
            f: Arc::new(move |x, xi| c * f(x, xi)),
        }
    }

    pub fn sum(&self, other: &HomogeneousTerm) -> Result<Self> {
        if self.grading != other.grading || self.degree != other.degree {
            return Err(Error::invalid("terms must share grading and degree to be added"));
        }
        let (f, g) = (self.f.clone(), other.f.clone());
        Ok(HomogeneousTerm {
            grading: self.grading.clone(),
            degree: self.degree,
            label: format!("{}+{}", self.label, other.label),
            f: Arc::new(move |x, xi| f(x, xi) + g(x, xi)),
        })
    }
}

/// Result of a sampled homogeneity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityCheck {
    pub passed: bool,
    pub max_deviation: f64,
}

/// Compare h(x, δ_s ξ) with s^m h(x, ξ) on random (s, ξ). The deviation is
/// relative, or absolute where s^m h(ξ) is below 1e-12.
pub fn check_homogeneity(
    term: &HomogeneousTerm,
    x: &[f64],
    sample_count: usize,
    tol: f64,
    seed: u64,
) -> Result<HomogeneityCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = term.grading.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..sample_count {
        let xi: Vec<f64> = loop {
            let p: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            if p.iter().any(|v: &f64| v.abs() > 1e-3) {
                break p;
            }
        };
        let s = 10f64.powf(rng.random_range(-1.0..1.0));
        let base = term.eval(x, &xi)? * s.powf(term.degree);
        let moved = term.eval(x, &term.grading.dilate_unchecked(s, &xi))?;
        let diff = (moved - base).norm();
        let dev = if base.norm() < 1e-12 { diff } else { diff / base.norm() };
        worst = worst.max(dev);
    }
    Ok(HomogeneityCheck {
        passed: worst <= tol,
        max_deviation: worst,
    })
}

/// f(x, ξ) + log|ξ|·p(x, ξ), with a polynomial part p only in nonnegative
/// integer degree.
#[derive(Debug, Clone)]
pub struct PseudoHomogeneousTerm {
    degree: f64,
    f: HomogeneousTerm,
    p: Option<HomogeneousTerm>,
    norm: QuasiNorm,
}

impl PseudoHomogeneousTerm {
    pub fn new(f: HomogeneousTerm, p: Option<HomogeneousTerm>) -> Result<Self> {
        let degree = f.degree;
        if let Some(p) = &p {
            if degree < 0.0 || degree.fract() != 0.0 {
                return Err(Error::invalid(format!(
                    "a log part needs a nonnegative integer degree, got {degree}"
                )));
            }
            if p.degree != degree || p.grading != f.grading {
                return Err(Error::invalid("log part must match the term's degree and grading"));
            }
        }
        let norm = QuasiNorm::new(f.grading.clone());
        Ok(PseudoHomogeneousTerm { degree, f, p, norm })
    }

    pub fn homogeneous(f: HomogeneousTerm) -> Self {
        let norm = QuasiNorm::new(f.grading.clone());
        PseudoHomogeneousTerm {
            degree: f.degree,
            f,
            p: None,
            norm,
        }
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn grading(&self) -> &Grading {
        self.f.grading()
    }

    pub fn homogeneous_part(&self) -> &HomogeneousTerm {
        &self.f
    }

    pub fn log_part(&self) -> Option<&HomogeneousTerm> {
        self.p.as_ref()
    }

    pub fn eval(&self, x: &[f64], z: &[f64]) -> Result<Complex64> {
        let mut v = self.f.eval(x, z)?;
        if let Some(p) = &self.p {
            v += p.eval(x, z)? * self.norm.norm(z).ln();
        }
        Ok(v)
    }

    pub(crate) fn eval_raw(&self, x: &[f64], z: &[f64]) -> Complex64 {
        let mut v = self.f.eval_raw(x, z);
        if let Some(p) = &self.p {
            v += p.eval_raw(x, z) * self.norm.norm(z).ln();
        }
        v
    }

    /// value(x, δ_s z) − s^m value(x, z), which equals s^m log(s) p(x, z).
    pub fn dilation_defect(&self, x: &[f64], z: &[f64], s: f64) -> Result<Complex64> {
        let moved = self.eval(x, &self.grading().dilate(s, z)?)?;
        Ok(moved - self.eval(x, z)? * s.powf(self.degree))
    }
}

/// Truncated expansion a ∼ Σ_{j<J} a_{m−j}.
#[derive(Debug, Clone)]
pub struct PolySymbol {
    order: i32,
    terms: Vec<HomogeneousTerm>,
}

impl PolySymbol {
    pub fn new(order: i32, terms: Vec<HomogeneousTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("a symbol needs at least one term"));
        }
        for (j, t) in terms.iter().enumerate() {
            if t.degree != (order - j as i32) as f64 {
                return Err(Error::invalid(format!(
                    "term {j} has degree {}, expected {}",
                    t.degree,
                    order - j as i32
                )));
            }
            if t.grading != terms[0].grading {
                return Err(Error::invalid("all symbol terms must share one grading"));
            }
        }
        Ok(PolySymbol { order, terms })
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn grading(&self) -> &Grading {
        self.terms[0].grading()
    }

    pub fn terms(&self) -> &[HomogeneousTerm] {
        &self.terms
    }

    /// The term of the given degree, if it lies inside the truncation.
    pub fn term_of_degree(&self, degree: i32) -> Option<&HomogeneousTerm> {
        let j = self.order - degree;
        if j < 0 {
            return None;
        }
        self.terms.get(j as usize)
    }
}

/// Pseudo-homogeneous kernel expansion k ∼ Σ_j k_{κ+j}, together with an
/// optional smooth remainder so that χ·Σ terms + remainder is the kernel
/// near the diagonal.
#[derive(Clone)]
pub struct KernelExpansion {
    leading_degree: i32,
    terms: Vec<PseudoHomogeneousTerm>,
    remainder: Option<TermFn>,
}

impl fmt::Debug for KernelExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelExpansion")
            .field("leading_degree", &self.leading_degree)
            .field("terms", &self.terms)
            .field("remainder", &self.remainder.is_some())
            .finish()
    }
}

impl KernelExpansion {
    pub fn new(
        leading_degree: i32,
        terms: Vec<PseudoHomogeneousTerm>,
        remainder: Option<TermFn>,
    ) -> Result<Self> {
        for (j, t) in terms.iter().enumerate() {
            if t.degree != (leading_degree + j as i32) as f64 {
                return Err(Error::invalid(format!(
                    "kernel term {j} has degree {}, expected {}",
                    t.degree,
                    leading_degree + j as i32
                )));
            }
        }
        Ok(KernelExpansion {
            leading_degree,
            terms,
            remainder,
        })
    }

    pub fn leading_degree(&self) -> i32 {
        self.leading_degree
    }

    pub fn terms(&self) -> &[PseudoHomogeneousTerm] {
        &self.terms
    }

    pub fn term_of_degree(&self, degree: i32) -> Option<&PseudoHomogeneousTerm> {
        let j = degree - self.leading_degree;
        if j < 0 {
            return None;
        }
        self.terms.get(j as usize)
    }

    pub fn remainder(&self) -> Option<&TermFn> {
        self.remainder.as_ref()
    }

    /// χ(z)·Σ k_j(x, z) + remainder(x, z).
    pub fn eval(&self, chi: &CutoffFunction, x: &[f64], z: &[f64]) -> Result<Complex64> {
        let c = chi.eval(z);
        let mut v = Complex64::new(0.0, 0.0);
        if c != 0.0 {
            for t in &self.terms {
                v += t.eval(x, z)? * c;
            }
        }
        if let Some(r) = &self.remainder {
            v += r(x, z);
        }
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                point: z.to_vec(),
                reason: "kernel is not finite".into(),
            })
        }
    }
}

/// Smooth cutoff equal to 1 for |z| ≤ r₀ and 0 for |z| ≥ r₁ in quasi-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffFunction {
    r0: f64,
    r1: f64,
    norm: QuasiNorm,
}

impl CutoffFunction {
    pub fn new(r0: f64, r1: f64, grading: Grading) -> Result<Self> {
        if !(r0 > 0.0 && r1 > r0 && r1.is_finite()) {
            return Err(Error::invalid(format!("cutoff radii need 0 < r0 < r1, got {r0}, {r1}")));
        }
        Ok(CutoffFunction {
            r0,
            r1,
            norm: QuasiNorm::new(grading),
        })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn grading(&self) -> &Grading {
        self.norm.grading()
    }

    /// Value as a function of the quasi-norm radius.
    pub fn profile(&self, r: f64) -> f64 {
        smooth_step((self.r1 - r) / (self.r1 - self.r0))
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.profile(self.norm.norm(z))
    }
}

/// 0 for u ≤ 0, 1 for u ≥ 1, C^∞ in between, built from exp(−1/t).
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

/// A function with declared rapid decay.
#[derive(Clone)]
pub struct SchwartzRemainder {
    dim: usize,
    decay_order: u32,
    f: Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>,
}

impl fmt::Debug for SchwartzRemainder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchwartzRemainder")
            .field("dim", &self.dim)
            .field("decay_order", &self.decay_order)
            .finish()
    }
}

impl SchwartzRemainder {
    pub fn new<F>(dim: usize, decay_order: u32, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        SchwartzRemainder {
            dim,
            decay_order,
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        (self.f)(xi)
    }

    /// Largest |f(ξ)|·(1+|ξ|)^k over random samples out to radius `radius`,
    /// for k the declared decay order.
    pub fn decay_bound(&self, samples: usize, radius: f64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .map(|_| {
                let xi: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-radius..radius)).collect();
                let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                self.eval(&xi).norm() * (1.0 + r).powi(self.decay_order as i32)
            })
            .fold(0.0, f64::max)
    }
}

/// The first `j_terms` nonzero terms of (1+|ξ|²)^{m/2} = Σ_j C(m/2, j)|ξ|^{m−2j},
/// with the zero terms in between, as a symbol of order m on the trivial
/// grading of ℝ^d.
pub fn bessel_potential_expansion(m: i32, d: usize, j_terms: usize) -> Result<PolySymbol> {
    if m >= 0 {
        return Err(Error::invalid(format!("Bessel potential order must be negative, got {m}")));
    }
    if j_terms == 0 {
        return Err(Error::invalid("need at least one term"));
    }
    let grading = Grading::trivial(d)?;
    let half = m as f64 / 2.0;
    let mut terms = Vec::with_capacity(2 * j_terms - 1);
    let mut coeff = 1.0;
    for j in 0..j_terms {
        if j > 0 {
            coeff *= (half - (j - 1) as f64) / j as f64;
            terms.push(HomogeneousTerm::zero(grading.clone(), (m - 2 * j as i32 + 1) as f64));
        }
        let power = m - 2 * j as i32;
        let c = coeff;
        terms.push(HomogeneousTerm::new(
            grading.clone(),
            power as f64,
            format!("{c}*|xi|^{power}"),
            move |_, xi| {
                let r2: f64 = xi.iter().map(|v| v * v).sum();
                Complex64::new(c * r2.powf(power as f64 / 2.0), 0.0)
            },
        ));
    }
    PolySymbol::new(m, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn norm_power(d: usize, m: f64) -> HomogeneousTerm {
        HomogeneousTerm::new(Grading::trivial(d).unwrap(), m, "|xi|^m", move |_, xi| {
            let r: f64 = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            Complex64::new(r.powf(m), 0.0)
        })
    }

    #[test]
    fn homogeneity_examples() {
        let t = norm_power(3, -3.0);
        let c = check_homogeneity(&t, &[], 200, 1e-10, 1).unwrap();
        assert!(c.passed, "{c:?}");

        let h = Grading::heisenberg(1, 0).unwrap();
        let koranyi = HomogeneousTerm::new(h, -4.0, "koranyi", |_, xi| {
            let q = xi[1] * xi[1] + xi[2] * xi[2];
            Complex64::new(1.0 / (xi[0] * xi[0] + q * q), 0.0)
        });
        assert!(check_homogeneity(&koranyi, &[], 200, 1e-10, 2).unwrap().passed);

        let broken = HomogeneousTerm::new(Grading::trivial(2).unwrap(), -2.0, "bad", |_, xi| {
            Complex64::new(1.0 / (xi[0] * xi[0] + xi[1] * xi[1]) + 1.0, 0.0)
        });
        assert!(!check_homogeneity(&broken, &[], 200, 1e-10, 3).unwrap().passed);
    }

    #[test]
    fn homogeneity_reports_bad_evaluations() {
        let t = HomogeneousTerm::new(Grading::trivial(1).unwrap(), 0.0, "nan", |_, _| {
            Complex64::new(f64::NAN, 0.0)
        });
        match check_homogeneity(&t, &[], 5, 1e-10, 0) {
            Err(Error::Evaluation { point, .. }) => assert_eq!(point.len(), 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cutoff_examples() {
        let chi = CutoffFunction::new(0.5, 1.0, Grading::trivial(2).unwrap()).unwrap();
        assert_eq!(chi.eval(&[0.25, 0.0]), 1.0);
        assert_eq!(chi.eval(&[0.0, 2.0]), 0.0);
        let mid = chi.eval(&[0.75, 0.0]);
        assert!(mid > 0.0 && mid < 1.0);
        assert_relative_eq!(mid, 0.5, max_relative = 1e-15);
        assert!(CutoffFunction::new(1.0, 1.0, Grading::trivial(1).unwrap()).is_err());
        // monotone through the transition
        let mut last = 1.0;
        for k in 0..=100 {
            let v = chi.profile(0.5 + 0.005 * k as f64);
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn cutoff_uses_quasi_norm() {
        let chi = CutoffFunction::new(0.5, 1.0, Grading::heisenberg(1, 0).unwrap()).unwrap();
        // quasi-norm of (0.36, 0, 0) is 0.6
        let a = chi.eval(&[0.36, 0.0, 0.0]);
        let b = chi.eval(&[0.0, 0.6, 0.0]);
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    #[test]
    fn bessel_expansion_examples() {
        let a = bessel_potential_expansion(-2, 2, 1).unwrap();
        assert_eq!(a.terms().len(), 1);
        assert_relative_eq!(a.terms()[0].eval(&[], &[2.0, 0.0]).unwrap().re, 0.25);

        let b = bessel_potential_expansion(-2, 2, 2).unwrap();
        assert!(b.term_of_degree(-3).unwrap().is_zero());
        let t4 = b.term_of_degree(-4).unwrap();
        assert_relative_eq!(t4.eval(&[], &[2.0, 0.0]).unwrap().re, -1.0 / 16.0);
        assert!(b.term_of_degree(-5).is_none());
        assert!(b.term_of_degree(-1).is_none());

        // odd order: C(-3/2, 1) = -3/2
        let c = bessel_potential_expansion(-3, 3, 2).unwrap();
        assert_relative_eq!(c.term_of_degree(-5).unwrap().eval(&[], &[1.0, 0.0, 0.0]).unwrap().re, -1.5);
        assert!(bessel_potential_expansion(0, 2, 1).is_err());
    }

    #[test]
    fn bessel_expansion_approximates_the_symbol() {
        let s = bessel_potential_expansion(-4, 3, 4).unwrap();
        let xi = [6.0, -3.0, 2.0];
        let exact = (1.0f64 + 49.0).powf(-2.0);
        let sum: f64 = s.terms().iter().map(|t| t.eval(&[], &xi).unwrap().re).sum();
        // next term is C(-2,4) r^{-12}
        assert!((sum - exact).abs() < 5.0 * 49f64.powi(-6));
    }

    #[test]
    fn pseudo_homogeneous_requires_integer_degree_for_log() {
        let g = Grading::trivial(2).unwrap();
        let f = HomogeneousTerm::zero(g.clone(), 0.5);
        let p = HomogeneousTerm::zero(g, 0.5);
        assert!(PseudoHomogeneousTerm::new(f, Some(p)).is_err());
    }

    #[test]
    fn schwartz_decay_bound() {
        let g = SchwartzRemainder::new(2, 6, |xi| {
            Complex64::new((-(xi[0] * xi[0] + xi[1] * xi[1])).exp(), 0.0)
        });
        assert!(g.decay_bound(500, 20.0, 4) < 50.0);
    }

    #[test]
    fn kernel_expansion_degrees_are_checked() {
        let g = Grading::trivial(1).unwrap();
        let t = PseudoHomogeneousTerm::homogeneous(HomogeneousTerm::zero(g, 1.0));
        assert!(KernelExpansion::new(0, vec![t.clone()], None).is_err());
        assert!(KernelExpansion::new(1, vec![t], None).is_ok());
    }

    proptest! {
        #[test]
        fn log_term_dilation_defect(
            s in 0.05f64..20.0,
            z in prop::collection::vec(-3.0f64..3.0, 3),
            m in 0u32..3,
        ) {
            prop_assume!(z.iter().any(|v| v.abs() > 1e-2));
            let g = Grading::heisenberg(1, 0).unwrap();
            let deg = m as f64;
            let gg = g.clone();
            let p = HomogeneousTerm::new(g.clone(), deg, "p", move |_, z| {
                Complex64::new(gg.gauge(z).powf(deg), 0.0)
            });
            let gf = g.clone();
            let f = HomogeneousTerm::new(g.clone(), deg, "f", move |_, z| {
                Complex64::new(z[1] * gf.gauge(z).powf(deg - 1.0), 0.0)
            });
            let term = PseudoHomogeneousTerm::new(f, Some(p.clone())).unwrap();
            let defect = term.dilation_defect(&[], &z, s).unwrap();
            let expect = p.eval(&[], &z).unwrap() * s.powf(deg) * s.ln();
            let scale = term.eval(&[], &z).unwrap().norm() * s.powf(deg) + expect.norm() + 1.0;
            prop_assert!((defect - expect).norm() <= 1e-12 * scale);
        }

        #[test]
        fn bessel_terms_are_homogeneous(m in -6i32..-1, d in 1usize..4, seed in 0u64..1000) {
            let s = bessel_potential_expansion(m, d, 3).unwrap();
            for t in s.terms() {
                prop_assert!(check_homogeneity(t, &[], 20, 1e-10, seed).unwrap().passed);
            }
        }
    }
}
