//! Invariant suites over the built-in catalog.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{CatalogTerm, Coefficient, Profile};
use crate::error::{Error, Result};
use crate::graded::{sphere_quadrature, Grading};
use crate::homog_dist::{c0, cocycle_prediction, dilation_cocycle, ft_log, grafakos_decompose, DecompositionOptions, ExtendedHomogeneousDistribution, PairingOptions, TestFunction};
use crate::osculating::{commutator_at_identity, trace_engine, GridFunction, OsculatingGroup};
use crate::quadrature::{gauss_legendre, integrate_panels, uniform_breaks};
use crate::residue::{
    cocycle_sample, global_residue, groupoidal_residue_at, ponge_groupoidal_equiv, ponge_residue_at, representative_invariance_check,
    wodzicki_residue_at, CocycleOptions, EquivalenceOptions, OperatorModel, Perturbation,
};
use crate::symbols::{kernel_term_to_symbol_term, CutoffFunction, FourierOptions, HomogeneousTerm, PolySymbol, PseudoHomogeneousTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Ft,
    Cocycle,
    Conv,
    Equivalence,
    All,
}

impl Suite {
    pub fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Ft, Suite::Cocycle, Suite::Conv, Suite::Equivalence],
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Ft => "ft",
            Suite::Cocycle => "cocycle",
            Suite::Conv => "conv",
            Suite::Equivalence => "equivalence",
            Suite::All => "all",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ft" => Ok(Suite::Ft),
            "cocycle" => Ok(Suite::Cocycle),
            "conv" => Ok(Suite::Conv),
            "equivalence" => Ok(Suite::Equivalence),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse {
                context: "suite".into(),
                message: format!("unknown suite `{other}`"),
            }),
        }
    }
}

/// One check: passes when `error ≤ tolerance·scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub error: f64,
    pub tolerance: f64,
    pub scale: f64,
    pub passed: bool,
    /// A documented deviation: reported, but not counted in the suite verdict.
    pub known_deviation: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn bound(&self) -> f64 {
        self.tolerance * self.scale
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match (self.passed, self.known_deviation) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known deviation)",
            (false, false) => "FAIL",
        };
        write!(
            f,
            "[{}] {verdict} {}: measured {:.9e}, expected {:.9e}, error {:.3e} vs bound {:.3e}",
            self.suite,
            self.name,
            self.measured,
            self.expected,
            self.error,
            self.bound()
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// All non-deviation checks passed.
pub fn suite_passed(checks: &[CheckResult]) -> bool {
    checks.iter().all(|c| c.passed || c.known_deviation)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Replaces the default tolerance of every check that has one.
    pub tol: Option<f64>,
    pub seed: u64,
    pub points_per_model: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: None,
            seed: 7,
            points_per_model: 5,
        }
    }
}

pub struct Recorder<'a> {
    suite: Suite,
    opts: &'a VerifyOptions,
    out: Vec<CheckResult>,
}

impl Recorder<'_> {
    #[allow(clippy::too_many_arguments)]
    pub fn push_full(&mut self, name: String, measured: f64, expected: f64, error: f64, tol: f64, scale: f64, overridable: bool, known: bool, detail: String) {
        let tolerance = if overridable { self.opts.tol.unwrap_or(tol) } else { tol };
        self.out.push(CheckResult {
            suite: self.suite,
            name,
            measured,
            expected,
            error,
            tolerance,
            scale,
            passed: error.is_finite() && error <= tolerance * scale,
            known_deviation: known,
            detail,
        });
    }

    pub fn push(&mut self, name: impl Into<String>, measured: f64, expected: f64, error: f64, tol: f64, scale: f64) {
        self.push_full(name.into(), measured, expected, error, tol, scale, true, false, String::new());
    }

    fn fail(&mut self, name: impl Into<String>, e: Error) {
        self.push_full(name.into(), 0.0, 0.0, f64::MAX, 0.0, 0.0, false, false, e.to_string());
    }
}

/// Run one suite (or all of them).
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for s in suite.members() {
        let mut rec = Recorder { suite: s, opts, out: Vec::new() };
        let r = match s {
            Suite::Ft => ft_suite(&mut rec),
            Suite::Cocycle => cocycle_suite(&mut rec),
            Suite::Conv => conv_suite(&mut rec),
            Suite::Equivalence => equivalence_suite(&mut rec),
            Suite::All => unreachable!(),
        };
        if let Err(e) = r {
            rec.fail(format!("{s} suite aborted"), e);
        }
        out.extend(rec.out);
    }
    out
}

fn direction(d: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|i| 0.8 - 0.3 * i as f64).collect();
    let n = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    raw.iter().map(|v| v / n).collect()
}

fn log_term(g: &Grading) -> Result<PseudoHomogeneousTerm> {
    let one = HomogeneousTerm::new(g.clone(), 0.0, "1", |_, _| Complex64::new(1.0, 0.0));
    PseudoHomogeneousTerm::new(HomogeneousTerm::zero(g.clone(), 0.0), Some(one))
}

/// Transform of χ·log|z| at |ξ| ∈ {1, 2, 4}, d = 1..3.
pub fn ft_log_checks(rec: &mut Recorder) -> Result<()> {
    for d in 1..=3 {
        let g = Grading::trivial(d)?;
        let k = log_term(&g)?;
        let psi = CutoffFunction::new(0.5, 1.0, g.clone())?;
        for r in [1.0, 2.0, 4.0] {
            let xi: Vec<f64> = direction(d).iter().map(|v| v * r).collect();
            let lim = kernel_term_to_symbol_term(&k, &vec![0.0; d], &psi, &[8.0, 16.0, 32.0, 64.0], &xi, &FourierOptions::default())?;
            let exact = ft_log(d, &xi)?;
            rec.push(format!("ft_log d={d} |xi|={r}"), lim.value.re, exact, (lim.value - exact).norm(), 1e-3, exact.abs());
        }
    }
    Ok(())
}

fn ft_suite(rec: &mut Recorder) -> Result<()> {
    ft_log_checks(rec)?;
    grafakos_checks(rec)
}

/// Mean-zero Ω for three degree-0 profiles on ℝ², plus Ω and b against
/// their closed forms.
pub fn grafakos_checks(rec: &mut Recorder) -> Result<()> {
    let g = Grading::trivial(2)?;
    let x = [0.0, 0.0];
    for p in [Profile::Dipole, Profile::Quadrupole, Profile::Mixed] {
        let model = CatalogTerm::Homog0 { profile: p }.build(&g)?;
        let f0 = model.kernel().and_then(|k| k.term_of_degree(0)).ok_or_else(|| Error::MissingTerm("f0".into()))?;
        let dec = grafakos_decompose(f0.homogeneous_part(), &x, &DecompositionOptions::default())?;
        rec.push(format!("grafakos mean zero {p}"), dec.mean.norm(), 0.0, dec.mean.norm(), 1e-3, dec.max_abs);

        let a = p.symbol(2);
        let mut worst: f64 = 0.0;
        let mut peak: f64 = 0.0;
        for (node, om) in dec.rule.nodes.iter().zip(&dec.omega) {
            let exact = a(node);
            worst = worst.max((om - exact).norm());
            peak = peak.max(exact.norm());
        }
        rec.push(format!("grafakos omega closed form {p}"), worst, 0.0, worst, 1e-3, peak.max(1e-300));

        let mean_f0 = dec.rule.integrate_complex(|w| f0.eval(&x, w))? / (2.0 * PI);
        let b_exact = mean_f0 * (2.0 * PI).powi(2);
        rec.push(format!("grafakos delta coefficient {p}"), dec.b.re, b_exact.re, (dec.b - b_exact).norm(), 1e-3, 1.0 + b_exact.norm());
    }
    Ok(())
}

fn norm_power_term(d: usize) -> Result<HomogeneousTerm> {
    let g = Grading::trivial(d)?;
    Ok(HomogeneousTerm::new(g, -(d as f64), "|xi|^-d", move |_, xi| {
        Complex64::new(xi.iter().map(|v| v * v).sum::<f64>().powf(-(d as f64) / 2.0), 0.0)
    }))
}

fn koranyi_term() -> Result<HomogeneousTerm> {
    let g = Grading::heisenberg(1, 0)?;
    let gg = g.clone();
    Ok(HomogeneousTerm::new(g, -4.0, "gauge^-4", move |_, xi| Complex64::new(gg.gauge(xi).powi(-4), 0.0)))
}

/// Dilation cocycle against s^{−d_H} log(s) c0 φ(0), and the composite law.
pub fn cocycle_identity_checks(rec: &mut Recorder) -> Result<()> {
    let popts = PairingOptions::default();
    for u in [norm_power_term(2)?, koranyi_term()?] {
        let g = u.grading().clone();
        let dh = g.homogeneous_dimension() as i32;
        let rule = sphere_quadrature(g.dim(), 64)?;
        let c = c0(&u, &[0.0; 3][..g.dim()], &rule)?;
        let ext = ExtendedHomogeneousDistribution::new(u.clone(), vec![0.0; g.dim()])?;
        let phi = TestFunction::bump(g.dim(), 1.0)?;
        let phi0 = phi.value_at_zero();
        let scale = 1.0 + (c * phi0).norm();
        let mut measured = Vec::new();
        for s in [0.5, 2.0, 3.0] {
            let m = dilation_cocycle(&ext, s, &phi, &popts)?;
            let p = cocycle_prediction(c, &g, s, phi0);
            rec.push(format!("cocycle {} s={s}", u.label()), m.re, p.re, (m - p).norm(), 1e-4, scale);
            measured.push((s, m));
        }
        for (s, t) in [(2.0, 3.0), (0.5, 3.0)] {
            let cs = dilation_cocycle(&ext, s, &phi, &popts)?;
            let ct = dilation_cocycle(&ext, t, &phi, &popts)?;
            let cst = dilation_cocycle(&ext, s * t, &phi, &popts)?;
            let pred = cs * t.powi(-dh) + ct * s.powi(-dh);
            rec.push(format!("cocycle composition {} s={s} t={t}", u.label()), cst.re, pred.re, (cst - pred).norm(), 1e-4, scale);
        }
    }
    Ok(())
}

/// |F_{st}(0) − F_s(0) − F_t(0)| on the log-kernel model for random pairs.
pub fn homomorphism_checks(rec: &mut Recorder, pairs: usize) -> Result<()> {
    let model = CatalogTerm::LogKernel { p0: Coefficient::Constant(1.0) }.build(&Grading::trivial(2)?)?;
    let x = [0.1, -0.2];
    let opts = CocycleOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(rec.opts.seed);
    let f = |s: f64| -> Result<Complex64> {
        if s == 1.0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Ok(cocycle_sample(&model, &x, s, &opts, None)?.limit)
        }
    };
    for i in 0..pairs {
        let s = 4f64.powf(rng.random_range(-1.0..1.0));
        let t = 4f64.powf(rng.random_range(-1.0..1.0));
        let (fs, ft, fst) = (f(s)?, f(t)?, f(s * t)?);
        let err = (fst - fs - ft).norm();
        rec.push(format!("homomorphism pair {i} s={s:.4} t={t:.4}"), fst.re, (fs + ft).re, err, 1e-8, 1.0 + fs.norm());
    }
    Ok(())
}

/// Residue shift under random smooth perturbations of the kernel.
pub fn invariance_checks(rec: &mut Recorder, count: usize) -> Result<()> {
    let model = CatalogTerm::LogKernel { p0: Coefficient::Bump(1.0) }.build(&Grading::trivial(2)?)?;
    let opts = CocycleOptions::default();
    let s_set = [1.0 / 3.0, 0.5, 2.0, 3.0];
    let mut rng = ChaCha8Rng::seed_from_u64(rec.opts.seed.wrapping_add(1));
    for i in 0..count {
        let amp = rng.random_range(-10.0..10.0);
        let c = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        let w = rng.random_range(0.2..1.0);
        let tilt = rng.random_range(-1.0..1.0);
        let pert: Perturbation = Arc::new(move |x, v| {
            let q = ((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2)) / (w * w);
            Complex64::new(amp * (1.0 + tilt * x[0]) * (-q).exp(), 0.3 * amp * v[1] * (-q).exp())
        });
        let x = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        let shift = representative_invariance_check(&model, &x, &pert, &s_set, &opts)?;
        rec.push(format!("invariance perturbation {i} amp={amp:.2}"), shift, 0.0, shift, 1e-6, 1.0);
    }
    Ok(())
}

fn cocycle_suite(rec: &mut Recorder) -> Result<()> {
    cocycle_identity_checks(rec)?;
    homomorphism_checks(rec, 20)?;
    invariance_checks(rec, 5)
}

fn gaussian(center: [f64; 3], width: f64) -> impl Fn(&[f64]) -> Complex64 + Sync {
    move |p: &[f64]| {
        let q: f64 = p.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum();
        Complex64::new((-q / (width * width)).exp(), 0.0)
    }
}

/// Convolution engine on ℍ₁ with Gaussian bumps.
pub fn conv_checks(rec: &mut Recorder, n: usize) -> Result<()> {
    let grp = OsculatingGroup::heisenberg(1, 0)?;
    let ext = [4.0; 3];
    let sample = |c: [f64; 3], w: f64, extent: &[f64], n: usize| GridFunction::sample(extent, &[n; 3], gaussian(c, w));
    let f = sample([0.2, 0.5, -0.3], 0.6, &ext, n)?;
    let g = sample([-0.1, -0.4, 0.6], 0.5, &ext, n)?;
    let kp = sample([0.0, 0.3, 0.0], 0.7, &ext, n)?;
    let kq = sample([0.3, 0.0, -0.3], 0.6, &ext, n)?;
    let sup = |h: &GridFunction| h.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = f.integral().norm() * sup(&g);
    let c = commutator_at_identity(&grp, &f, &g)?;
    rec.push(format!("commutator at identity {n}^3"), c.norm(), 0.0, c.norm(), 1e-6, scale);
    let t = trace_engine(&grp, &kp, &kq, &f, &g)?;
    let tscale = scale.max(kp.integral().norm() * sup(&kq));
    rec.push(format!("trace engine {n}^3"), t.norm(), 0.0, t.norm(), 1e-6, tscale);

    // with f and g on different grids the symmetric cancellation is lost and
    // the commutator at e shows the discretization error
    let offset = |n: usize| -> Result<f64> {
        let f = sample([0.2, 0.5, -0.3], 0.6, &ext, n)?;
        let g = sample([-0.1, -0.4, 0.6], 0.5, &[4.3; 3], n)?;
        Ok(commutator_at_identity(&grp, &f, &g)?.norm())
    };
    let coarse = offset(n / 2)?;
    let fine = offset(n)?;
    rec.push_full(
        format!("commutator refinement {}^3 -> {n}^3", n / 2),
        fine,
        coarse,
        fine / coarse,
        0.5,
        1.0,
        false,
        false,
        format!("offset-grid commutator {coarse:.3e} -> {fine:.3e}"),
    );
    Ok(())
}

/// Fourier multipliers commute, so the commutator model has residue 0.
pub fn abelian_commutator_check(rec: &mut Recorder) -> Result<()> {
    let g = Grading::trivial(2)?;
    let a = |xi: &[f64]| Complex64::new(1.0, xi[0]) / (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let b = |xi: &[f64]| Complex64::new(xi[1], 0.5) / (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).powf(1.5);
    let term = HomogeneousTerm::new(g.clone(), -2.0, "[a,b]", move |_, xi| a(xi) * b(xi) - b(xi) * a(xi));
    let model = OperatorModel::new("[A,B]", g, -2, Some(PolySymbol::new(-2, vec![term])?), None)?;
    let w = wodzicki_residue_at(&model, &[0.0, 0.0], &sphere_quadrature(2, 16)?, &FourierOptions::default())?;
    rec.push("abelian commutator residue", w.value.norm(), 0.0, w.value.norm(), 1e-12, 1.0);
    Ok(())
}

fn conv_suite(rec: &mut Recorder) -> Result<()> {
    conv_checks(rec, 64)?;
    abelian_commutator_check(rec)
}

/// The trivially graded catalog used by the Wodzicki/groupoidal comparison.
pub fn trivial_catalog(d: usize) -> Vec<CatalogTerm> {
    vec![
        CatalogTerm::LogKernel { p0: Coefficient::Bump(1.0) },
        CatalogTerm::Homog0 { profile: Profile::Dipole },
        CatalogTerm::Homog0 { profile: Profile::Quadrupole },
        CatalogTerm::Homog0 { profile: Profile::Mixed },
        CatalogTerm::BesselPotential { m: -(d as i32), terms: 2 },
        CatalogTerm::BesselPotential { m: -(d as i32) - 1, terms: 2 },
        CatalogTerm::Gaussian,
    ]
}

/// Wodzicki against groupoidal on the trivial catalog, d = 1..3.
pub fn trivial_equivalence_checks(rec: &mut Recorder) -> Result<()> {
    let s_set = [1.0 / 3.0, 0.5, 2.0, 3.0];
    let mut rng = ChaCha8Rng::seed_from_u64(rec.opts.seed.wrapping_add(2));
    for d in 1..=3 {
        let g = Grading::trivial(d)?;
        let rule = sphere_quadrature(d, 16)?;
        for term in trivial_catalog(d) {
            let model = term.build(&g)?;
            let p0 = match term {
                CatalogTerm::LogKernel { p0 } => Some(p0.evaluator(d)?),
                _ => None,
            };
            let homog = matches!(term, CatalogTerm::Homog0 { .. });
            let (mut worst, mut worst_exact, mut spread, mut last) = (0.0f64, 0.0f64, 0.0f64, Complex64::new(0.0, 0.0));
            for _ in 0..rec.opts.points_per_model {
                let x: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
                let w = wodzicki_residue_at(&model, &x, &rule, &FourierOptions::default())?.value;
                let gr = groupoidal_residue_at(&model, &x, &s_set, &CocycleOptions::default())?;
                worst = worst.max((w - gr.value).norm() / (1.0 + w.norm()));
                spread = spread.max(gr.spread / (1.0 + gr.value.norm()));
                if let Some(p) = &p0 {
                    let e = -p(&x);
                    worst_exact = worst_exact.max((w - e).norm()).max((gr.value - e).norm());
                } else if homog {
                    worst_exact = worst_exact.max(w.norm()).max(gr.value.norm());
                }
                last = gr.value;
            }
            rec.push(format!("wodzicki vs groupoidal d={d} {term}"), last.re, last.re, worst, 1e-3, 1.0);
            if !model.is_critical() {
                continue;
            }
            rec.push(format!("groupoidal s-spread d={d} {term}"), spread, 0.0, spread, 1e-6, 1.0);
            if p0.is_some() {
                rec.push(format!("log kernel residue equals -p0 d={d}"), worst_exact, 0.0, worst_exact, 1e-6, 1.0);
            } else if homog {
                rec.push(format!("degree-0 kernel residue vanishes d={d} {term}"), worst_exact, 0.0, worst_exact, 1e-6, 1.0);
            }
        }
    }
    Ok(())
}

/// Wodzicki through the numerical Fourier transfer of the kernel alone.
pub fn kernel_only_wodzicki_checks(rec: &mut Recorder) -> Result<()> {
    for d in 1..=2 {
        let g = Grading::trivial(d)?;
        let full = CatalogTerm::LogKernel { p0: Coefficient::Constant(1.0) }.build(&g)?;
        let model = OperatorModel::new("log kernel only", g, -(d as i32), None, full.kernel().cloned())?;
        let w = wodzicki_residue_at(&model, &vec![0.0; d], &sphere_quadrature(d, 4)?, &FourierOptions::default())?;
        rec.push(format!("wodzicki from kernel transfer d={d}"), w.value.re, -1.0, (w.value + 1.0).norm(), 1e-3, 1.0);
    }
    Ok(())
}

fn odd_term(g: &Grading) -> HomogeneousTerm {
    let gg = g.clone();
    HomogeneousTerm::new(g.clone(), -4.0, "xi1*gauge^-5", move |_, xi| Complex64::new(xi[1] * gg.gauge(xi).powi(-5), 0.0))
}

/// The ℍ₁ models used by the Ponge/groupoidal comparison.
pub fn heisenberg_catalog() -> Result<Vec<OperatorModel>> {
    let g = Grading::heisenberg(1, 0)?;
    let koranyi = CatalogTerm::GradedNormPower { m: -4 }.build(&g)?;
    let quartic = CatalogTerm::NormPower { m: -4 }.build(&g)?;
    let odd = OperatorModel::new("odd", g.clone(), -4, Some(PolySymbol::new(-4, vec![odd_term(&g)])?), None)?;
    let k = koranyi.symbol().map(|s| s.terms()[0].clone()).ok_or_else(|| Error::MissingTerm("gauge".into()))?;
    let sum = OperatorModel::new("gauge^-4 + odd", g.clone(), -4, Some(PolySymbol::new(-4, vec![k.sum(&odd_term(&g))?])?), None)?;
    Ok(vec![koranyi, quartic, odd, sum])
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Ponge's residue of (ξ₀² + (ξ₁² + ξ₂²)²)^{−1} on ℍ₁ by a 1-D polar reduction
/// with t = ξ₀ on S², using dσ alone.
pub fn koranyi_polar_oracle_plain() -> f64 {
    let f = |t: f64| 1.0 / (t * t + (1.0 - t * t).powi(2));
    2.0 * PI * adaptive_simpson(&f, -1.0, 1.0, 1e-14) / (2.0 * PI).powi(3)
}

/// The same reduction with the Euler density J = 2ξ₀² + ξ₁² + ξ₂² = 1 + t².
pub fn koranyi_polar_oracle_weighted() -> f64 {
    let f = |t: f64| (1.0 + t * t) / (t * t + (1.0 - t * t).powi(2));
    2.0 * PI * adaptive_simpson(&f, -1.0, 1.0, 1e-14) / (2.0 * PI).powi(3)
}

/// Ponge against the symbol-side groupoidal residue on ℍ₁, and the polar oracles.
pub fn heisenberg_equivalence_checks(rec: &mut Recorder) -> Result<()> {
    let rule = sphere_quadrature(3, 64)?;
    let x = [0.0; 3];
    for model in heisenberg_catalog()? {
        let eq = ponge_groupoidal_equiv(&model, &x, &[0.5, 2.0, 3.0], &rule, &EquivalenceOptions::default())?;
        let worst = eq.checks.iter().map(|c| (c.measured - c.predicted).norm()).fold(0.0, f64::max);
        let c0phi = eq.from_c0.norm() * (2.0 * PI).powi(3);
        rec.push(format!("ponge cocycle certification {}", model.label()), worst, 0.0, worst, 1e-4, 1.0 + c0phi);
        let scale = eq.ponge.norm().max(eq.groupoidal.norm()) + 1e-7;
        rec.push(format!("ponge vs groupoidal {}", model.label()), eq.groupoidal.re, eq.ponge.re, eq.delta, 1e-3, scale);
    }
    let koranyi = CatalogTerm::GradedNormPower { m: -4 }.build(&Grading::heisenberg(1, 0)?)?;
    let ponge = ponge_residue_at(&koranyi, &x, &rule)?.re;
    let plain = koranyi_polar_oracle_plain();
    rec.push_full(
        "ponge vs polar oracle with plain sphere measure".into(),
        ponge,
        plain,
        (ponge - plain).abs(),
        1e-6,
        plain.abs(),
        true,
        true,
        "the residue integrates against the Euler-weighted sphere measure".into(),
    );
    let weighted = koranyi_polar_oracle_weighted();
    rec.push("ponge vs polar oracle with Euler-weighted measure", ponge, weighted, (ponge - weighted).abs(), 1e-6, weighted.abs());
    Ok(())
}

/// ∫ Res_x dx for log|v|·p₀(x) with a unit-mass bump p₀ equals −1.
pub fn global_residue_check(rec: &mut Recorder) -> Result<()> {
    let g = Grading::trivial(2)?;
    let model = CatalogTerm::LogKernel { p0: Coefficient::Bump(0.8) }.build(&g)?;
    let v = global_residue(&model, &[(-1.0, 1.0), (-1.0, 1.0)], &[81, 81], &sphere_quadrature(2, 8)?, &FourierOptions::default())?;
    // independent oracle: radial quadrature of the bump
    let rule = gauss_legendre(32);
    let radial = integrate_panels(&uniform_breaks(0.0, 0.8, 0.025), &rule, |r| {
        let q = r * r / 0.64;
        if q >= 1.0 {
            0.0
        } else {
            2.0 * PI * r * (1.0 - 1.0 / (1.0 - q)).exp()
        }
    });
    let mass = crate::catalog::bump_mass(2, 0.8)?;
    let expected = -radial / mass;
    rec.push("global residue of bump log kernel", v.re, expected, (v.re - expected).abs() + v.im.abs(), 1e-6, 1.0);
    Ok(())
}

fn equivalence_suite(rec: &mut Recorder) -> Result<()> {
    let t = Instant::now();
    trivial_equivalence_checks(rec)?;
    let secs = t.elapsed().as_secs_f64();
    rec.push_full("trivial equivalence runtime (s)".into(), secs, 120.0, secs, 120.0, 1.0, false, false, String::new());
    kernel_only_wodzicki_checks(rec)?;
    heisenberg_equivalence_checks(rec)?;
    global_residue_check(rec)
}

/// A recorder for callers that assemble their own check lists.
pub fn recorder(suite: Suite, opts: &VerifyOptions) -> Recorder<'_> {
    Recorder { suite, opts, out: Vec::new() }
}

impl Recorder<'_> {
    pub fn results(self) -> Vec<CheckResult> {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Ft, Suite::Cocycle, Suite::Conv, Suite::Equivalence, Suite::All] {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
        assert_eq!(Suite::All.members().len(), 4);
    }

    #[test]
    fn tolerance_override_applies_only_where_allowed() {
        let opts = VerifyOptions { tol: Some(1e-2), ..Default::default() };
        let mut rec = recorder(Suite::Ft, &opts);
        rec.push("a", 0.0, 0.0, 5e-3, 1e-3, 1.0);
        rec.push_full("b".into(), 0.0, 0.0, 0.7, 0.5, 1.0, false, false, String::new());
        let r = rec.results();
        assert!(r[0].passed && !r[1].passed);
    }

    #[test]
    fn polar_oracles_differ_by_the_weight() {
        let p = koranyi_polar_oracle_plain();
        let w = koranyi_polar_oracle_weighted();
        assert!(w > p && p > 0.0);
    }

    #[test]
    fn simpson_on_polynomial() {
        let v = adaptive_simpson(&|t: f64| t * t * t * t, 0.0, 1.0, 1e-14);
        assert!((v - 0.2).abs() < 1e-13);
    }
}
