//! Residues of operators of critical order computed three ways: the
//! Wodzicki sphere integral, Ponge's graded sphere integral, and the
//! groupoidal zoom cocycle of the kernel.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::{Grading, SphereRule};
use crate::homog_dist::{c0, cocycle_prediction, dilation_cocycle, ExtendedHomogeneousDistribution, PairingOptions, TestFunction};
use crate::quadrature::richardson;
use crate::symbols::{kernel_term_to_symbol_term, CutoffFunction, FourierOptions, KernelExpansion, PolySymbol};

/// Extra smooth function added to the kernel, of (x, v).
pub type Perturbation = Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>;

/// An operator on a model space, described by its symbol and/or kernel
/// expansion near the diagonal.
#[derive(Clone)]
pub struct OperatorModel {
    label: String,
    grading: Grading,
    order: i32,
    domain: Vec<(f64, f64)>,
    symbol: Option<PolySymbol>,
    kernel: Option<KernelExpansion>,
    cutoff: CutoffFunction,
}

impl fmt::Debug for OperatorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorModel")
            .field("label", &self.label)
            .field("weights", &self.grading.weights())
            .field("order", &self.order)
            .field("symbol", &self.symbol.is_some())
            .field("kernel", &self.kernel)
            .finish()
    }
}

impl OperatorModel {
    /// Default cutoff r₀ = 1/2, r₁ = 1 and domain [−1, 1]^dim.
    pub fn new(
        label: impl Into<String>,
        grading: Grading,
        order: i32,
        symbol: Option<PolySymbol>,
        kernel: Option<KernelExpansion>,
    ) -> Result<Self> {
        let dh = grading.homogeneous_dimension() as i32;
        if order > -dh {
            return Err(Error::invalid(format!("order {order} is above the critical order {}", -dh)));
        }
        if symbol.is_none() && kernel.is_none() {
            return Err(Error::invalid("an operator model needs a symbol or a kernel"));
        }
        if let Some(s) = &symbol {
            if s.order() != order || s.grading() != &grading {
                return Err(Error::invalid("symbol order or grading does not match the model"));
            }
        }
        if let Some(k) = &kernel {
            if k.leading_degree() != -order - dh {
                return Err(Error::invalid(format!(
                    "kernel leading degree {} should be −m − d_H = {}",
                    k.leading_degree(),
                    -order - dh
                )));
            }
            if k.terms().iter().any(|t| t.grading() != &grading) {
                return Err(Error::invalid("kernel terms must use the model grading"));
            }
        }
        let cutoff = CutoffFunction::new(0.5, 1.0, grading.clone())?;
        let domain = vec![(-1.0, 1.0); grading.dim()];
        Ok(OperatorModel {
            label: label.into(),
            grading,
            order,
            domain,
            symbol,
            kernel,
            cutoff,
        })
    }

    pub fn with_cutoff(mut self, cutoff: CutoffFunction) -> Result<Self> {
        if cutoff.grading() != &self.grading {
            return Err(Error::invalid("cutoff grading does not match the model"));
        }
        self.cutoff = cutoff;
        Ok(self)
    }

    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Result<Self> {
        Error::check_dim(self.grading.dim(), domain.len())?;
        self.domain = domain;
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn grading(&self) -> &Grading {
        &self.grading
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn symbol(&self) -> Option<&PolySymbol> {
        self.symbol.as_ref()
    }

    pub fn kernel(&self) -> Option<&KernelExpansion> {
        self.kernel.as_ref()
    }

    pub fn cutoff(&self) -> &CutoffFunction {
        &self.cutoff
    }

    pub fn is_critical(&self) -> bool {
        self.order == -(self.grading.homogeneous_dimension() as i32)
    }
}

/// Where the degree −d symbol came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolSource {
    Symbol,
    KernelFourier,
    BelowCritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WodzickiResult {
    pub value: Complex64,
    pub source: SymbolSource,
    /// Largest Fourier-limit error estimate over the sphere nodes, if used.
    pub transfer_error: Option<f64>,
}

/// (2π)^{−d} ∫_{S^{d−1}} a_{−d}(x, ξ) dσ(ξ) on a trivial grading.
///
/// Without a symbol term of degree −d the degree-0 kernel term is carried
/// over to the symbol side numerically at every sphere node.
pub fn wodzicki_residue_at(
    model: &OperatorModel,
    x: &[f64],
    rule: &SphereRule,
    fourier: &FourierOptions,
) -> Result<WodzickiResult> {
    let g = &model.grading;
    if !g.is_trivial() {
        return Err(Error::invalid("the Wodzicki residue needs a trivial grading"));
    }
    let d = g.dim();
    Error::check_dim(d, rule.dim)?;
    let norm = (2.0 * PI).powi(-(d as i32));
    if model.order < -(d as i32) {
        return Ok(WodzickiResult {
            value: Complex64::new(0.0, 0.0),
            source: SymbolSource::BelowCritical,
            transfer_error: None,
        });
    }
    if let Some(term) = model.symbol.as_ref().and_then(|s| s.term_of_degree(-(d as i32))) {
        let v = rule.integrate_complex(|w| term.eval(x, w))?;
        return Ok(WodzickiResult {
            value: v * norm,
            source: SymbolSource::Symbol,
            transfer_error: None,
        });
    }
    let k0 = model
        .kernel
        .as_ref()
        .and_then(|k| k.term_of_degree(0))
        .ok_or_else(|| Error::MissingTerm(format!("{}: no degree −{d} symbol and no degree-0 kernel term", model.label)))?;
    let psi = CutoffFunction::new(0.5, 1.0, g.clone())?;
    let ts = [8.0, 16.0, 32.0, 64.0];
    let values: Vec<(Complex64, f64)> = rule
        .nodes
        .iter()
        .map(|w| {
            let lim = kernel_term_to_symbol_term(k0, x, &psi, &ts, w, fourier)?;
            Ok((lim.value, lim.error))
        })
        .collect::<Result<_>>()?;
    let v: Complex64 = values.iter().zip(&rule.weights).map(|(a, w)| a.0 * w).sum();
    let err = values.iter().map(|a| a.1).fold(0.0, f64::max);
    Ok(WodzickiResult {
        value: v * norm,
        source: SymbolSource::KernelFourier,
        transfer_error: Some(err),
    })
}

/// F_s along the sampling path and its extrapolated value at v = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleSample {
    pub s: f64,
    pub radii: Vec<f64>,
    pub values: Vec<Complex64>,
    pub limit: Complex64,
    pub error: f64,
    pub error_history: Vec<f64>,
}

impl CocycleSample {
    pub fn residue_estimate(&self) -> Complex64 {
        self.limit / self.s.ln()
    }
}

/// Sampling path and extrapolation settings for the cocycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleOptions {
    /// Unit direction e; the path is δ_r(e) for r in `radii`.
    pub direction: Option<Vec<f64>>,
    pub radii: Vec<f64>,
}

impl Default for CocycleOptions {
    fn default() -> Self {
        CocycleOptions {
            direction: None,
            radii: (4..=20).map(|k| 0.5f64.powi(k)).collect(),
        }
    }
}

fn default_direction(dim: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|i| 1.0 - 0.37 * i as f64 / dim as f64).collect();
    let n = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    raw.iter().map(|v| v / n).collect()
}

/// F_s(v) = k̃(x, δ_{1/s}v) − k̃(x, v), with k̃ = χ·Σ k_j + remainder
/// (+ perturbation), sampled along v = δ_r(e) and extrapolated to r = 0.
pub fn cocycle_sample(
    model: &OperatorModel,
    x: &[f64],
    s: f64,
    opts: &CocycleOptions,
    perturbation: Option<&Perturbation>,
) -> Result<CocycleSample> {
    if !(s > 0.0 && s.is_finite()) || s == 1.0 {
        return Err(Error::invalid(format!("cocycle needs s > 0 and s ≠ 1, got {s}")));
    }
    let kernel = model
        .kernel
        .as_ref()
        .ok_or_else(|| Error::MissingTerm(format!("{}: no kernel expansion", model.label)))?;
    let g = &model.grading;
    let e = match &opts.direction {
        Some(e) => {
            Error::check_dim(g.dim(), e.len())?;
            e.clone()
        }
        None => default_direction(g.dim()),
    };
    if opts.radii.len() < 2 {
        return Err(Error::invalid("the cocycle needs at least two sample radii"));
    }
    let k = |v: &[f64]| -> Result<Complex64> {
        let mut val = kernel.eval(&model.cutoff, x, v)?;
        if let Some(p) = perturbation {
            val += p(x, v);
        }
        Ok(val)
    };
    let values: Vec<Complex64> = opts
        .radii
        .iter()
        .map(|&r| {
            let v = g.dilate(r, &e)?;
            Ok(k(&g.dilate(1.0 / s, &v)?)? - k(&v)?)
        })
        .collect::<Result<_>>()?;
    let ex = richardson(&opts.radii, &values, 1.0, 1.0)?;
    let first = ex.error_history[0];
    let floor = 1e-12 * (1.0 + ex.value.norm());
    if ex.error > floor && ex.error > first {
        return Err(Error::NonConvergence {
            what: format!("cocycle extrapolation at s = {s}"),
            detail: format!("error estimates {:?}", ex.error_history),
        });
    }
    Ok(CocycleSample {
        s,
        radii: opts.radii.clone(),
        values,
        limit: ex.value,
        error: ex.error,
        error_history: ex.error_history,
    })
}

/// Groupoidal residue with its per-s evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupoidalResult {
    pub value: Complex64,
    pub spread: f64,
    pub samples: Vec<CocycleSample>,
    /// True when the order is below critical and the value was set to 0.
    pub below_critical: bool,
}

/// F_s(0)/log s for each s, combined as an error-weighted mean.
pub fn groupoidal_residue_at(
    model: &OperatorModel,
    x: &[f64],
    s_set: &[f64],
    opts: &CocycleOptions,
) -> Result<GroupoidalResult> {
    groupoidal_with(model, x, s_set, opts, None)
}

fn groupoidal_with(
    model: &OperatorModel,
    x: &[f64],
    s_set: &[f64],
    opts: &CocycleOptions,
    perturbation: Option<&Perturbation>,
) -> Result<GroupoidalResult> {
    if s_set.is_empty() {
        return Err(Error::invalid("s_set is empty"));
    }
    let samples: Vec<CocycleSample> = s_set
        .par_iter()
        .map(|&s| cocycle_sample(model, x, s, opts, perturbation))
        .collect::<Result<_>>()?;
    let estimates: Vec<(Complex64, f64)> = samples
        .iter()
        .map(|c| (c.residue_estimate(), c.error / c.s.ln().abs()))
        .collect();
    let weights: Vec<f64> = estimates.iter().map(|e| 1.0 / (e.1 * e.1 + 1e-30)).collect();
    let total: f64 = weights.iter().sum();
    let mean: Complex64 = estimates.iter().zip(&weights).map(|(e, w)| e.0 * *w).sum::<Complex64>() / total;
    let spread = estimates.iter().map(|e| (e.0 - mean).norm()).fold(0.0, f64::max);
    let below = !model.is_critical();
    Ok(GroupoidalResult {
        value: if below { Complex64::new(0.0, 0.0) } else { mean },
        spread,
        samples,
        below_critical: below,
    })
}

/// (2π)^{−dim} ∫_{S^{dim−1}} p_{−d_H}(x, ξ) J(ξ) dσ(ξ), |dΨ_x| = 1 in model
/// coordinates. J is the graded Euler density, see [`c0`].
pub fn ponge_residue_at(model: &OperatorModel, x: &[f64], rule: &SphereRule) -> Result<Complex64> {
    let g = &model.grading;
    if g.is_trivial() || !g.weights().contains(&2) {
        return Err(Error::invalid("the Ponge residue needs a Heisenberg grading"));
    }
    let dh = g.homogeneous_dimension() as i32;
    if model.order < -dh {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let p = model
        .symbol
        .as_ref()
        .and_then(|s| s.term_of_degree(-dh))
        .ok_or_else(|| Error::MissingTerm(format!("{}: no symbol term of degree {}", model.label, -dh)))?;
    Ok(c0(p, x, rule)? * (2.0 * PI).powi(-(g.dim() as i32)))
}

/// One s of the cocycle certification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleCheck {
    pub s: f64,
    pub measured: Complex64,
    pub predicted: Complex64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub ponge: Complex64,
    /// Residue read off the measured dilation cocycles of the symbol.
    pub groupoidal: Complex64,
    pub groupoidal_per_s: Vec<Complex64>,
    /// (2π)^{−dim} c0, the closed-form groupoidal value.
    pub from_c0: Complex64,
    pub checks: Vec<CocycleCheck>,
    pub certified: bool,
    pub delta: f64,
    pub agree: bool,
}

/// Tolerances for [`ponge_groupoidal_equiv`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceOptions {
    pub cocycle_tol: f64,
    pub agreement_tol: f64,
    pub pairing: PairingOptions,
}

impl Default for EquivalenceOptions {
    fn default() -> Self {
        EquivalenceOptions {
            cocycle_tol: 1e-4,
            agreement_tol: 1e-3,
            pairing: PairingOptions::default(),
        }
    }
}

/// Compare Ponge's residue with the symbol-side groupoidal residue.
///
/// For each s the cocycle of the canonical extension u of p_{−d_H} is
/// measured against a bump with φ(0) = 1. The identity
/// cocycle = s^{−d_H} log(s) c0(u) φ(0) is certified, and the measured
/// cocycle yields the residue s^{d_H}·cocycle/(log(s)(2π)^{dim}).
pub fn ponge_groupoidal_equiv(
    model: &OperatorModel,
    x: &[f64],
    s_set: &[f64],
    rule: &SphereRule,
    opts: &EquivalenceOptions,
) -> Result<EquivalenceReport> {
    let ponge = ponge_residue_at(model, x, rule)?;
    let g = &model.grading;
    let dh = g.homogeneous_dimension() as i32;
    let p = model
        .symbol
        .as_ref()
        .and_then(|s| s.term_of_degree(-dh))
        .ok_or_else(|| Error::MissingTerm(format!("{}: no symbol term of degree {}", model.label, -dh)))?;
    let u = ExtendedHomogeneousDistribution::new(p.clone(), x.to_vec())?;
    let c = c0(p, x, rule)?;
    let phi = TestFunction::bump(g.dim(), 1.0)?;
    let phi0 = phi.value_at_zero();
    let norm = (2.0 * PI).powi(-(g.dim() as i32));

    let mut checks = Vec::with_capacity(s_set.len());
    let mut per_s = Vec::with_capacity(s_set.len());
    for &s in s_set {
        let measured = dilation_cocycle(&u, s, &phi, &opts.pairing)?;
        let predicted = cocycle_prediction(c, g, s, phi0);
        let passed = (measured - predicted).norm() <= opts.cocycle_tol * (1.0 + (c * phi0).norm());
        checks.push(CocycleCheck { s, measured, predicted, passed });
        per_s.push(measured * s.powi(dh) / (s.ln() * phi0) * norm);
    }
    let groupoidal = per_s.iter().sum::<Complex64>() / per_s.len().max(1) as f64;
    let delta = (groupoidal - ponge).norm();
    let scale = ponge.norm().max(groupoidal.norm());
    let agree = delta <= opts.agreement_tol * scale || delta <= 1e-10;
    Ok(EquivalenceReport {
        ponge,
        groupoidal,
        groupoidal_per_s: per_s,
        from_c0: c * norm,
        certified: checks.iter().all(|c| c.passed),
        checks,
        delta,
        agree,
    })
}

/// Trapezoid integral of the residue density over the grid Π[aᵢ, bᵢ] with
/// `shape` nodes per axis: Wodzicki on trivial gradings, Ponge otherwise.
/// The density must vanish on the boundary of the region.
pub fn global_residue(
    model: &OperatorModel,
    region: &[(f64, f64)],
    shape: &[usize],
    rule: &SphereRule,
    fourier: &FourierOptions,
) -> Result<Complex64> {
    let d = model.grading.dim();
    Error::check_dim(d, region.len())?;
    Error::check_dim(d, shape.len())?;
    if shape.iter().any(|&n| n < 2) {
        return Err(Error::invalid("need at least two nodes per axis"));
    }
    let total: usize = shape.iter().product();
    let h: Vec<f64> = region
        .iter()
        .zip(shape)
        .map(|(&(a, b), &n)| (b - a) / (n - 1) as f64)
        .collect();
    let results: Vec<(Complex64, f64, bool)> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rest = flat;
            let mut x = vec![0.0; d];
            let mut w = 1.0;
            let mut edge = false;
            for a in (0..d).rev() {
                let i = rest % shape[a];
                rest /= shape[a];
                x[a] = region[a].0 + i as f64 * h[a];
                if i == 0 || i == shape[a] - 1 {
                    w *= 0.5;
                    edge = true;
                }
                w *= h[a];
            }
            let v = if model.grading.is_trivial() {
                wodzicki_residue_at(model, &x, rule, fourier)?.value
            } else {
                ponge_residue_at(model, &x, rule)?
            };
            Ok((v, w, edge))
        })
        .collect::<Result<_>>()?;
    let peak = results.iter().map(|r| r.0.norm()).fold(0.0, f64::max);
    let boundary = results.iter().filter(|r| r.2).map(|r| r.0.norm()).fold(0.0, f64::max);
    if boundary > 1e-12 * peak.max(f64::MIN_POSITIVE) {
        return Err(Error::SupportOverflow(format!(
            "residue density is {boundary:.3e} on the region boundary"
        )));
    }
    Ok(results.iter().map(|r| r.0 * r.1).sum())
}

/// |Res with k̃ + perturbation − Res with k̃|.
pub fn representative_invariance_check(
    model: &OperatorModel,
    x: &[f64],
    perturbation: &Perturbation,
    s_set: &[f64],
    opts: &CocycleOptions,
) -> Result<f64> {
    let base = groupoidal_with(model, x, s_set, opts, None)?;
    let moved = groupoidal_with(model, x, s_set, opts, Some(perturbation))?;
    let pick = |r: &GroupoidalResult| {
        let w: Vec<Complex64> = r.samples.iter().map(|c| c.residue_estimate()).collect();
        w.iter().sum::<Complex64>() / w.len() as f64
    };
    Ok((pick(&moved) - pick(&base)).norm())
}

/// |F_{st}(0) − F_s(0) − F_t(0)|.
pub fn cocycle_homomorphism_check(
    model: &OperatorModel,
    x: &[f64],
    s: f64,
    t: f64,
    opts: &CocycleOptions,
) -> Result<f64> {
    let at = |scale: f64| -> Result<Complex64> {
        if scale == 1.0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Ok(cocycle_sample(model, x, scale, opts, None)?.limit)
        }
    };
    Ok((at(s * t)? - at(s)? - at(t)?).norm())
}

/// Settings shared by every per-point residue computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueSettings {
    pub s_set: Vec<f64>,
    pub sphere_degree: usize,
    pub cocycle: CocycleOptions,
    pub fourier: FourierOptions,
    pub equivalence: EquivalenceOptions,
    /// Relative tolerance for method agreement, applied as tol·(1 + |value|).
    pub agreement_tol: f64,
    /// Tolerance on the groupoidal s-spread, applied as tol·(1 + |value|).
    pub spread_tol: f64,
}

impl Default for ResidueSettings {
    fn default() -> Self {
        ResidueSettings {
            s_set: vec![1.0 / 3.0, 0.5, 2.0, 3.0],
            sphere_degree: 32,
            cocycle: CocycleOptions::default(),
            fourier: FourierOptions::default(),
            equivalence: EquivalenceOptions::default(),
            agreement_tol: 1e-3,
            spread_tol: 1e-6,
        }
    }
}

/// One pairwise comparison between two residue methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub methods: String,
    pub delta: f64,
    pub tolerance: f64,
    pub agree: bool,
}

/// Everything computed at one base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueReport {
    pub x: Vec<f64>,
    pub wodzicki: Option<WodzickiResult>,
    pub ponge: Option<Complex64>,
    pub groupoidal: Option<GroupoidalResult>,
    pub equivalence: Option<EquivalenceReport>,
    pub agreements: Vec<Agreement>,
    /// Methods that could not run for lack of data.
    pub unavailable: Vec<String>,
    /// Numerical failures and failed agreement or spread checks.
    pub failures: Vec<String>,
}

impl ResidueReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn record<T>(r: Result<T>, name: &str, unavailable: &mut Vec<String>, failures: &mut Vec<String>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(Error::MissingTerm(m)) => {
            unavailable.push(format!("{name}: {m}"));
            None
        }
        Err(e) => {
            failures.push(format!("{name}: {e}"));
            None
        }
    }
}

/// Run every residue method that applies to the model's grading at `x`
/// and cross-check the results.
pub fn residue_report(model: &OperatorModel, x: &[f64], settings: &ResidueSettings) -> Result<ResidueReport> {
    let g = &model.grading;
    Error::check_dim(g.dim(), x.len())?;
    let rule = crate::graded::sphere_quadrature(g.dim(), settings.sphere_degree)?;
    let mut unavailable = Vec::new();
    let mut failures = Vec::new();
    let mut agreements = Vec::new();

    let groupoidal = record(
        groupoidal_residue_at(model, x, &settings.s_set, &settings.cocycle),
        "groupoidal",
        &mut unavailable,
        &mut failures,
    );
    if let Some(gr) = &groupoidal {
        let bound = settings.spread_tol * (1.0 + gr.value.norm());
        if !gr.below_critical && gr.spread > bound {
            failures.push(format!("groupoidal: s-spread {:.3e} exceeds {bound:.3e}", gr.spread));
        }
    }
    let compare = |name: &str, a: Complex64, b: Complex64, agreements: &mut Vec<Agreement>, failures: &mut Vec<String>| {
        let delta = (a - b).norm();
        let tolerance = settings.agreement_tol * (1.0 + a.norm().max(b.norm()));
        let agree = delta <= tolerance;
        if !agree {
            failures.push(format!("{name}: delta {delta:.3e} exceeds {tolerance:.3e}"));
        }
        agreements.push(Agreement {
            methods: name.to_string(),
            delta,
            tolerance,
            agree,
        });
    };

    let (mut wodzicki, mut ponge, mut equivalence) = (None, None, None);
    if g.is_trivial() {
        wodzicki = record(
            wodzicki_residue_at(model, x, &rule, &settings.fourier),
            "wodzicki",
            &mut unavailable,
            &mut failures,
        );
        if let (Some(w), Some(gr)) = (&wodzicki, &groupoidal) {
            compare("wodzicki-groupoidal", w.value, gr.value, &mut agreements, &mut failures);
        }
    } else {
        ponge = record(ponge_residue_at(model, x, &rule), "ponge", &mut unavailable, &mut failures);
        if model.is_critical() && ponge.is_some() {
            equivalence = record(
                ponge_groupoidal_equiv(model, x, &settings.s_set, &rule, &settings.equivalence),
                "equivalence",
                &mut unavailable,
                &mut failures,
            );
        }
        if let Some(eq) = &equivalence {
            if !eq.certified {
                failures.push("equivalence: dilation cocycle identity not certified".into());
            }
            let delta = eq.delta;
            let tolerance = settings.equivalence.agreement_tol * eq.ponge.norm().max(eq.groupoidal.norm());
            agreements.push(Agreement {
                methods: "ponge-groupoidal(symbol)".into(),
                delta,
                tolerance,
                agree: eq.agree,
            });
            if !eq.agree {
                failures.push(format!("ponge-groupoidal(symbol): delta {delta:.3e} exceeds {tolerance:.3e}"));
            }
        }
        if let (Some(p), Some(gr)) = (ponge, &groupoidal) {
            compare("ponge-groupoidal(kernel)", p, gr.value, &mut agreements, &mut failures);
        }
    }
    Ok(ResidueReport {
        x: x.to_vec(),
        wodzicki,
        ponge,
        groupoidal,
        equivalence,
        agreements,
        unavailable,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{sphere_quadrature, surface_area};
    use crate::symbols::{HomogeneousTerm, PseudoHomogeneousTerm};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn log_model(d: usize, p0: f64) -> OperatorModel {
        let g = Grading::trivial(d).unwrap();
        let p = HomogeneousTerm::new(g.clone(), 0.0, "p0", move |_, _| Complex64::new(p0, 0.0));
        let k0 = PseudoHomogeneousTerm::new(HomogeneousTerm::zero(g.clone(), 0.0), Some(p)).unwrap();
        let kernel = KernelExpansion::new(0, vec![k0], None).unwrap();
        OperatorModel::new("log", g, -(d as i32), None, Some(kernel)).unwrap()
    }

    fn symbol_model(d: usize) -> OperatorModel {
        let g = Grading::trivial(d).unwrap();
        let a = HomogeneousTerm::new(g.clone(), -(d as f64), "|xi|^-d", move |_, xi| {
            Complex64::new(xi.iter().map(|v| v * v).sum::<f64>().powf(-(d as f64) / 2.0), 0.0)
        });
        let s = PolySymbol::new(-(d as i32), vec![a]).unwrap();
        OperatorModel::new("np", g, -(d as i32), Some(s), None).unwrap()
    }

    #[test]
    fn wodzicki_of_norm_power() {
        let rule = sphere_quadrature(2, 16).unwrap();
        let r = wodzicki_residue_at(&symbol_model(2), &[0.0, 0.0], &rule, &FourierOptions::default()).unwrap();
        assert_relative_eq!(r.value.re, 1.0 / (2.0 * PI), max_relative = 1e-14);
        assert_eq!(r.source, SymbolSource::Symbol);
    }

    #[test]
    fn wodzicki_of_log_kernel_through_fourier() {
        let rule = sphere_quadrature(2, 4).unwrap();
        let r = wodzicki_residue_at(&log_model(2, 1.5), &[0.0, 0.0], &rule, &FourierOptions::default()).unwrap();
        assert_eq!(r.source, SymbolSource::KernelFourier);
        assert!((r.value.re + 1.5).abs() < 1e-5, "{r:?}");
    }

    #[test]
    fn groupoidal_of_log_kernel() {
        let m = log_model(3, 2.0);
        let r = groupoidal_residue_at(&m, &[0.0; 3], &[1.0 / 3.0, 0.5, 2.0, 3.0], &CocycleOptions::default()).unwrap();
        assert!((r.value.re + 2.0).abs() < 1e-12, "{r:?}");
        assert!(r.spread < 1e-12);
        for c in &r.samples {
            assert!((c.limit.re + 2.0 * c.s.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_data_is_reported() {
        let rule = sphere_quadrature(2, 8).unwrap();
        let m = symbol_model(2);
        assert!(matches!(
            groupoidal_residue_at(&m, &[0.0, 0.0], &[2.0], &CocycleOptions::default()),
            Err(Error::MissingTerm(_))
        ));
        assert!(ponge_residue_at(&m, &[0.0, 0.0], &rule).is_err());
        assert!(cocycle_sample(&log_model(2, 1.0), &[0.0, 0.0], 1.0, &CocycleOptions::default(), None).is_err());
    }

    #[test]
    fn model_validation() {
        let g = Grading::trivial(2).unwrap();
        assert!(OperatorModel::new("x", g.clone(), -1, None, None).is_err());
        assert!(OperatorModel::new("x", g.clone(), -2, None, None).is_err());
        let kernel = KernelExpansion::new(1, vec![], None).unwrap();
        assert!(OperatorModel::new("x", g, -2, None, Some(kernel)).is_err());
    }

    #[test]
    fn homomorphism_on_log_kernel() {
        let m = log_model(2, 1.0);
        let o = CocycleOptions::default();
        assert!(cocycle_homomorphism_check(&m, &[0.0, 0.0], 2.0, 2.0, &o).unwrap() < 1e-12);
        assert!(cocycle_homomorphism_check(&m, &[0.0, 0.0], 2.0, 0.5, &o).unwrap() < 1e-12);
    }

    #[test]
    fn perturbations_do_not_move_the_residue() {
        let m = log_model(2, 1.0);
        let o = CocycleOptions::default();
        let s = [0.5, 2.0];
        let zero: Perturbation = Arc::new(|_, _| Complex64::new(0.0, 0.0));
        assert_eq!(representative_invariance_check(&m, &[0.0, 0.0], &zero, &s, &o).unwrap(), 0.0);
        for amp in [1.0, 10.0] {
            let bump: Perturbation = Arc::new(move |_, v| {
                Complex64::new(amp * (-(v[0] - 0.1).powi(2) - v[1] * v[1]).exp(), 0.0)
            });
            assert!(representative_invariance_check(&m, &[0.0, 0.0], &bump, &s, &o).unwrap() < 1e-6);
        }
    }

    #[test]
    fn global_residue_of_bump_density() {
        let g = Grading::trivial(2).unwrap();
        let p = HomogeneousTerm::new(g.clone(), -2.0, "bump", |x, xi| {
            let q = (x[0] * x[0] + x[1] * x[1]) / 0.64;
            let b = if q < 1.0 { (1.0 - 1.0 / (1.0 - q)).exp() } else { 0.0 };
            Complex64::new(b * xi.iter().map(|v| v * v).sum::<f64>().powi(-1), 0.0)
        });
        let s = PolySymbol::new(-2, vec![p]).unwrap();
        let m = OperatorModel::new("bump", g, -2, Some(s), None).unwrap();
        let rule = sphere_quadrature(2, 8).unwrap();
        let got = global_residue(&m, &[(-1.0, 1.0), (-1.0, 1.0)], &[81, 81], &rule, &FourierOptions::default()).unwrap();
        // density is bump(x)/(2π); ∫ bump over ℝ² in polar coordinates
        let gl = crate::quadrature::gauss_legendre(40);
        let radial = gl.integrate(0.0, 0.8, |r| {
            let q = r * r / 0.64;
            r * (1.0 - 1.0 / (1.0 - q)).exp()
        });
        let expect = 2.0 * PI * radial / (2.0 * PI);
        assert_relative_eq!(got.re, expect, max_relative = 1e-6);
        assert!(matches!(
            global_residue(&m, &[(-0.5, 0.5), (-0.5, 0.5)], &[11, 11], &rule, &FourierOptions::default()),
            Err(Error::SupportOverflow(_))
        ));
    }

    #[test]
    fn global_residue_on_heisenberg_uses_ponge() {
        let g = Grading::heisenberg(1, 0).unwrap();
        let bump = |x: &[f64]| {
            let q = x.iter().map(|v| v * v).sum::<f64>() / 0.64;
            if q < 1.0 {
                (1.0 - 1.0 / (1.0 - q)).exp()
            } else {
                0.0
            }
        };
        let gg = g.clone();
        let p = HomogeneousTerm::new(g.clone(), -4.0, "bump*gauge^-4", move |x, xi| Complex64::new(bump(x) * gg.gauge(xi).powi(-4), 0.0));
        let m = OperatorModel::new("bump", g, -4, Some(PolySymbol::new(-4, vec![p]).unwrap()), None).unwrap();
        let rule = sphere_quadrature(3, 32).unwrap();
        let n = 31;
        let got = global_residue(&m, &[(-1.0, 1.0); 3], &[n; 3], &rule, &FourierOptions::default()).unwrap();
        // the same trapezoid rule applied to the bump, times Res(gauge^-4) = 1/(4π)
        let h = 2.0 / (n - 1) as f64;
        let w = |i: usize| if i == 0 || i == n - 1 { 0.5 * h } else { h };
        let mut mass = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let x = [-1.0 + i as f64 * h, -1.0 + j as f64 * h, -1.0 + k as f64 * h];
                    mass += w(i) * w(j) * w(k) * bump(&x);
                }
            }
        }
        assert_relative_eq!(got.re, mass / (4.0 * PI), max_relative = 1e-6);
    }

    #[test]
    fn heisenberg_equivalence_for_koranyi_power() {
        let g = Grading::heisenberg(1, 0).unwrap();
        let gg = g.clone();
        let p = HomogeneousTerm::new(g.clone(), -4.0, "gauge^-4", move |_, xi| Complex64::new(gg.gauge(xi).powi(-4), 0.0));
        let s = PolySymbol::new(-4, vec![p]).unwrap();
        let m = OperatorModel::new("k", g, -4, Some(s), None).unwrap();
        let rule = sphere_quadrature(3, 64).unwrap();
        let r = ponge_groupoidal_equiv(&m, &[0.0; 3], &[0.5, 2.0, 3.0], &rule, &EquivalenceOptions::default()).unwrap();
        assert!(r.certified && r.agree, "{r:?}");
        assert!((r.from_c0 - r.ponge).norm() < 1e-14);
    }

    #[test]
    fn report_for_log_kernel() {
        let r = residue_report(&log_model(2, 1.0), &[0.0, 0.0], &ResidueSettings::default()).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!((r.wodzicki.unwrap().value.re + 1.0).abs() < 1e-5);
        assert!((r.groupoidal.unwrap().value.re + 1.0).abs() < 1e-12);
        assert_eq!(r.agreements.len(), 1);
        let r = residue_report(&symbol_model(2), &[0.0, 0.0], &ResidueSettings::default()).unwrap();
        assert!(r.passed() && r.groupoidal.is_none() && r.unavailable.len() == 1);
    }

    #[test]
    fn trivial_normalization() {
        // ω_d/(2π)^d from the closed form matches the symbol integral
        for d in 1..=3 {
            let rule = sphere_quadrature(d, 8).unwrap();
            let r = wodzicki_residue_at(&symbol_model(d), &vec![0.0; d], &rule, &FourierOptions::default()).unwrap();
            assert_relative_eq!(r.value.re, surface_area(d).unwrap() / (2.0 * PI).powi(d as i32), max_relative = 1e-13);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn groupoidal_is_linear_in_p0(a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let x = [0.1, -0.2];
            let s = [0.5, 2.0, 3.0];
            let o = CocycleOptions::default();
            let ra = groupoidal_residue_at(&log_model(2, a), &x, &s, &o).unwrap().value;
            let rb = groupoidal_residue_at(&log_model(2, b), &x, &s, &o).unwrap().value;
            let rab = groupoidal_residue_at(&log_model(2, a + b), &x, &s, &o).unwrap().value;
            prop_assert!((rab - ra - rb).norm() <= 1e-12 * (1.0 + rab.norm()));
        }
    }
}
