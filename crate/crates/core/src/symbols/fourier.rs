//! Numerical Fourier transform of kernels with at most polynomial growth,
//! as the limit of ∫ k(z) ψ(z/t) e^{−iξ·z} dz for t → ∞.
//!
//! The kernel is split with a radial cutoff χ₀ at the scale of one
//! half-wavelength. The compact part χ₀k is integrated directly in polar
//! coordinates. For the smooth far part g = (1−χ₀)k we use the identity
//! ĝ(ξ) = (2i)^{−N} (Δ_h^N g)^(ξ) for the central difference along
//! h = πξ/|ξ|², which trades growth of g for decay of Δ_h^N g.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{smooth_step, CutoffFunction, PseudoHomogeneousTerm};
use crate::error::{Error, Result};
use crate::graded::{sphere_quadrature, SphereRule};
use crate::quadrature::{gauss_legendre, geometric_breaks, uniform_breaks};

/// Resolution knobs for [`fourier_limit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierOptions {
    /// Sphere degree for the inner ball.
    pub inner_degree: usize,
    /// Sphere degree added on top of what the phase needs.
    pub angular_margin: usize,
    /// Gauss–Legendre nodes per radial panel.
    pub radial_nodes: usize,
    /// Geometric refinement levels toward the origin.
    pub singular_levels: usize,
}

impl Default for FourierOptions {
    fn default() -> Self {
        FourierOptions {
            inner_degree: 48,
            angular_margin: 24,
            radial_nodes: 10,
            singular_levels: 60,
        }
    }
}

/// Fourier limit with the raw values for each t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierLimit {
    pub value: Complex64,
    pub error: f64,
    pub per_t: Vec<(f64, Complex64)>,
    pub difference_order: usize,
}

/// lim_{t→∞} ∫_{ℝ^d} k(z) ψ(z/t) e^{−iξ·z} dz on the trivial grading.
///
/// `growth` is the homogeneity degree bounding k at infinity (a log factor
/// is allowed); `None` declares k rapidly decreasing.
pub fn fourier_limit<F>(
    k: F,
    growth: Option<f64>,
    psi: &CutoffFunction,
    t_sequence: &[f64],
    xi: &[f64],
    opts: &FourierOptions,
) -> Result<FourierLimit>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let d = xi.len();
    if !psi.grading().is_trivial() || psi.grading().dim() != d {
        return Err(Error::invalid("the Fourier limit needs a trivial grading matching ξ"));
    }
    let xnorm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if xnorm == 0.0 || !xnorm.is_finite() {
        return Err(Error::invalid("ξ must be a finite nonzero point"));
    }
    if t_sequence.len() < 2 || t_sequence.windows(2).any(|w| !(w[1] > w[0])) || t_sequence[0] <= 0.0 {
        return Err(Error::invalid("t_sequence must be positive and strictly increasing with at least two entries"));
    }
    let n_diff = match growth {
        None => 0,
        Some(g) => {
            let n = (g.ceil().max(-(d as f64)) as i64 + d as i64 + 2).max(0) as usize;
            n + n % 2
        }
    };

    let hlen = PI / xnorm;
    let h: Vec<f64> = xi.iter().map(|v| v * PI / (xnorm * xnorm)).collect();
    let inner = hlen / 4.0;
    let chi0 = |r: f64| smooth_step((hlen - r) / (hlen - inner));
    let gl = gauss_legendre(opts.radial_nodes);

    let mut rules: BTreeMap<usize, SphereRule> = BTreeMap::new();
    let mut rule_for = |deg: usize| -> Result<usize> {
        let deg = deg.div_ceil(8) * 8;
        if !rules.contains_key(&deg) {
            rules.insert(deg, sphere_quadrature(d, deg)?);
        }
        Ok(deg)
    };

    // radial nodes: (ρ, weight, sphere degree, inner part?)
    let mut radial: Vec<(f64, f64, usize, bool)> = Vec::new();

    let mut inner_breaks = geometric_breaks(inner, opts.singular_levels);
    inner_breaks.extend(uniform_breaks(inner, hlen, hlen / 16.0).into_iter().skip(1));
    let inner_deg = rule_for(opts.inner_degree + 4)?;
    for w in inner_breaks.windows(2) {
        for (r, wr) in gl.mapped(w[0], w[1]) {
            radial.push((r, wr, inner_deg, true));
        }
    }

    let t_max = *t_sequence.last().unwrap();
    let r_max = t_max * psi.r1();
    let near = (n_diff as f64 / 2.0 + 2.0) * hlen;
    let mut cuts = vec![0.0, near.min(r_max), r_max];
    for &t in t_sequence {
        cuts.push(t * psi.r0());
        cuts.push(t * psi.r1());
    }
    cuts.retain(|&c| c <= r_max);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * r_max);
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let width = if b <= near { hlen / 8.0 } else { hlen.min((b - a) / 8.0) };
        for p in uniform_breaks(a, b, width).windows(2) {
            for (r, wr) in gl.mapped(p[0], p[1]) {
                let phase = (1.1 * r * xnorm).ceil() as usize;
                let margin = if r <= near {
                    2 * opts.angular_margin + 8 * n_diff
                } else {
                    opts.angular_margin + 2 * n_diff
                };
                radial.push((r, wr, rule_for(phase + margin)?, false));
            }
        }
    }

    let coeffs: Vec<(f64, f64)> = (0..=n_diff)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            (sign * binomial(n_diff, j), n_diff as f64 / 2.0 - j as f64)
        })
        .collect();
    let g = |z: &[f64]| -> Complex64 {
        let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let c = 1.0 - chi0(r);
        if c == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            k(z) * c
        }
    };

    let contributions: Vec<Complex64> = radial
        .par_iter()
        .map(|&(r, wr, deg, is_inner)| {
            let rule = &rules[&deg];
            let mut z = vec![0.0; d];
            let mut acc = Complex64::new(0.0, 0.0);
            for (omega, &w) in rule.nodes.iter().zip(&rule.weights) {
                let mut phase = 0.0;
                for i in 0..d {
                    phase += xi[i] * omega[i];
                }
                let val = if is_inner {
                    for i in 0..d {
                        z[i] = r * omega[i];
                    }
                    k(&z)
                } else {
                    let mut s = Complex64::new(0.0, 0.0);
                    for &(c, a) in &coeffs {
                        for i in 0..d {
                            z[i] = r * omega[i] + a * h[i];
                        }
                        s += g(&z) * c;
                    }
                    s
                };
                acc += val * Complex64::from_polar(w, -r * phase);
            }
            let radial_weight = wr * r.powi(d as i32 - 1);
            if is_inner {
                acc * radial_weight * chi0(r)
            } else {
                acc * radial_weight
            }
        })
        .collect();

    let scale = Complex64::new(0.0, 2.0).powi(-(n_diff as i32));
    let per_t: Vec<(f64, Complex64)> = t_sequence
        .iter()
        .map(|&t| {
            let mut total = Complex64::new(0.0, 0.0);
            for (&(r, _, _, is_inner), &c) in radial.iter().zip(&contributions) {
                let cut = psi.profile(r / t);
                if cut != 0.0 {
                    total += if is_inner { c * cut } else { c * cut * scale };
                }
            }
            (t, total)
        })
        .collect();

    // D·(1 − ψ(·/t)) is smooth and symbol-like, so the values converge
    // faster than any power of 1/t; the last value is the estimate and the
    // last difference its error.
    let diffs: Vec<f64> = per_t.windows(2).map(|w| (w[1].1 - w[0].1).norm()).collect();
    let value = per_t.last().unwrap().1;
    let error = *diffs.last().unwrap();
    let floor = 1e-12 * value.norm().max(1e-300);
    if error > floor && error > diffs[0] {
        return Err(Error::NonConvergence {
            what: "Fourier t-limit".into(),
            detail: format!("differences {diffs:?} do not decrease"),
        });
    }
    Ok(FourierLimit {
        value,
        error,
        per_t,
        difference_order: n_diff,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Symbol value of a pseudo-homogeneous kernel term at (x, ξ): the Fourier
/// limit of z ↦ k(x, z). The term's degree must exceed −d so the result is
/// a symbol of negative degree.
pub fn kernel_term_to_symbol_term(
    term: &PseudoHomogeneousTerm,
    x: &[f64],
    psi: &CutoffFunction,
    t_sequence: &[f64],
    xi: &[f64],
    opts: &FourierOptions,
) -> Result<FourierLimit> {
    let d = term.grading().dim();
    if !term.grading().is_trivial() {
        return Err(Error::invalid("kernel to symbol transfer is only available for trivial gradings"));
    }
    Error::check_dim(d, xi.len())?;
    if term.degree() <= -(d as f64) {
        return Err(Error::invalid(format!(
            "kernel degree {} gives a symbol of nonnegative degree in dimension {d}",
            term.degree()
        )));
    }
    fourier_limit(|z| term.eval_raw(x, z), Some(term.degree()), psi, t_sequence, xi, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{surface_area, Grading};
    use crate::symbols::HomogeneousTerm;

    fn psi(d: usize) -> CutoffFunction {
        CutoffFunction::new(0.5, 1.0, Grading::trivial(d).unwrap()).unwrap()
    }

    fn default_t_sequence(psi: &CutoffFunction) -> Vec<f64> {
        [8.0, 16.0, 32.0, 64.0].iter().map(|f| f * psi.r1()).collect()
    }

    #[test]
    fn gaussian_transform() {
        for d in 1..=2 {
            let xi: Vec<f64> = (0..d).map(|i| 0.7 + 0.3 * i as f64).collect();
            let r2: f64 = xi.iter().map(|v| v * v).sum();
            let exact = PI.powf(d as f64 / 2.0) * (-r2 / 4.0).exp();
            let got = fourier_limit(
                |z| Complex64::new((-z.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0),
                None,
                &psi(d),
                &[4.0, 8.0, 16.0],
                &xi,
                &FourierOptions::default(),
            )
            .unwrap();
            assert!((got.value - exact).norm() < 1e-8, "d={d}: {got:?} vs {exact}");
        }
    }

    #[test]
    fn log_transform_in_one_dimension() {
        let g = Grading::trivial(1).unwrap();
        let p = HomogeneousTerm::new(g.clone(), 0.0, "1", |_, _| Complex64::new(1.0, 0.0));
        let term = PseudoHomogeneousTerm::new(HomogeneousTerm::zero(g, 0.0), Some(p)).unwrap();
        let ps = psi(1);
        for xi in [1.0, 2.0, 4.0] {
            let got = kernel_term_to_symbol_term(&term, &[], &ps, &default_t_sequence(&ps), &[xi], &FourierOptions::default())
                .unwrap();
            let exact = -(2.0 * PI) / (surface_area(1).unwrap() * xi);
            assert!((got.value.re - exact).abs() < 1e-6 * exact.abs(), "{got:?} vs {exact}");
            assert!(got.value.im.abs() < 1e-9);
        }
    }

    #[test]
    fn odd_kernel_is_imaginary() {
        let g = Grading::trivial(2).unwrap();
        let f = HomogeneousTerm::new(g, 0.0, "z1/|z|", |_, z| {
            Complex64::new(z[0] / (z[0] * z[0] + z[1] * z[1]).sqrt(), 0.0)
        });
        let term = PseudoHomogeneousTerm::homogeneous(f);
        let ps = psi(2);
        let got = kernel_term_to_symbol_term(&term, &[], &ps, &[4.0, 8.0], &[1.0, 0.5], &FourierOptions::default()).unwrap();
        assert!(got.value.re.abs() < 1e-10 * got.value.im.abs().max(1.0), "{got:?}");
        assert!(got.value.im.abs() > 0.1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Grading::trivial(2).unwrap();
        let term = PseudoHomogeneousTerm::homogeneous(HomogeneousTerm::zero(g.clone(), -2.0));
        let ps = psi(2);
        let o = FourierOptions::default();
        assert!(kernel_term_to_symbol_term(&term, &[], &ps, &[4.0, 8.0], &[1.0, 0.0], &o).is_err());
        let ok = PseudoHomogeneousTerm::homogeneous(HomogeneousTerm::zero(g, 0.0));
        assert!(kernel_term_to_symbol_term(&ok, &[], &ps, &[4.0, 8.0], &[0.0, 0.0], &o).is_err());
        assert!(kernel_term_to_symbol_term(&ok, &[], &ps, &[8.0, 4.0], &[1.0, 0.0], &o).is_err());
        assert!(kernel_term_to_symbol_term(&ok, &[], &ps, &[8.0], &[1.0, 0.0], &o).is_err());
    }
}
