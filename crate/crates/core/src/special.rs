//! Modified Bessel function of the second kind and Bessel potential kernels.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::graded::surface_area;
use crate::quadrature::gauss_legendre;

/// K_ν(r) = ∫_0^∞ e^{−r cosh t} cosh(νt) dt for r > 0.
pub fn bessel_k(nu: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return f64::INFINITY;
    }
    if (nu.abs() - 0.5).abs() < 1e-15 {
        return (PI / (2.0 * r)).sqrt() * (-r).exp();
    }
    // the integrand is below e^{-r-40}·cosh(νt) past cosh t = 1 + 40/r
    let tail = (1.0 + 40.0 / r).acosh() + nu.abs().max(1.0).ln() + 1.0;
    let rule = gauss_legendre(16);
    let panels = ((tail / 0.25).ceil() as usize).max(4);
    let width = tail / panels as f64;
    (0..panels)
        .map(|i| {
            let a = i as f64 * width;
            rule.integrate(a, a + width, |t| (-r * t.cosh()).exp() * (nu * t).cosh())
        })
        .sum()
}

/// Kernel of (1 + |ξ|²)^{−α/2} on ℝ^d,
/// G_α(z) = |z|^ν K_ν(|z|) / (2^{α/2−1} Γ(α/2) (2π)^{d/2}) with ν = (α − d)/2.
/// Only α > d, where G_α is continuous at 0, is accepted.
pub fn bessel_potential_kernel(alpha: f64, d: usize, r: f64) -> Result<f64> {
    let dd = d as f64;
    if alpha <= dd {
        return Err(Error::invalid(format!("the kernel is continuous only for α > d, got α = {alpha}")));
    }
    let nu = (alpha - dd) / 2.0;
    let norm = 2f64.powf(alpha / 2.0 - 1.0) * gamma(alpha / 2.0) * (2.0 * PI).powf(dd / 2.0);
    let radial = if r == 0.0 {
        // |z|^ν K_ν(|z|) → 2^{ν−1} Γ(ν)
        2f64.powf(nu - 1.0) * gamma(nu)
    } else {
        r.powf(nu) * bessel_k(nu, r)
    };
    Ok(radial / norm)
}

/// Kernel of (1 + |ξ|²)^{−d/2} on ℝ^d: c·K₀(|z|) with c = ω_d/(2π)^d.
/// Near 0 it behaves like c(−log|z| + log 2 − γ).
pub fn critical_bessel_kernel(d: usize, r: f64) -> Result<f64> {
    Ok(critical_constant(d)? * bessel_k(0.0, r))
}

/// ω_d / (2π)^d.
pub fn critical_constant(d: usize) -> Result<f64> {
    Ok(surface_area(d)? / (2.0 * PI).powi(d as i32))
}
