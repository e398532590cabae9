//! Graded coordinate spaces: dilations, quasi-norms, homogeneous dimension
//! and quadrature on the Euclidean unit sphere.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};


use crate::error::{Error, Result};
use crate::quadrature::gauss_gegenbauer;

/// Largest sphere rule we are willing to build.
const MAX_SPHERE_NODES: usize = 4_000_000;

/// Integer weights of the graded coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grading {
    weights: Vec<u32>,
}

impl Grading {
    pub fn new(weights: Vec<u32>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("a grading needs at least one coordinate"));
        }
        if weights.iter().any(|&w| w == 0) {
            return Err(Error::invalid("grading weights must be positive"));
        }
        Ok(Grading { weights })
    }

    /// All weights equal to 1 on ℝ^d.
    pub fn trivial(d: usize) -> Result<Self> {
        Grading::new(vec![1; d])
    }

    /// ℍₙ × ℝᵐ with coordinates (t, x₁..xₙ, y₁..yₙ, z₁..zₘ); t has weight 2.
    pub fn heisenberg(n: usize, m: usize) -> Result<Self> {
        let mut w = vec![2];
        w.extend(std::iter::repeat_n(1, 2 * n + m));
        Grading::new(w)
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// d_H = Σ wᵢ.
    pub fn homogeneous_dimension(&self) -> u32 {
        self.weights.iter().sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.weights.iter().all(|&w| w == 1)
    }

    /// Least common multiple of the weights.
    pub fn lcm(&self) -> u32 {
        self.weights.iter().fold(1, |acc, &w| acc / gcd(acc, w) * w)
    }

    /// δ_s(ξ): coordinate i scaled by s^{wᵢ}.
    pub fn dilate(&self, s: f64, xi: &[f64]) -> Result<Vec<f64>> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid(format!("dilation factor must be positive, got {s}")));
        }
        Error::check_dim(self.dim(), xi.len())?;
        Ok(self.dilate_unchecked(s, xi))
    }

    pub(crate) fn dilate_unchecked(&self, s: f64, xi: &[f64]) -> Vec<f64> {
        xi.iter()
            .zip(&self.weights)
            .map(|(&x, &w)| x * s.powi(w as i32))
            .collect()
    }

    /// Σ wᵢ ωᵢ², the density of the graded radial vector field against
    /// the Euclidean sphere measure. Equal to 1 for the trivial grading.
    pub fn euler_density(&self, omega: &[f64]) -> f64 {
        omega
            .iter()
            .zip(&self.weights)
            .map(|(&o, &w)| w as f64 * o * o)
            .sum()
    }

    /// Gauge built from the groups of equal weight:
    /// (Σ_w (Σ_{wᵢ=w} ξᵢ²)^{N/w})^{1/(2N)}. On ℍₙ this is the Korányi-type
    /// norm (t² + |x|⁴ + ...)^{1/4}; for the trivial grading it is Euclidean.
    pub fn gauge(&self, xi: &[f64]) -> f64 {
        let n = self.lcm() as f64;
        let mut groups: Vec<(u32, f64)> = Vec::new();
        for (&x, &w) in xi.iter().zip(&self.weights) {
            match groups.iter_mut().find(|g| g.0 == w) {
                Some(g) => g.1 += x * x,
                None => groups.push((w, x * x)),
            }
        }
        // Rescale so the largest group is O(1) before raising to high powers.
        let scale = groups
            .iter()
            .map(|&(w, q)| q.powf(0.5 / w as f64))
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let sum: f64 = groups
            .iter()
            .map(|&(w, q)| (q / scale.powi(2 * w as i32)).powf(n / w as f64))
            .sum();
        scale * sum.powf(0.5 / n)
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// |ξ| = (Σᵢ |ξᵢ|^{2N/wᵢ})^{1/(2N)} with N the lcm of the weights.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiNorm {
    grading: Grading,
    n: u32,
}

impl QuasiNorm {
    pub fn new(grading: Grading) -> Self {
        let n = grading.lcm();
        QuasiNorm { grading, n }
    }

    pub fn grading(&self) -> &Grading {
        &self.grading
    }

    pub fn exponent(&self) -> u32 {
        self.n
    }

    pub fn norm(&self, xi: &[f64]) -> f64 {
        if self.grading.is_trivial() {
            return xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        let n = self.n as f64;
        // Each coordinate's own contribution |ξᵢ|^{1/wᵢ} sets the scale.
        let scale = xi
            .iter()
            .zip(self.grading.weights())
            .map(|(&x, &w)| x.abs().powf(1.0 / w as f64))
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let sum: f64 = xi
            .iter()
            .zip(self.grading.weights())
            .map(|(&x, &w)| {
                let w = w as f64;
                (x.abs() / scale.powf(w)).powf(2.0 * n / w)
            })
            .sum();
        scale * sum.powf(0.5 / n)
    }
}

/// ω_d = 2π^{d/2}/Γ(d/2), the area of S^{d−1}.
pub fn surface_area(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::invalid("sphere dimension must be at least 1"));
    }
    // ω_{k+2} = 2π ω_k / k, starting from ω₁ = 2 or ω₂ = 2π
    let two_pi = 2.0 * std::f64::consts::PI;
    let (mut k, mut area) = if d % 2 == 1 { (1, 2.0) } else { (2, two_pi) };
    while k < d {
        area *= two_pi / k as f64;
        k += 2;
    }
    Ok(area)
}

/// Weighted nodes on the Euclidean unit sphere S^{d−1} ⊂ ℝ^d.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphereRule {
    pub dim: usize,
    pub degree: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, &w)| w * f(x)).sum()
    }

    /// Complex integrand, evaluated in parallel. Failures are propagated.
    pub fn integrate_complex<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(&[f64]) -> Result<Complex64> + Sync,
    {
        let values: Result<Vec<Complex64>> = self
            .nodes
            .par_iter()
            .zip(&self.weights)
            .map(|(x, &w)| f(x).map(|v| v * w))
            .collect();
        Ok(values?.into_iter().sum())
    }
}

/// Sphere rule on S^{d−1} exact for polynomials of total degree ≤ `degree`.
///
/// d = 1 is the two-point counting rule, d = 2 an equispaced trapezoid rule.
/// For d ≥ 3 the rule is a product over hyperspherical angles: each polar
/// angle θₖ uses a Gauss rule in cos θₖ for the weight sin^{j}θₖ of its level
/// (Gauss–Legendre on S²), and the azimuth uses the trapezoid rule.
pub fn sphere_quadrature(d: usize, degree: usize) -> Result<SphereRule> {
    if d < 1 {
        return Err(Error::invalid("sphere dimension must be at least 1"));
    }
    if d == 1 {
        return Ok(SphereRule {
            dim: 1,
            degree,
            nodes: vec![vec![1.0], vec![-1.0]],
            weights: vec![1.0, 1.0],
        });
    }
    let n_phi = (degree + 2).div_ceil(2) * 2;
    let n_polar = degree / 2 + 1;
    let count = (n_phi as f64) * (n_polar as f64).powi(d as i32 - 2);
    if count > MAX_SPHERE_NODES as f64 {
        return Err(Error::ResourceBound(format!(
            "sphere rule of degree {degree} on S^{} needs {count:.0} nodes",
            d - 1
        )));
    }

    let azimuth: Vec<(f64, f64)> = (0..n_phi)
        .map(|k| {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n_phi as f64;
            (phi.cos(), phi.sin())
        })
        .collect();
    let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let polar: Vec<_> = (0..d - 2)
        .map(|k| {
            // level k carries sin^{d-2-k}; in t = cos θ that is (1-t²)^{(d-3-k)/2}
            gauss_gegenbauer(n_polar, (d as f64 - 3.0 - k as f64) / 2.0)
        })
        .collect();

    let mut nodes = Vec::with_capacity(count as usize);
    let mut weights = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; d - 2];
    loop {
        let mut point = Vec::with_capacity(d);
        let mut sine = 1.0;
        let mut w = dphi;
        for (level, &i) in idx.iter().enumerate() {
            let t = polar[level].nodes[i];
            w *= polar[level].weights[i];
            point.push(sine * t);
            sine *= (1.0 - t * t).max(0.0).sqrt();
        }
        for &(c, s) in &azimuth {
            let mut p = point.clone();
            p.push(sine * c);
            p.push(sine * s);
            nodes.push(p);
            weights.push(w);
        }
        // odometer over the polar levels
        let mut level = d - 2;
        loop {
            if level == 0 {
                return Ok(SphereRule { dim: d, degree, nodes, weights });
            }
            level -= 1;
            idx[level] += 1;
            if idx[level] < n_polar {
                break;
            }
            idx[level] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use statrs::function::gamma::{gamma, ln_gamma};
    use std::f64::consts::PI;

    #[test]
    fn dilation_examples() {
        let g = Grading::trivial(2).unwrap();
        assert_eq!(g.dilate(3.0, &[1.0, 1.0]).unwrap(), vec![3.0, 3.0]);
        let h = Grading::heisenberg(1, 0).unwrap();
        assert_eq!(h.weights(), &[2, 1, 1]);
        assert_eq!(h.dilate(2.0, &[1.0, 1.0, 1.0]).unwrap(), vec![4.0, 2.0, 2.0]);
        assert_eq!(h.dilate(1.0, &[0.3, -2.0, 5.0]).unwrap(), vec![0.3, -2.0, 5.0]);
        assert!(h.dilate(0.0, &[1.0, 1.0, 1.0]).is_err());
        assert!(h.dilate(-1.0, &[1.0, 1.0, 1.0]).is_err());
        assert!(h.dilate(2.0, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn homogeneous_dimensions() {
        assert_eq!(Grading::trivial(5).unwrap().homogeneous_dimension(), 5);
        for (n, m) in [(1, 0), (2, 1), (0, 3)] {
            let g = Grading::heisenberg(n, m).unwrap();
            assert_eq!(g.dim(), 2 * n + m + 1);
            assert_eq!(g.homogeneous_dimension() as usize, 2 * n + m + 2);
        }
        assert!(Grading::new(vec![1, 0]).is_err());
        assert!(Grading::trivial(0).is_err());
    }

    #[test]
    fn quasi_norm_examples() {
        let e = QuasiNorm::new(Grading::trivial(2).unwrap());
        assert_relative_eq!(e.norm(&[3.0, 4.0]), 5.0, max_relative = 1e-15);
        let h = QuasiNorm::new(Grading::heisenberg(1, 0).unwrap());
        assert_eq!(h.exponent(), 2);
        assert_relative_eq!(h.norm(&[1.0, 0.0, 0.0]), 1.0, max_relative = 1e-15);
        assert_eq!(h.norm(&[0.0, 0.0, 0.0]), 0.0);
        // (t² + x⁴ + y⁴)^{1/4}
        let v: f64 = (0.25f64 + 16.0 + 1.0).powf(0.25);
        assert_relative_eq!(h.norm(&[0.5, 2.0, -1.0]), v, max_relative = 1e-14);
    }

    #[test]
    fn gauge_groups_equal_weights() {
        let h = Grading::heisenberg(1, 0).unwrap();
        let v: f64 = (0.25f64 + (4.0f64 + 1.0).powi(2)).powf(0.25);
        assert_relative_eq!(h.gauge(&[0.5, 2.0, -1.0]), v, max_relative = 1e-14);
        let e = Grading::trivial(3).unwrap();
        assert_relative_eq!(e.gauge(&[1.0, 2.0, 2.0]), 3.0, max_relative = 1e-15);
    }

    #[test]
    fn surface_areas() {
        assert_relative_eq!(surface_area(1).unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(surface_area(2).unwrap(), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(surface_area(3).unwrap(), 4.0 * PI, max_relative = 1e-15);
        assert!(surface_area(0).is_err());
        for d in 1..=10 {
            let closed = 2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0);
            assert_relative_eq!(surface_area(d).unwrap(), closed, max_relative = 1e-12);
        }
    }

    #[test]
    fn sphere_rule_examples() {
        let r1 = sphere_quadrature(1, 10).unwrap();
        assert_eq!(r1.nodes, vec![vec![1.0], vec![-1.0]]);
        assert_eq!(r1.weights, vec![1.0, 1.0]);
        let r2 = sphere_quadrature(2, 4).unwrap();
        assert_relative_eq!(r2.integrate(|x| x[0] * x[0]), PI, max_relative = 1e-14);
        let r3 = sphere_quadrature(3, 6).unwrap();
        assert_relative_eq!(r3.integrate(|_| 1.0), 4.0 * PI, max_relative = 1e-14);
        assert!(sphere_quadrature(8, 200).is_err());
    }

    #[test]
    fn sphere_rules_are_exact_for_monomials() {
        // ∫ x^α dσ = 2 Π Γ((αᵢ+1)/2) / Γ((|α|+d)/2) for even α
        for d in 2..=5 {
            let rule = sphere_quadrature(d, 8).unwrap();
            let total = surface_area(d).unwrap();
            assert_relative_eq!(rule.weights.iter().sum::<f64>(), total, max_relative = 1e-12);
            let mut alpha = vec![0u32; d];
            alpha[0] = 4;
            alpha[d - 1] = 2;
            if d > 2 {
                alpha[1] = 2;
            }
            let got = rule.integrate(|x| x.iter().zip(&alpha).map(|(v, &a)| v.powi(a as i32)).product());
            let sum: u32 = alpha.iter().sum();
            let lg: f64 = alpha.iter().map(|&a| ln_gamma((a as f64 + 1.0) / 2.0)).sum::<f64>()
                - ln_gamma((sum as f64 + d as f64) / 2.0);
            assert_relative_eq!(got, 2.0 * lg.exp(), max_relative = 1e-12);
            // odd monomial
            let odd = rule.integrate(|x| x[0].powi(3) * x[d - 1] * x[d - 1]);
            assert!(odd.abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_nodes_are_unit_vectors() {
        let rule = sphere_quadrature(4, 6).unwrap();
        for x in &rule.nodes {
            let n: f64 = x.iter().map(|v| v * v).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn quadrature_error_decreases_with_degree() {
        // smooth non-polynomial integrand: e^{x₁} on S², exact 4π sinh(1)
        let exact = 4.0 * PI * 1f64.sinh();
        let mut last = f64::INFINITY;
        for degree in [2, 4, 8, 16] {
            let rule = sphere_quadrature(3, degree).unwrap();
            let err = (rule.integrate(|x| x[0].exp()) - exact).abs();
            assert!(err < last || err < 1e-13, "degree {degree}: {err} vs {last}");
            last = err;
        }
        assert!(last < 1e-13);
    }

    fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, d)
    }

    proptest! {
        #[test]
        fn dilations_compose(s in 0.01f64..10.0, t in 0.01f64..10.0, xi in point(4)) {
            let g = Grading::new(vec![2, 1, 1, 3]).unwrap();
            let lhs = g.dilate(s, &g.dilate(t, &xi).unwrap()).unwrap();
            let rhs = g.dilate(s * t, &xi).unwrap();
            for (a, b) in lhs.iter().zip(&rhs) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
            }
        }

        #[test]
        fn quasi_norm_is_homogeneous(s in 0.01f64..10.0, xi in point(4)) {
            let q = QuasiNorm::new(Grading::new(vec![2, 1, 1, 3]).unwrap());
            let lhs = q.norm(&q.grading().dilate(s, &xi).unwrap());
            let rhs = s * q.norm(&xi);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }

        #[test]
        fn gauge_is_homogeneous(s in 0.01f64..10.0, xi in point(5)) {
            let g = Grading::heisenberg(2, 0).unwrap();
            let lhs = g.gauge(&g.dilate(s, &xi).unwrap());
            let rhs = s * g.gauge(&xi);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }
}
