//! One-dimensional quadrature building blocks: Gauss rules, panel
//! integration and Richardson extrapolation.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// A Gauss rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, w * half))
    }
}

/// Gauss–Legendre rule with `n` nodes, computed by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1, "a Gauss rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// Gauss rule for the weight `(1 - t²)^a` on `[-1, 1]` (Gegenbauer / symmetric
/// Jacobi), via the Golub–Welsch eigenvalue method. `a = 0` falls back to
/// [`gauss_legendre`].
pub fn gauss_gegenbauer(n: usize, a: f64) -> GaussRule {
    assert!(n >= 1 && a > -1.0);
    if a == 0.0 {
        return gauss_legendre(n);
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = kf * (kf + 2.0 * a) / (4.0 * (kf + a).powi(2) - 1.0);
        let off = b.sqrt();
        jacobi[(k, k - 1)] = off;
        jacobi[(k - 1, k)] = off;
    }
    let mu0 = (std::f64::consts::PI.ln() / 2.0 + ln_gamma(a + 1.0) - ln_gamma(a + 1.5)).exp();
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    // Symmetrize: the exact rule is symmetric about 0.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Integrate `f` over consecutive panels delimited by `breaks`.
pub fn integrate_panels<F: FnMut(f64) -> f64>(breaks: &[f64], rule: &GaussRule, mut f: F) -> f64 {
    breaks
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], &mut f))
        .sum()
}

/// Uniform panel breakpoints on `[a, b]` with at most `width` per panel.
pub fn uniform_breaks(a: f64, b: f64, width: f64) -> Vec<f64> {
    let n = (((b - a) / width).ceil() as usize).max(1);
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// Breakpoints on `(0, b]` refined geometrically toward 0, for integrands
/// with an integrable algebraic or logarithmic singularity at the origin.
/// The first entry is exactly 0.
pub fn geometric_breaks(b: f64, levels: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(levels + 2);
    out.push(0.0);
    for j in (0..=levels).rev() {
        out.push(b * 0.5f64.powi(j as i32));
    }
    out
}

/// Outcome of a Richardson extrapolation.
#[derive(Debug, Clone)]
pub struct Extrapolation {
    pub value: Complex64,
    pub error: f64,
    /// Error estimate of the best extrapolant available after each prefix of
    /// the sequence (first entry is for two samples).
    pub error_history: Vec<f64>,
}

/// Richardson extrapolation of `values[k] ≈ A + Σ_j c_j h_k^{p_j}` to `h → 0`,
/// with exponents `p_j = first_power + j·power_step`. The steps should form a
/// geometric sequence; other sequences only get an approximate elimination.
///
/// Builds the full Neville table and returns the entry with the smallest
/// error estimate, where the error of an entry is its distance to the
/// previous column in the same row.
pub fn richardson(
    steps: &[f64],
    values: &[Complex64],
    first_power: f64,
    power_step: f64,
) -> Result<Extrapolation> {
    if steps.len() != values.len() || steps.len() < 2 {
        return Err(Error::invalid("Richardson extrapolation needs at least two samples"));
    }
    let n = steps.len();
    let mut table: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut best = (values[n - 1], f64::INFINITY);
    let mut history = Vec::with_capacity(n - 1);
    for k in 0..n {
        let mut row = vec![values[k]];
        for j in 1..=k {
            let p = first_power + (j - 1) as f64 * power_step;
            let ratio = (steps[k - 1] / steps[k]).powf(p);
            let prev_row = &table[k - 1];
            let next = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (ratio - 1.0);
            row.push(next);
        }
        if k >= 1 {
            for j in 1..=k {
                let err = (row[j] - row[j - 1]).norm();
                if err < best.1 {
                    best = (row[j], err);
                }
            }
            history.push(best.1);
        }
        table.push(row);
    }
    Ok(Extrapolation {
        value: best.0,
        error: best.1,
        error_history: history,
    })
}
