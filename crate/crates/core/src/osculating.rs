//! Osculating groups ℝ^d and ℍₙ × ℝᵐ, grid functions on them, and group
//! convolution with respect to Lebesgue (= Haar) measure.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::Grading;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    Abelian { dim: usize },
    Heisenberg { n: usize, m: usize },
}

/// Abelian ℝ^d or ℍₙ × ℝᵐ in coordinates (t, x₁..xₙ, y₁..yₙ, z₁..zₘ), with
/// the law (t + t′ + (x·y′ − y·x′)/2, x + x′, y + y′, z + z′).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OsculatingGroup {
    kind: GroupKind,
    grading: Grading,
}

impl OsculatingGroup {
    pub fn abelian(dim: usize) -> Result<Self> {
        Ok(OsculatingGroup {
            kind: GroupKind::Abelian { dim },
            grading: Grading::trivial(dim)?,
        })
    }

    pub fn heisenberg(n: usize, m: usize) -> Result<Self> {
        Ok(OsculatingGroup {
            kind: GroupKind::Heisenberg { n, m },
            grading: Grading::heisenberg(n, m)?,
        })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn grading(&self) -> &Grading {
        &self.grading
    }

    pub fn dim(&self) -> usize {
        self.grading.dim()
    }

    pub fn identity(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }

    pub fn law(&self, g: &[f64], h: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.dim(), g.len())?;
        Error::check_dim(self.dim(), h.len())?;
        Ok(self.law_unchecked(g, h))
    }

    fn law_unchecked(&self, g: &[f64], h: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = g.iter().zip(h).map(|(a, b)| a + b).collect();
        if let GroupKind::Heisenberg { n, .. } = self.kind {
            let mut twist = 0.0;
            for i in 0..n {
                let (x, y) = (g[1 + i], g[1 + n + i]);
                let (xp, yp) = (h[1 + i], h[1 + n + i]);
                twist += x * yp - y * xp;
            }
            out[0] += 0.5 * twist;
        }
        out
    }

    /// g⁻¹ = −g in these coordinates.
    pub fn inverse(&self, g: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.dim(), g.len())?;
        Ok(g.iter().map(|v| -v).collect())
    }

    pub fn dilate(&self, s: f64, g: &[f64]) -> Result<Vec<f64>> {
        self.grading.dilate(s, g)
    }
}

/// Complex samples on a uniform grid over the centered box Π[−Lᵢ, Lᵢ],
/// including the boundary nodes, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    extent: Vec<f64>,
    shape: Vec<usize>,
    values: Vec<Complex64>,
}

/// Boundary values above this fraction of the peak count as support overflow.
const BOUNDARY_TOL: f64 = 1e-12;

impl GridFunction {
    pub fn sample<F>(extent: &[f64], shape: &[usize], f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        if extent.len() != shape.len() || extent.is_empty() {
            return Err(Error::invalid("extent and shape must have the same nonzero length"));
        }
        if shape.iter().any(|&n| n < 3) || extent.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::invalid("grids need at least 3 points and positive extent per axis"));
        }
        let total: usize = shape.iter().product();
        let mut grid = GridFunction {
            extent: extent.to_vec(),
            shape: shape.to_vec(),
            values: Vec::new(),
        };
        grid.values = (0..total)
            .into_par_iter()
            .map(|i| f(&grid.point(i)))
            .collect();
        grid.check_boundary()?;
        Ok(grid)
    }

    fn check_boundary(&self) -> Result<()> {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let edge = self.boundary_max();
        if edge > BOUNDARY_TOL * peak.max(f64::MIN_POSITIVE) {
            return Err(Error::SupportOverflow(format!(
                "boundary value {edge:.3e} against peak {peak:.3e}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.extent[axis] / (self.shape[axis] - 1) as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    fn index_of(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }

    /// Coordinates of the node with flat index `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.index_of(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| -self.extent[a] + i as f64 * self.spacing(a))
            .collect()
    }

    /// Largest |value| on the outer layer of nodes.
    pub fn boundary_max(&self) -> f64 {
        (0..self.values.len())
            .filter(|&i| {
                self.index_of(i)
                    .iter()
                    .zip(&self.shape)
                    .any(|(&k, &n)| k == 0 || k == n - 1)
            })
            .map(|i| self.values[i].norm())
            .fold(0.0, f64::max)
    }

    /// Multilinear interpolation; zero outside the box.
    pub fn eval_at(&self, p: &[f64]) -> Complex64 {
        let d = self.dim();
        let mut base = [0usize; 8];
        let mut frac = [0.0f64; 8];
        for a in 0..d {
            let u = (p[a] + self.extent[a]) / self.spacing(a);
            let n = self.shape[a];
            if !(u >= 0.0 && u <= (n - 1) as f64) {
                return Complex64::new(0.0, 0.0);
            }
            let i = (u.floor() as usize).min(n - 2);
            base[a] = i;
            frac[a] = u - i as f64;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0;
            for a in 0..d {
                let bit = (corner >> a) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                flat = flat * self.shape[a] + base[a] + bit;
            }
            if w != 0.0 {
                acc += self.values[flat] * w;
            }
        }
        acc
    }

    /// Trapezoid integral; the boundary layer is zero so this is the plain
    /// cell sum.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.cell_volume()
    }
}

fn check_group(group: &OsculatingGroup, f: &GridFunction) -> Result<()> {
    if f.dim() > 8 {
        return Err(Error::invalid("grid functions are limited to 8 dimensions"));
    }
    Error::check_dim(group.dim(), f.dim())
}

/// (f ⋆ g)(x) = ∫ f(y) g(y⁻¹x) dy as a sum over the nodes of f's grid,
/// with g interpolated at y⁻¹x.
pub fn convolve_at(group: &OsculatingGroup, f: &GridFunction, g: &GridFunction, x: &[f64]) -> Result<Complex64> {
    check_group(group, f)?;
    check_group(group, g)?;
    Error::check_dim(group.dim(), x.len())?;
    let sum: Complex64 = (0..f.values.len())
        .into_par_iter()
        .filter(|&i| f.values[i] != Complex64::new(0.0, 0.0))
        .map(|i| {
            let y = f.point(i);
            let yinv: Vec<f64> = y.iter().map(|v| -v).collect();
            f.values[i] * g.eval_at(&group.law_unchecked(&yinv, x))
        })
        .sum();
    Ok(sum * f.cell_volume())
}

/// f ⋆ g sampled on a new grid. Fails if the result does not vanish on the
/// boundary of the output box.
pub fn convolve(
    group: &OsculatingGroup,
    f: &GridFunction,
    g: &GridFunction,
    extent: &[f64],
    shape: &[usize],
) -> Result<GridFunction> {
    check_group(group, f)?;
    check_group(group, g)?;
    Error::check_dim(group.dim(), extent.len())?;
    let nodes: Vec<(Vec<f64>, Complex64)> = (0..f.values.len())
        .filter(|&i| f.values[i] != Complex64::new(0.0, 0.0))
        .map(|i| (f.point(i).iter().map(|v| -v).collect(), f.values[i]))
        .collect();
    let vol = f.cell_volume();
    GridFunction::sample(extent, shape, |x| {
        nodes
            .iter()
            .map(|(yinv, fv)| fv * g.eval_at(&group.law_unchecked(yinv, x)))
            .sum::<Complex64>()
            * vol
    })
    .map_err(|e| match e {
        Error::SupportOverflow(msg) => Error::SupportOverflow(format!("convolution output box too small: {msg}")),
        other => other,
    })
}

/// (f ⋆ g)(e) − (g ⋆ f)(e).
pub fn commutator_at_identity(group: &OsculatingGroup, f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    commutator_at(group, f, g, &group.identity())
}

/// (f ⋆ g)(x) − (g ⋆ f)(x).
pub fn commutator_at(group: &OsculatingGroup, f: &GridFunction, g: &GridFunction, x: &[f64]) -> Result<Complex64> {
    Ok(convolve_at(group, f, g, x)? - convolve_at(group, g, f, x)?)
}

/// (k_P ⋆ g + f ⋆ k_Q − k_Q ⋆ f − g ⋆ k_P)(e).
pub fn trace_engine(
    group: &OsculatingGroup,
    k_p: &GridFunction,
    k_q: &GridFunction,
    f: &GridFunction,
    g: &GridFunction,
) -> Result<Complex64> {
    let e = group.identity();
    Ok(convolve_at(group, k_p, g, &e)? + convolve_at(group, f, k_q, &e)?
        - convolve_at(group, k_q, f, &e)?
        - convolve_at(group, g, k_p, &e)?)
}
