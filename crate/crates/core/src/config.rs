//! Operator spec files (TOML) and the settings they resolve to.
//!
//! ```toml
//! grading = "trivial(2)"        # or "heisenberg(1,0)", or weights = [2, 1, 1]
//! operator = "log_kernel(p0=1)"
//! points = [[0.0, 0.0], [0.25, -0.1]]
//! random_points = 0             # extra uniform points in [-1/2, 1/2]^dim
//! seed = 7
//! s_set = [0.333333333333, 0.5, 2.0, 3.0]
//! format = "json"
//!
//! [quadrature]
//! sphere_degree = 32
//! radii = [4, 20]               # cocycle samples at 2^-k, k in [4, 20]
//!
//! [tolerances]
//! agreement = 1e-3
//! spread = 1e-6
//! cocycle = 1e-4
//!
//! [global]                      # optional: integrate the residue density
//! region = [[-1.0, 1.0], [-1.0, 1.0]]
//! grid = 41
//! ```

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::CatalogTerm;
use crate::error::{Error, Result};
use crate::graded::Grading;
use crate::residue::{CocycleOptions, EquivalenceOptions, OperatorModel, ResidueSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Text,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => Err(Error::Parse {
                context: "format".into(),
                message: format!("unknown output format `{other}`"),
            }),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Text => "text",
        })
    }
}

/// `"trivial(d)"`, `"heisenberg(n,m)"`, or explicit weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GradingSpec {
    Preset(String),
    Weights(Vec<u32>),
}

impl GradingSpec {
    pub fn resolve(&self) -> Result<Grading> {
        match self {
            GradingSpec::Weights(w) => Grading::new(w.clone()),
            GradingSpec::Preset(p) => parse_preset(p),
        }
    }
}

fn parse_preset(p: &str) -> Result<Grading> {
    let err = |m: &str| Error::Parse {
        context: format!("grading `{p}`"),
        message: m.to_string(),
    };
    let p = p.trim();
    let open = p.find('(').ok_or_else(|| err("expected trivial(d) or heisenberg(n,m)"))?;
    if !p.ends_with(')') {
        return Err(err("unbalanced parentheses"));
    }
    let args: Vec<usize> = p[open + 1..p.len() - 1]
        .split(',')
        .map(|a| a.trim().parse::<usize>().map_err(|_| err("arguments must be nonnegative integers")))
        .collect::<Result<_>>()?;
    match (&p[..open], args.as_slice()) {
        ("trivial", [d]) => Grading::trivial(*d),
        ("heisenberg", [n]) => Grading::heisenberg(*n, 0),
        ("heisenberg", [n, m]) => Grading::heisenberg(*n, *m),
        _ => Err(err("expected trivial(d) or heisenberg(n,m)")),
    }
}

fn default_sphere_degree() -> usize {
    32
}

fn default_radii() -> (i32, i32) {
    (4, 20)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSettings {
    #[serde(default = "default_sphere_degree")]
    pub sphere_degree: usize,
    /// Cocycle sample radii 2^{−k} for k in this inclusive range.
    #[serde(default = "default_radii")]
    pub radii: (i32, i32),
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            sphere_degree: default_sphere_degree(),
            radii: default_radii(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub agreement: f64,
    pub spread: f64,
    pub cocycle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            agreement: 1e-3,
            spread: 1e-6,
            cocycle: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalSettings {
    pub region: Vec<(f64, f64)>,
    pub grid: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    grading: GradingSpec,
    operator: String,
    #[serde(default)]
    points: Vec<Vec<f64>>,
    #[serde(default)]
    random_points: usize,
    #[serde(default)]
    seed: u64,
    s_set: Option<Vec<f64>>,
    #[serde(default)]
    quadrature: QuadratureSettings,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    format: OutputFormat,
    global: Option<GlobalSettings>,
}

/// Everything a run depends on, after defaults, random points and
/// command-line overrides have been applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSettings {
    pub weights: Vec<u32>,
    pub operator: CatalogTerm,
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
    pub s_set: Vec<f64>,
    pub quadrature: QuadratureSettings,
    pub tolerances: Tolerances,
    pub format: OutputFormat,
    pub global: Option<GlobalSettings>,
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub s_set: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
}

impl ResolvedSettings {
    /// Parse a spec document. `origin` names it in error messages.
    pub fn from_toml(text: &str, origin: &str, overrides: &Overrides) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Parse {
            context: origin.to_string(),
            message: e.to_string().trim_end().to_string(),
        })?;
        let grading = raw.grading.resolve()?;
        let operator: CatalogTerm = raw.operator.parse()?;
        let dim = grading.dim();
        for (i, p) in raw.points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Parse {
                    context: format!("{origin}: points[{i}]"),
                    message: format!("expected {dim} coordinates, got {}", p.len()),
                });
            }
        }
        let seed = overrides.seed.unwrap_or(raw.seed);
        let mut points = raw.points;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..raw.random_points {
            points.push((0..dim).map(|_| rng.random_range(-0.5..0.5)).collect());
        }
        if points.is_empty() {
            points.push(vec![0.0; dim]);
        }
        let s_set = overrides
            .s_set
            .clone()
            .or(raw.s_set)
            .unwrap_or_else(|| ResidueSettings::default().s_set);
        if s_set.is_empty() || s_set.iter().any(|&s| !(s > 0.0) || s == 1.0) {
            return Err(Error::Parse {
                context: format!("{origin}: s_set"),
                message: "scales must be positive and different from 1".into(),
            });
        }
        let (k0, k1) = raw.quadrature.radii;
        if k1 < k0 + 1 {
            return Err(Error::Parse {
                context: format!("{origin}: quadrature.radii"),
                message: "need at least two radii".into(),
            });
        }
        let mut tolerances = raw.tolerances;
        if let Some(t) = overrides.tol {
            tolerances.agreement = t;
        }
        if let Some(gl) = &raw.global {
            if gl.region.len() != dim || gl.grid < 2 {
                return Err(Error::Parse {
                    context: format!("{origin}: global"),
                    message: format!("region needs {dim} intervals and grid at least 2"),
                });
            }
        }
        let settings = ResolvedSettings {
            weights: grading.weights().to_vec(),
            operator,
            points,
            seed,
            s_set,
            quadrature: raw.quadrature,
            tolerances,
            format: overrides.format.unwrap_or(raw.format),
            global: raw.global,
        };
        settings.model()?;
        Ok(settings)
    }

    pub fn grading(&self) -> Result<Grading> {
        Grading::new(self.weights.clone())
    }

    pub fn model(&self) -> Result<OperatorModel> {
        self.operator.build(&self.grading()?)
    }

    pub fn residue_settings(&self) -> ResidueSettings {
        let (k0, k1) = self.quadrature.radii;
        ResidueSettings {
            s_set: self.s_set.clone(),
            sphere_degree: self.quadrature.sphere_degree,
            cocycle: CocycleOptions {
                direction: None,
                radii: (k0..=k1).map(|k| 0.5f64.powi(k)).collect(),
            },
            equivalence: EquivalenceOptions {
                cocycle_tol: self.tolerances.cocycle,
                agreement_tol: self.tolerances.agreement,
                ..Default::default()
            },
            agreement_tol: self.tolerances.agreement,
            spread_tol: self.tolerances.spread,
            ..Default::default()
        }
    }
}
