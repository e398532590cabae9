//! Run reports and their JSON, CSV and text renderings.

use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{OutputFormat, ResolvedSettings};
use crate::error::{Error, Result};
use crate::graded::sphere_quadrature;
use crate::residue::{global_residue, residue_report, ResidueReport};
use crate::verify::{suite_passed, CheckResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalResult {
    pub value: Option<Complex64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub settings: Option<ResolvedSettings>,
    pub points: Vec<ResidueReport>,
    pub global: Option<GlobalResult>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
    pub elapsed_seconds: f64,
}

impl Report {
    /// Residues at every point of a resolved spec.
    pub fn residue(settings: &ResolvedSettings) -> Result<Report> {
        let start = Instant::now();
        let model = settings.model()?;
        let rs = settings.residue_settings();
        let points: Vec<ResidueReport> = settings
            .points
            .iter()
            .map(|x| residue_report(&model, x, &rs))
            .collect::<Result<_>>()?;
        let global = settings.global.as_ref().map(|gl| {
            let shape = vec![gl.grid; gl.region.len()];
            let r = sphere_quadrature(model.grading().dim(), rs.sphere_degree)
                .and_then(|rule| global_residue(&model, &gl.region, &shape, &rule, &rs.fourier));
            match r {
                Ok(v) => GlobalResult { value: Some(v), failure: None },
                Err(e) => GlobalResult { value: None, failure: Some(e.to_string()) },
            }
        });
        let passed = points.iter().all(|p| p.passed()) && global.as_ref().is_none_or(|g| g.failure.is_none());
        Ok(Report {
            tool_version: TOOL_VERSION.to_string(),
            settings: Some(settings.clone()),
            points,
            global,
            checks: Vec::new(),
            passed,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        })
    }

    /// Wrap the results of a verification run.
    pub fn verification(checks: Vec<CheckResult>, elapsed_seconds: f64) -> Report {
        Report {
            tool_version: TOOL_VERSION.to_string(),
            settings: None,
            points: Vec::new(),
            global: None,
            passed: suite_passed(&checks),
            checks,
            elapsed_seconds,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid(format!("cannot serialize report: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            context: "report".into(),
            message: e.to_string(),
        })
    }

    /// One row per (point, method): point,x,method,re,im,error.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("point,x,method,re,im,error\n");
        let fmt_x = |x: &[f64]| x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";");
        for (i, p) in self.points.iter().enumerate() {
            let x = fmt_x(&p.x);
            let mut row = |method: &str, v: Complex64, err: f64| {
                let _ = writeln!(out, "{i},{x},{method},{:e},{:e},{:e}", v.re, v.im, err);
            };
            if let Some(w) = &p.wodzicki {
                row("wodzicki", w.value, w.transfer_error.unwrap_or(0.0));
            }
            if let Some(v) = p.ponge {
                row("ponge", v, 0.0);
            }
            if let Some(g) = &p.groupoidal {
                row("groupoidal", g.value, g.spread);
            }
            if let Some(e) = &p.equivalence {
                row("groupoidal_symbol", e.groupoidal, e.delta);
            }
        }
        if let Some(Some(v)) = self.global.as_ref().map(|g| g.value) {
            let _ = writeln!(out, "global,,global_residue,{:e},{:e},0e0", v.re, v.im);
        }
        for c in &self.checks {
            let _ = writeln!(out, "check,,{},{:e},0e0,{:e}", c.name.replace(',', ";"), c.measured, c.error);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("ncresidue {}\n", self.tool_version);
        if let Some(s) = &self.settings {
            let _ = writeln!(out, "operator {} on weights {:?}, s_set {:?}", s.operator, s.weights, s.s_set);
        }
        for p in &self.points {
            let _ = writeln!(out, "x = {:?}", p.x);
            if let Some(w) = &p.wodzicki {
                let _ = writeln!(out, "  wodzicki    {:.12} ({:?})", w.value, w.source);
            }
            if let Some(v) = p.ponge {
                let _ = writeln!(out, "  ponge       {v:.12}");
            }
            if let Some(g) = &p.groupoidal {
                let _ = writeln!(out, "  groupoidal  {:.12} (spread {:.2e})", g.value, g.spread);
            }
            if let Some(e) = &p.equivalence {
                let _ = writeln!(out, "  groupoidal (symbol cocycle) {:.12}, certified {}", e.groupoidal, e.certified);
            }
            for a in &p.agreements {
                let _ = writeln!(out, "  {} delta {:.2e} (bound {:.2e}) {}", a.methods, a.delta, a.tolerance, if a.agree { "ok" } else { "MISMATCH" });
            }
            for u in &p.unavailable {
                let _ = writeln!(out, "  unavailable: {u}");
            }
            for f in &p.failures {
                let _ = writeln!(out, "  FAILURE: {f}");
            }
        }
        if let Some(g) = &self.global {
            match (&g.value, &g.failure) {
                (Some(v), _) => {
                    let _ = writeln!(out, "global residue {v:.12}");
                }
                (_, Some(f)) => {
                    let _ = writeln!(out, "global residue FAILURE: {f}");
                }
                _ => {}
            }
        }
        for c in &self.checks {
            let _ = writeln!(out, "{c}");
        }
        let _ = writeln!(out, "{} in {:.2}s", if self.passed { "PASSED" } else { "FAILED" }, self.elapsed_seconds);
        out
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => Ok(self.to_csv()),
            OutputFormat::Text => Ok(self.to_text()),
        }
    }
}
