//! Python bindings: gradings, catalog operators, the three residues and the
//! verification suites.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ncresidue_core::catalog::CatalogTerm;
use ncresidue_core::config::{Overrides, ResolvedSettings};
use ncresidue_core::error::Error;
use ncresidue_core::graded::{self, sphere_quadrature, QuasiNorm};
use ncresidue_core::report::Report;
use ncresidue_core::residue::{self, CocycleOptions, EquivalenceOptions, OperatorModel, ResidueSettings};
use ncresidue_core::symbols::FourierOptions;
use ncresidue_core::verify::{run_suite, VerifyOptions};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Parse { .. } | Error::UnknownTerm(_) | Error::DimensionMismatch { .. } | Error::InvalidArgument(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

#[pyclass(name = "Grading", module = "ncresidue", frozen, from_py_object)]
#[derive(Clone)]
struct PyGrading(graded::Grading);

#[pymethods]
impl PyGrading {
    #[new]
    fn new(weights: Vec<u32>) -> PyResult<Self> {
        graded::Grading::new(weights).map(PyGrading).map_err(py_err)
    }

    #[staticmethod]
    fn trivial(d: usize) -> PyResult<Self> {
        graded::Grading::trivial(d).map(PyGrading).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (n, m = 0))]
    fn heisenberg(n: usize, m: usize) -> PyResult<Self> {
        graded::Grading::heisenberg(n, m).map(PyGrading).map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn weights(&self) -> Vec<u32> {
        self.0.weights().to_vec()
    }

    #[getter]
    fn homogeneous_dimension(&self) -> u32 {
        self.0.homogeneous_dimension()
    }

    fn dilate(&self, s: f64, xi: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.dilate(s, &xi).map_err(py_err)
    }

    fn quasi_norm(&self, xi: Vec<f64>) -> PyResult<f64> {
        Error::check_dim(self.0.dim(), xi.len()).map_err(py_err)?;
        Ok(QuasiNorm::new(self.0.clone()).norm(&xi))
    }

    fn gauge(&self, xi: Vec<f64>) -> PyResult<f64> {
        Error::check_dim(self.0.dim(), xi.len()).map_err(py_err)?;
        Ok(self.0.gauge(&xi))
    }

    fn __repr__(&self) -> String {
        format!("Grading({:?})", self.0.weights())
    }
}

/// A catalog operator, e.g. `Operator(Grading.trivial(2), "log_kernel(p0=1)")`.
#[pyclass(name = "Operator", module = "ncresidue", frozen)]
struct PyOperator {
    term: CatalogTerm,
    model: OperatorModel,
}

const DEFAULT_S_SET: [f64; 4] = [1.0 / 3.0, 0.5, 2.0, 3.0];

#[pymethods]
impl PyOperator {
    #[new]
    fn new(grading: &PyGrading, term: &str) -> PyResult<Self> {
        let term: CatalogTerm = term.parse().map_err(py_err)?;
        let model = term.build(&grading.0).map_err(py_err)?;
        Ok(PyOperator { term, model })
    }

    #[getter]
    fn label(&self) -> String {
        self.model.label().to_string()
    }

    #[getter]
    fn order(&self) -> i32 {
        self.model.order()
    }

    #[getter]
    fn grading(&self) -> PyGrading {
        PyGrading(self.model.grading().clone())
    }

    #[pyo3(signature = (x, sphere_degree = 32))]
    fn wodzicki(&self, x: Vec<f64>, sphere_degree: usize) -> PyResult<Complex64> {
        let rule = sphere_quadrature(self.model.grading().dim(), sphere_degree).map_err(py_err)?;
        residue::wodzicki_residue_at(&self.model, &x, &rule, &FourierOptions::default())
            .map(|w| w.value)
            .map_err(py_err)
    }

    #[pyo3(signature = (x, sphere_degree = 32))]
    fn ponge(&self, x: Vec<f64>, sphere_degree: usize) -> PyResult<Complex64> {
        let rule = sphere_quadrature(self.model.grading().dim(), sphere_degree).map_err(py_err)?;
        residue::ponge_residue_at(&self.model, &x, &rule).map_err(py_err)
    }

    /// Returns (value, spread over the scales).
    #[pyo3(signature = (x, s_set = None))]
    fn groupoidal(&self, x: Vec<f64>, s_set: Option<Vec<f64>>) -> PyResult<(Complex64, f64)> {
        let s_set = s_set.unwrap_or_else(|| DEFAULT_S_SET.to_vec());
        residue::groupoidal_residue_at(&self.model, &x, &s_set, &CocycleOptions::default())
            .map(|g| (g.value, g.spread))
            .map_err(py_err)
    }

    #[pyo3(signature = (x, s_set = None, sphere_degree = 64))]
    fn equivalence<'py>(&self, py: Python<'py>, x: Vec<f64>, s_set: Option<Vec<f64>>, sphere_degree: usize) -> PyResult<Bound<'py, PyDict>> {
        let s_set = s_set.unwrap_or_else(|| vec![0.5, 2.0, 3.0]);
        let rule = sphere_quadrature(self.model.grading().dim(), sphere_degree).map_err(py_err)?;
        let eq = residue::ponge_groupoidal_equiv(&self.model, &x, &s_set, &rule, &EquivalenceOptions::default()).map_err(py_err)?;
        let out = PyDict::new(py);
        out.set_item("ponge", eq.ponge)?;
        out.set_item("groupoidal", eq.groupoidal)?;
        out.set_item("groupoidal_per_s", eq.groupoidal_per_s)?;
        out.set_item("delta", eq.delta)?;
        out.set_item("certified", eq.certified)?;
        out.set_item("agree", eq.agree)?;
        Ok(out)
    }

    /// ∫ Res_x dx over a box, on a uniform grid with `grid` nodes per axis.
    #[pyo3(signature = (region, grid = 41, sphere_degree = 8))]
    fn global_residue(&self, region: Vec<(f64, f64)>, grid: usize, sphere_degree: usize) -> PyResult<Complex64> {
        let rule = sphere_quadrature(self.model.grading().dim(), sphere_degree).map_err(py_err)?;
        let shape = vec![grid; region.len()];
        residue::global_residue(&self.model, &region, &shape, &rule, &FourierOptions::default()).map_err(py_err)
    }

    /// Every available method at x, with their agreement checks, as JSON.
    fn report_json(&self, x: Vec<f64>) -> PyResult<String> {
        let r = residue::residue_report(&self.model, &x, &ResidueSettings::default()).map_err(py_err)?;
        serde_json::to_string(&r).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("Operator({:?}, {:?})", self.model.grading().weights(), self.term.to_string())
    }
}

/// Run a TOML spec and return the report as JSON.
#[pyfunction]
#[pyo3(signature = (spec, tol = None, seed = None))]
fn run_spec(spec: &str, tol: Option<f64>, seed: Option<u64>) -> PyResult<String> {
    let overrides = Overrides { tol, seed, ..Default::default() };
    let settings = ResolvedSettings::from_toml(spec, "<python>", &overrides).map_err(py_err)?;
    Report::residue(&settings).and_then(|r| r.to_json()).map_err(py_err)
}

/// Run a verification suite; returns a list of check dicts.
#[pyfunction]
#[pyo3(signature = (suite, tol = None, seed = 7))]
fn verify<'py>(py: Python<'py>, suite: &str, tol: Option<f64>, seed: u64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let suite = suite.parse().map_err(py_err)?;
    let opts = VerifyOptions { tol, seed, ..Default::default() };
    let checks = py.detach(|| run_suite(suite, &opts));
    checks
        .into_iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("suite", c.suite.to_string())?;
            d.set_item("name", c.name)?;
            d.set_item("measured", c.measured)?;
            d.set_item("expected", c.expected)?;
            d.set_item("error", c.error)?;
            d.set_item("bound", c.tolerance * c.scale)?;
            d.set_item("passed", c.passed)?;
            d.set_item("known_deviation", c.known_deviation)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
fn surface_area(d: usize) -> PyResult<f64> {
    graded::surface_area(d).map_err(py_err)
}

#[pymodule]
fn ncresidue(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrading>()?;
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(run_spec, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(surface_area, m)?)?;
    m.add("__version__", ncresidue_core::report::TOOL_VERSION)?;
    Ok(())
}
