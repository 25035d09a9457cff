//! Python bindings for frameforge.
//!
//! Report-style results (verdicts, certificates, flow summaries) are returned
//! as plain dicts; frames and norm specs are wrapped classes.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use frameforge::spec::{format_rational, Tolerances};
use frameforge::{Field, FrameError, FrameMatrix, NormSpec};

fn to_pyerr(e: FrameError) -> PyErr {
    match e {
        FrameError::CombinatorialBudgetExceeded { .. } | FrameError::EigenDecompositionFailure(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_field(field: &str) -> PyResult<Field> {
    field.parse().map_err(to_pyerr)
}

fn tolerances(grad_tol: Option<f64>, residual_tol: Option<f64>, rank_tol: Option<f64>) -> Tolerances {
    let d = Tolerances::default();
    Tolerances {
        grad_tol: grad_tol.unwrap_or(d.grad_tol),
        residual_tol: residual_tol.unwrap_or(d.residual_tol),
        rank_tol: rank_tol.unwrap_or(d.rank_tol),
        spark_tol: d.spark_tol,
    }
}

/// A d×n frame; column j is the frame vector f_j.
#[pyclass(name = "Frame", module = "frameforge", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyFrame {
    inner: FrameMatrix,
}

#[pymethods]
impl PyFrame {
    /// Builds a frame from a list of rows of real or complex numbers.
    #[new]
    #[pyo3(signature = (rows, field = "real"))]
    fn new(rows: Vec<Vec<Complex64>>, field: &str) -> PyResult<Self> {
        let field = parse_field(field)?;
        frame_from_rows(&rows, field).map(|inner| Self { inner })
    }

    /// Seeded i.i.d. Gaussian frame.
    #[staticmethod]
    #[pyo3(signature = (d, n, field = "real", seed = 0))]
    fn random(d: usize, n: usize, field: &str, seed: u64) -> PyResult<Self> {
        let inner = frameforge::random_full_spark_init(d, n, parse_field(field)?, seed).map_err(to_pyerr)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        frameforge::io::frame_from_json(text).map(|inner| Self { inner }).map_err(to_pyerr)
    }

    fn to_json(&self) -> String {
        frameforge::io::frame_to_json(&self.inner)
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn field(&self) -> String {
        self.inner.field().to_string()
    }

    /// Entries as a list of rows of complex numbers.
    fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.inner.d()).map(|i| (0..self.inner.n()).map(|j| self.inner.get(i, j)).collect()).collect()
    }

    fn column_norms_sq(&self) -> Vec<f64> {
        frameforge::column_norms_sq(&self.inner)
    }

    fn distance_to_identity(&self) -> f64 {
        frameforge::frobenius_distance_to_identity(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Frame(field={}, d={}, n={})", self.inner.field(), self.inner.d(), self.inner.n())
    }
}

fn frame_from_rows(rows: &[Vec<Complex64>], field: Field) -> PyResult<FrameMatrix> {
    let d = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if d == 0 || n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("rows must be a non-empty rectangular list"));
    }
    let flat: Vec<Complex64> = rows.concat();
    let frame = match field {
        Field::Complex => FrameMatrix::from_complex_rows(d, n, &flat),
        Field::Real => {
            if flat.iter().any(|z| z.im != 0.0) {
                return Err(PyValueError::new_err("real frame given complex entries"));
            }
            FrameMatrix::from_real_rows(d, n, &flat.iter().map(|z| z.re).collect::<Vec<_>>())
        }
    };
    frame.map_err(to_pyerr)
}

/// Prescribed squared norms r (as "p/q" strings) and ambient dimension d.
#[pyclass(name = "NormSpec", module = "frameforge", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyNormSpec {
    inner: NormSpec,
}

#[pymethods]
impl PyNormSpec {
    #[new]
    fn new(d: usize, r: Vec<String>) -> PyResult<Self> {
        let refs: Vec<&str> = r.iter().map(String::as_str).collect();
        NormSpec::parse(d, &refs).map(|inner| Self { inner }).map_err(to_pyerr)
    }

    #[staticmethod]
    fn equal_norm(d: usize, n: usize) -> PyResult<Self> {
        NormSpec::equal_norm(d, n).map(|inner| Self { inner }).map_err(to_pyerr)
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn r(&self) -> Vec<String> {
        self.inner.r().iter().map(format_rational).collect()
    }

    fn __repr__(&self) -> String {
        format!("NormSpec(d={}, r={:?})", self.inner.d(), self.r())
    }
}

#[pyfunction]
fn check_admissible<'py>(py: Python<'py>, spec: &PyNormSpec) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &frameforge::check_admissible(&spec.inner))
}

#[pyfunction]
fn build_s_vector<'py>(py: Python<'py>, spec: &PyNormSpec) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &frameforge::build_s_vector(&spec.inner).map_err(to_pyerr)?)
}

#[pyfunction]
fn energy<'py>(py: Python<'py>, frame: &PyFrame, spec: &PyNormSpec) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &frameforge::energy(&frame.inner, &spec.inner).map_err(to_pyerr)?)
}

#[pyfunction]
fn gradient(frame: &PyFrame, spec: &PyNormSpec) -> PyResult<PyFrame> {
    let inner = frameforge::gradient(&frame.inner, &spec.inner).map_err(to_pyerr)?;
    Ok(PyFrame { inner })
}

#[pyfunction]
fn frame_potential(frame: &PyFrame) -> f64 {
    frameforge::frame_potential(&frame.inner)
}

#[pyfunction]
fn frame_energy_bc(frame: &PyFrame) -> f64 {
    frameforge::frame_energy_bc(&frame.inner)
}

/// Runs the descent and returns (terminal frame, report dict).
#[pyfunction]
#[pyo3(signature = (frame, spec, max_iters = None, grad_tol = None, residual_tol = None))]
fn descend<'py>(
    py: Python<'py>,
    frame: &PyFrame,
    spec: &PyNormSpec,
    max_iters: Option<usize>,
    grad_tol: Option<f64>,
    residual_tol: Option<f64>,
) -> PyResult<(PyFrame, Bound<'py, PyAny>)> {
    let mut cfg = frameforge::FlowConfig { tolerances: tolerances(grad_tol, residual_tol, None), ..Default::default() };
    if let Some(m) = max_iters {
        cfg.max_iters = m;
    }
    let (f, s) = (frame.inner.clone(), spec.inner.clone());
    let report = py.detach(move || frameforge::descend(&f, &s, &cfg)).map_err(to_pyerr)?;
    let dict = to_dict(py, &report)?;
    Ok((PyFrame { inner: report.terminal }, dict))
}

#[pyfunction]
#[pyo3(signature = (frame, rank_tol = None))]
fn is_full_spark<'py>(py: Python<'py>, frame: &PyFrame, rank_tol: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let mut tol = Tolerances::default();
    if let Some(t) = rank_tol {
        tol.spark_tol = t;
    }
    to_dict(py, &frameforge::is_full_spark(&frame.inner, &tol).map_err(to_pyerr)?)
}

#[pyfunction]
#[pyo3(signature = (frame, spec, rank_tol = None))]
fn check_property_s<'py>(
    py: Python<'py>,
    frame: &PyFrame,
    spec: &PyNormSpec,
    rank_tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let tol = tolerances(None, None, rank_tol);
    to_dict(py, &frameforge::check_property_s(&frame.inner, &spec.inner, &tol).map_err(to_pyerr)?)
}

#[pyfunction]
#[pyo3(signature = (frame, spec, grad_tol = None, residual_tol = None))]
fn classify_critical_point<'py>(
    py: Python<'py>,
    frame: &PyFrame,
    spec: &PyNormSpec,
    grad_tol: Option<f64>,
    residual_tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let tol = tolerances(grad_tol, residual_tol, None);
    to_dict(py, &frameforge::classify_critical_point(&frame.inner, &spec.inner, &tol).map_err(to_pyerr)?)
}

#[pyfunction]
fn k_ell(spec: &PyNormSpec, ell: usize) -> PyResult<usize> {
    frameforge::k_ell(&spec.inner, ell).map_err(to_pyerr)
}

#[pyfunction]
fn best_ansatz_constant<'py>(py: Python<'py>, spec: &PyNormSpec) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &frameforge::best_ansatz_constant(&spec.inner).map_err(to_pyerr)?)
}

#[pyfunction]
fn stratum_dimension(d: usize, n: usize, ell: usize, k: usize) -> PyResult<usize> {
    frameforge::stratum_dimension(d, n, ell, k).map_err(to_pyerr)
}

/// Codimension lower bound as a "p/q" string.
#[pyfunction]
fn codimension_bound(spec: &PyNormSpec, field: &str) -> PyResult<String> {
    let c = frameforge::codimension_bound(&spec.inner, parse_field(field)?).map_err(to_pyerr)?;
    Ok(format_rational(&c))
}

#[pyfunction]
#[pyo3(signature = (spec, field, q = 0))]
fn certify_connectivity<'py>(py: Python<'py>, spec: &PyNormSpec, field: &str, q: usize) -> PyResult<Bound<'py, PyAny>> {
    let cert = frameforge::certify_connectivity(&spec.inner, parse_field(field)?, q).map_err(to_pyerr)?;
    to_dict(py, &cert)
}

#[pyfunction]
fn certify_neighborhood_connectivity<'py>(py: Python<'py>, spec: &PyNormSpec) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &frameforge::certify_neighborhood_connectivity(&spec.inner).map_err(to_pyerr)?)
}

#[pyfunction]
#[pyo3(signature = (d, field, q = 0))]
fn min_n_for_q_connected(d: usize, field: &str, q: usize) -> PyResult<usize> {
    frameforge::min_n_for_q_connected(d, parse_field(field)?, q).map_err(to_pyerr)
}

#[pymodule(name = "frameforge")]
mod frameforge_module {
    #[pymodule_export]
    use super::{
        best_ansatz_constant, build_s_vector, certify_connectivity, certify_neighborhood_connectivity,
        check_admissible, check_property_s, classify_critical_point, codimension_bound, descend, energy,
        frame_energy_bc, frame_potential, gradient, is_full_spark, k_ell, min_n_for_q_connected, stratum_dimension,
        PyFrame, PyNormSpec,
    };
}
