//! Python bindings for `qpath-core`.
//!
//! Reports and resource rows come back as plain dicts; spectra, classes and
//! grids are wrapped objects.

use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use qpath_core::error::Error;
use qpath_core::integrate::{report_cost, RunConfig};
use qpath_core::qae::{QaeMode, QsumConfig, SumSource};
use qpath_core::{grid, probit, truncate, CurberaGrid, EigenSpectrum, SmoothnessClass, SummandOracle};

pyo3::create_exception!(qpath, QpathError, PyException, "Base class for qpath errors.");
pyo3::create_exception!(qpath, CapError, QpathError, "Enumeration, memory or index-size cap exceeded.");
pyo3::create_exception!(qpath, BoundViolationError, QpathError, "A summand exceeded its declared bound.");

fn err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::InvalidConfig(_) | Error::Json(_) => PyValueError::new_err(e.to_string()),
        Error::EnumerationCap { .. } | Error::MemoryCap { .. } | Error::GridOverflow { .. } => {
            CapError::new_err(e.to_string())
        }
        Error::BoundViolation { .. } => BoundViolationError::new_err(e.to_string()),
        _ => QpathError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| err(e.into()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

#[pyclass(name = "EigenSpectrum", frozen)]
struct PySpectrum(EigenSpectrum);

#[pymethods]
impl PySpectrum {
    #[staticmethod]
    fn wiener() -> Self {
        Self(EigenSpectrum::Wiener)
    }

    #[staticmethod]
    fn power_law(a: f64, k: f64) -> PyResult<Self> {
        EigenSpectrum::power_law(a, k).map(Self).map_err(err)
    }

    /// λ_j for j ≥ 1.
    fn eigenvalue(&self, j: u64) -> PyResult<f64> {
        if j == 0 {
            return Err(PyValueError::new_err("eigenvalue indices start at 1"));
        }
        Ok(self.0.eigenvalue(j))
    }

    fn partial_trace(&self, d: u64) -> f64 {
        self.0.partial_trace(d)
    }

    fn tail_bound(&self, d: u64) -> f64 {
        self.0.tail_bound(d)
    }

    fn trace(&self) -> f64 {
        self.0.trace()
    }

    fn __repr__(&self) -> String {
        match self.0 {
            EigenSpectrum::Wiener => "EigenSpectrum.wiener()".into(),
            EigenSpectrum::PowerLaw { a, k } => format!("EigenSpectrum.power_law({a}, {k})"),
        }
    }
}

#[pyclass(name = "SmoothnessClass", frozen)]
struct PySmoothness(SmoothnessClass);

#[pymethods]
impl PySmoothness {
    /// Class r with constants K = [K0, ..., Kr].
    #[new]
    #[pyo3(signature = (r, constants))]
    fn new(r: u32, constants: Vec<f64>) -> PyResult<Self> {
        SmoothnessClass::new(r, constants).map(Self).map_err(err)
    }

    #[getter]
    fn r(&self) -> u32 {
        self.0.r()
    }

    #[getter]
    fn constants(&self) -> Vec<f64> {
        self.0.constants().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("SmoothnessClass({}, {:?})", self.0.r(), self.0.constants())
    }
}

#[pyclass(name = "CurberaGrid", frozen)]
struct PyGrid(CurberaGrid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(spec: &PySpectrum, d: usize, m: u64) -> PyResult<Self> {
        grid::build_grid(&spec.0, d, m).map(Self).map_err(err)
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d()
    }

    #[getter]
    fn m(&self) -> u64 {
        self.0.m()
    }

    /// Number of points m^d.
    #[getter]
    fn n(&self) -> u128 {
        self.0.n()
    }

    fn axis(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.0.d() {
            return Err(PyValueError::new_err(format!("axis {i} out of range for d = {}", self.0.d())));
        }
        Ok(self.0.axis(i).to_vec())
    }

    fn point(&self, index: u128) -> PyResult<Vec<f64>> {
        self.0.point(index).map_err(err)
    }

    fn worst_case_error_bound(&self, k1: f64) -> f64 {
        self.0.worst_case_error_bound(k1)
    }

    fn info(&self, py: Python<'_>, k1: f64) -> PyResult<Py<PyAny>> {
        to_py(py, &self.0.info(k1))
    }
}

#[pyfunction]
fn psi(x: f64) -> PyResult<f64> {
    probit::psi(x).map_err(err)
}

#[pyfunction]
fn psi_inv(p: f64) -> PyResult<f64> {
    probit::psi_inv(p).map_err(err)
}

#[pyfunction]
fn gauss_quantile(p: f64) -> PyResult<f64> {
    probit::gauss_quantile(p).map_err(err)
}

#[pyfunction]
fn dimension_upper(spec: &PySpectrum, cls: &PySmoothness, eps: f64) -> PyResult<usize> {
    truncate::dimension_upper(&spec.0, &cls.0, eps).map_err(err)
}

#[pyfunction]
fn dimension_by_tail(spec: &PySpectrum, cls: &PySmoothness, eps: f64) -> PyResult<usize> {
    truncate::dimension_by_tail(&spec.0, &cls.0, eps).map_err(err)
}

#[pyfunction]
fn dimension_scaled(cls: &PySmoothness, k0: f64, eps: f64) -> PyResult<usize> {
    truncate::dimension_scaled(&cls.0, k0, eps).map_err(err)
}

#[pyfunction]
fn select_m(spec: &PySpectrum, d: usize, k1: f64, eps_grid: f64) -> PyResult<u64> {
    grid::select_m(&spec.0, d, k1, eps_grid).map_err(err)
}

/// Quantum summation of `values` (each in [-1, 1]); returns the result as a dict.
#[pyfunction]
#[pyo3(signature = (values, delta, repetitions = 1, mode = "statevector", seed = 0))]
fn qsum(py: Python<'_>, values: Vec<f64>, delta: f64, repetitions: u32, mode: &str, seed: u64) -> PyResult<Py<PyAny>> {
    let mode = match mode {
        "statevector" => QaeMode::Statevector,
        "analytic" | "analytic_distribution" => QaeMode::AnalyticDistribution,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let oracle = SummandOracle::from_values(values).map_err(err)?;
    let cfg = QsumConfig::new(delta, repetitions, mode, seed);
    let result = py.detach(|| qpath_core::qsum(SumSource::Oracle(&oracle), &cfg)).map_err(err)?;
    to_py(py, &result)
}

/// Runs the pipeline from a JSON config string; returns the report as a dict.
#[pyfunction]
fn integrate(py: Python<'_>, config_json: &str) -> PyResult<Py<PyAny>> {
    let cfg = RunConfig::from_json(config_json).map_err(err)?;
    let report = py.detach(|| cfg.run()).map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
fn predict_resources(
    py: Python<'_>,
    spec: &PySpectrum,
    cls: &PySmoothness,
    k0: f64,
    eps: f64,
    split: f64,
) -> PyResult<Py<PyAny>> {
    let row = qpath_core::predict_resources(&spec.0, &cls.0, k0, eps, split).map_err(err)?;
    to_py(py, &row)
}

#[pyfunction]
#[pyo3(name = "report_cost")]
fn py_report_cost(eps: f64, spec: &PySpectrum, cls: &PySmoothness, k0: f64, unit_cost: f64) -> PyResult<f64> {
    report_cost(eps, &spec.0, &cls.0, k0, unit_cost).map_err(err)
}

#[pymodule]
fn qpath(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QpathError", m.py().get_type::<QpathError>())?;
    m.add("CapError", m.py().get_type::<CapError>())?;
    m.add("BoundViolationError", m.py().get_type::<BoundViolationError>())?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PySmoothness>()?;
    m.add_class::<PyGrid>()?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(psi_inv, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(dimension_upper, m)?)?;
    m.add_function(wrap_pyfunction!(dimension_by_tail, m)?)?;
    m.add_function(wrap_pyfunction!(dimension_scaled, m)?)?;
    m.add_function(wrap_pyfunction!(select_m, m)?)?;
    m.add_function(wrap_pyfunction!(qsum, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(predict_resources, m)?)?;
    m.add_function(wrap_pyfunction!(py_report_cost, m)?)?;
    Ok(())
}
