//! Python bindings: vectors, coverage checks, exact search, bounds and the conjecture sweep.

use cyccover::bounds as bounds_engine;
use cyccover::cayley;
use cyccover::conjecture;
use cyccover::covering::{self, Budget};
use cyccover::poly;
use cyccover::search::{self, SearchBudget};
use cyccover::{Ambient, Basis, CycVec, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::BudgetExceeded { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Round-trips a serializable value through `json.loads` into plain Python objects.
fn to_object<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn budget(bits: Option<u32>) -> Budget {
    bits.map(Budget::bits).unwrap_or_default()
}

/// A vector in F_q^n with cyclic indices.
#[pyclass(name = "CycVec", frozen, eq, hash, from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyCycVec(CycVec);

#[pymethods]
impl PyCycVec {
    #[new]
    #[pyo3(signature = (literal, q = 2))]
    fn new(literal: &str, q: u32) -> PyResult<Self> {
        CycVec::parse_auto(q, literal).map(PyCycVec).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn q(&self) -> u8 {
        self.0.q()
    }

    fn digits(&self) -> Vec<u8> {
        self.0.digits()
    }

    fn shift(&self, k: i64) -> Self {
        PyCycVec(self.0.shift(k))
    }

    fn scale_indices(&self, ell: i64) -> PyResult<Self> {
        self.0.scale_indices(ell).map(PyCycVec).map_err(to_py)
    }

    fn reverse(&self) -> Self {
        PyCycVec(self.0.reverse())
    }

    fn dot(&self, other: &PyCycVec) -> PyResult<u8> {
        self.0.dot(&other.0).map_err(to_py)
    }

    fn is_symmetric(&self) -> bool {
        self.0.is_symmetric()
    }

    fn hamming_weight(&self) -> usize {
        self.0.hamming_weight()
    }

    fn __add__(&self, other: &PyCycVec) -> PyResult<Self> {
        self.0.add(&other.0).map(PyCycVec).map_err(to_py)
    }

    fn __sub__(&self, other: &PyCycVec) -> PyResult<Self> {
        self.0.sub(&other.0).map(PyCycVec).map_err(to_py)
    }

    fn __getitem__(&self, i: i64) -> u8 {
        self.0.get(i)
    }

    fn __len__(&self) -> usize {
        self.0.n()
    }

    fn __str__(&self) -> String {
        self.0.literal()
    }

    fn __repr__(&self) -> String {
        format!("CycVec('{}', q={})", self.0.literal(), self.0.q())
    }
}

fn basis_of(vs: &[PyCycVec]) -> PyResult<Basis> {
    let first = vs.first().ok_or_else(|| PyValueError::new_err("need at least one vector"))?;
    let rows: Vec<CycVec> = vs.iter().map(|v| v.0.clone()).collect();
    Basis::span(first.0.ambient(), &rows).map_err(to_py)
}

/// Whether every x has a shift orthogonal to v.
#[pyfunction]
#[pyo3(signature = (v, budget_bits = None))]
fn works(v: &PyCycVec, budget_bits: Option<u32>) -> PyResult<bool> {
    covering::works(&v.0, budget(budget_bits)).map_err(to_py)
}

/// Coverage report for the span of `vs`: covers, covered_count, witness.
#[pyfunction]
#[pyo3(signature = (vs, budget_bits = None))]
fn works_together(py: Python<'_>, vs: Vec<PyCycVec>, budget_bits: Option<u32>) -> PyResult<Py<PyAny>> {
    let report = covering::works_together(&basis_of(&vs)?, budget(budget_bits)).map_err(to_py)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("covers", report.covers)?;
    dict.set_item("covered_count", report.covered_count)?;
    dict.set_item("tested_space", report.tested_space)?;
    dict.set_item("witness", report.witness.map(PyCycVec))?;
    Ok(dict.into_any().unbind())
}

#[pyfunction]
fn is_in_w(v: &PyCycVec) -> PyResult<bool> {
    covering::is_in_w(&v.0).map_err(to_py)
}

/// Exact h_q(n) with a witness basis.
#[pyfunction]
#[pyo3(signature = (q, n, budget_bits = None, max_nodes = None, time_limit = None))]
fn h_exact(
    py: Python<'_>,
    q: u32,
    n: usize,
    budget_bits: Option<u32>,
    max_nodes: Option<u64>,
    time_limit: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let mut b = SearchBudget::default();
    if let Some(bits) = budget_bits {
        b.max_map_bits = bits;
    }
    if let Some(m) = max_nodes {
        b.max_nodes = m;
    }
    b.time_limit = time_limit.map(std::time::Duration::from_secs_f64);
    let r = py.detach(|| search::h_exact(q, n, b)).map_err(to_py)?;
    to_object(py, &r)
}

/// Best known (lower, upper) for h_q(n) with rule provenance.
#[pyfunction]
#[pyo3(signature = (n, q = 2))]
fn bounds(py: Python<'_>, n: u64, q: u8) -> PyResult<Py<PyAny>> {
    to_object(py, &bounds_engine::bounds(q, n))
}

#[pyfunction]
#[pyo3(signature = (max_n, q = 2, escalate = false, budget_bits = None))]
fn table(py: Python<'_>, max_n: u64, q: u8, escalate: bool, budget_bits: Option<u32>) -> PyResult<Py<PyAny>> {
    let mut b = SearchBudget::default();
    if let Some(bits) = budget_bits {
        b.max_map_bits = bits;
    }
    let rows = py.detach(|| bounds_engine::table(q, max_n, escalate, b)).map_err(to_py)?;
    to_object(py, &rows)
}

/// Symmetric-only sweep at odd n: every exception, grouped into orbits.
#[pyfunction]
#[pyo3(signature = (n, budget_bits = None))]
fn verify_conjecture(py: Python<'_>, n: usize, budget_bits: Option<u32>) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| conjecture::verify_conjecture(n, budget(budget_bits))).map_err(to_py)?;
    to_object(py, &r)
}

/// Bad-subgraph certificate for v, or None when {ê, v} works together.
#[pyfunction]
#[pyo3(signature = (v, budget_bits = None))]
fn find_bad_subgraph(py: Python<'_>, v: &PyCycVec, budget_bits: Option<u32>) -> PyResult<Py<PyAny>> {
    let cert = cayley::find_bad_subgraph(&v.0, budget(budget_bits)).map_err(to_py)?;
    to_object(py, &cert)
}

#[pyfunction]
fn girth(n: usize, gens: Vec<usize>) -> PyResult<usize> {
    cayley::girth(n, &gens).map_err(to_py)
}

/// Normalizes a working tuple at prime p so that the first vector becomes ê.
#[pyfunction]
#[pyo3(signature = (vs, p, budget_bits = None))]
fn normalize(vs: Vec<PyCycVec>, p: usize, budget_bits: Option<u32>) -> PyResult<Vec<PyCycVec>> {
    let rows: Vec<CycVec> = vs.into_iter().map(|v| v.0).collect();
    let out = poly::normalize_to_e(&rows, p, budget(budget_bits)).map_err(to_py)?;
    Ok(out.into_iter().map(PyCycVec).collect())
}

/// An x with no shift orthogonal to v, for odd q and prime p > q.
#[pyfunction]
fn failure_certificate(v: &PyCycVec, p: usize) -> PyResult<PyCycVec> {
    poly::failure_certificate(&v.0, p).map(PyCycVec).map_err(to_py)
}

/// The all-ones vector of length n.
#[pyfunction]
#[pyo3(signature = (n, q = 2))]
fn e_hat(n: usize, q: u32) -> PyResult<PyCycVec> {
    Ok(PyCycVec(CycVec::e_hat(Ambient::new(q, n).map_err(to_py)?)))
}

#[pymodule]
fn cyccover_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCycVec>()?;
    m.add_function(wrap_pyfunction!(works, m)?)?;
    m.add_function(wrap_pyfunction!(works_together, m)?)?;
    m.add_function(wrap_pyfunction!(is_in_w, m)?)?;
    m.add_function(wrap_pyfunction!(h_exact, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    m.add_function(wrap_pyfunction!(verify_conjecture, m)?)?;
    m.add_function(wrap_pyfunction!(find_bad_subgraph, m)?)?;
    m.add_function(wrap_pyfunction!(girth, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(failure_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(e_hat, m)?)?;
    Ok(())
}
