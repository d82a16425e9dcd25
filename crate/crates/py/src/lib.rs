//! Python module `sparselaw`.
//!
//! Structured results (level decompositions, height results, experiment
//! reports) cross the boundary as JSON and are decoded with the standard
//! `json` module, so they arrive as plain dicts and lists.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use sparselaw::harness::{run_experiment as run_core, ExperimentConfig, ExperimentId};
use sparselaw::heightkit::{build_levels as build_core, height_of};
use sparselaw::logic::{eval_fo, parse, pebble_equivalent as pebble_core};
use sparselaw::pathkit::{self, EtaSequence, PhiTriple, Starts};
use sparselaw::randmodel::{self, Case, SamplerConfig};
use sparselaw::relstruct::{read_structure, write_structure, Node, RelationalStructure};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// A finite relational structure on nodes `1..=n`.
#[pyclass(name = "Structure", module = "sparselaw", frozen)]
pub struct PyStructure {
    inner: RelationalStructure,
}

#[pymethods]
impl PyStructure {
    /// Parses the text format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyStructure {
            inner: read_structure(text).map_err(err)?,
        })
    }

    /// Digraph on the `R1`, `R2` vocabulary.
    #[staticmethod]
    fn digraph(n: u32, r1: Vec<(Node, Node)>, r2: Vec<(Node, Node)>) -> PyResult<Self> {
        Ok(PyStructure {
            inner: RelationalStructure::digraph(n, &r1, &r2).map_err(err)?,
        })
    }

    /// Undirected graph on the `R` vocabulary.
    #[staticmethod]
    fn graph(n: u32, edges: Vec<(Node, Node)>) -> PyResult<Self> {
        Ok(PyStructure {
            inner: RelationalStructure::graph(n, &edges).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (case, n, seed = 0, trial = 0, alpha = None, alpha1 = None, alpha2 = None, nonpaper_regime = false))]
    #[allow(clippy::too_many_arguments)]
    fn sample(
        case: &str,
        n: u32,
        seed: u64,
        trial: u64,
        alpha: Option<f64>,
        alpha1: Option<f64>,
        alpha2: Option<f64>,
        nonpaper_regime: bool,
    ) -> PyResult<Self> {
        let case: Case = case.parse().map_err(err)?;
        let mut c = match case {
            Case::A => SamplerConfig::case_a(n, alpha.unwrap_or(randmodel::DEFAULT_ALPHA_A), seed, trial),
            Case::B => SamplerConfig::case_b(
                n,
                alpha1.unwrap_or(randmodel::DEFAULT_ALPHA1),
                alpha2.unwrap_or(randmodel::DEFAULT_ALPHA2),
                seed,
                trial,
            ),
        };
        c.nonpaper_regime = nonpaper_regime;
        Ok(PyStructure {
            inner: randmodel::sample(&c).map_err(err)?,
        })
    }

    fn to_text(&self) -> String {
        write_structure(&self.inner)
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    #[getter]
    fn vocabulary(&self) -> String {
        self.inner.vocab().name().to_string()
    }

    /// Tuples of a relation, sorted.
    fn relation(&self, symbol: &str) -> PyResult<Vec<Vec<Node>>> {
        let r = self
            .inner
            .relation(symbol)
            .ok_or_else(|| err(format!("no relation `{symbol}`")))?;
        Ok(r.tuples().map(<[Node]>::to_vec).collect())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Structure(vocabulary={:?}, n={})", self.inner.vocab().name(), self.inner.n())
    }
}

/// Truth value of a formula under an assignment of its free variables.
#[pyfunction]
#[pyo3(signature = (structure, formula, assignment = None))]
fn eval_formula(structure: &PyStructure, formula: &str, assignment: Option<BTreeMap<String, Node>>) -> PyResult<bool> {
    let f = parse(formula, structure.inner.vocab()).map_err(err)?;
    eval_fo(&structure.inner, &f, &assignment.unwrap_or_default()).map_err(err)
}

#[pyfunction]
fn pebble_equivalent(a: &PyStructure, b: &PyStructure, k: usize) -> PyResult<bool> {
    Ok(pebble_core(&a.inner, &b.inner, k).map_err(err)?.equivalent)
}

#[pyfunction]
fn goldilocks_eta(alpha1: f64, alpha2: f64, length: usize) -> PyResult<Vec<u8>> {
    Ok(pathkit::goldilocks_eta(alpha1, alpha2, length).map_err(err)?.entries)
}

#[pyfunction]
fn log_star(x: f64) -> u32 {
    pathkit::log_star(x)
}

fn eta_of(eta: Vec<u8>, alpha1: f64, alpha2: f64) -> PyResult<EtaSequence> {
    EtaSequence::explicit(eta, alpha1, alpha2).map_err(err)
}

fn starts_of(starts: Option<Vec<Node>>) -> Starts {
    starts.map_or(Starts::All, Starts::List)
}

/// Longest `(eta, m)`-path length in a Case B structure.
#[pyfunction]
#[pyo3(signature = (structure, eta, starts = None))]
fn length_eta(structure: &PyStructure, eta: Vec<u8>, starts: Option<Vec<Node>>) -> PyResult<usize> {
    let phi = PhiTriple::case_b(&structure.inner).map_err(err)?;
    let e = eta_of(eta, randmodel::DEFAULT_ALPHA1, randmodel::DEFAULT_ALPHA2)?;
    Ok(pathkit::length_eta(&phi, &e, &starts_of(starts)).length)
}

#[pyfunction]
#[pyo3(signature = (structure, eta, starts = None))]
fn eval_parity_sentence(structure: &PyStructure, eta: Vec<u8>, starts: Option<Vec<Node>>) -> PyResult<bool> {
    let phi = PhiTriple::case_b(&structure.inner).map_err(err)?;
    let e = eta_of(eta, randmodel::DEFAULT_ALPHA1, randmodel::DEFAULT_ALPHA2)?;
    Ok(pathkit::eval_parity_sentence(&phi, &e, &starts_of(starts)).holds)
}

/// Level decomposition from `start` as a dict.
#[pyfunction]
#[pyo3(signature = (structure, start, cap = None, unique_predecessor = false))]
fn build_levels(
    py: Python<'_>,
    structure: &PyStructure,
    start: Node,
    cap: Option<usize>,
    unique_predecessor: bool,
) -> PyResult<Py<PyAny>> {
    if start < 1 || start > structure.inner.n() {
        return Err(err(format!("start {start} outside 1..={}", structure.inner.n())));
    }
    let phi = PhiTriple::case_b(&structure.inner).map_err(err)?;
    to_py(py, &build_core(&phi, start, cap, unique_predecessor))
}

#[pyfunction]
#[pyo3(signature = (structure, cap = None, starts = None))]
fn height(py: Python<'_>, structure: &PyStructure, cap: Option<usize>, starts: Option<Vec<Node>>) -> PyResult<Py<PyAny>> {
    let phi = PhiTriple::case_b(&structure.inner).map_err(err)?;
    to_py(py, &height_of(&phi, &starts_of(starts), cap))
}

/// Runs an experiment. `overrides` replaces fields of the default config,
/// e.g. `{"n_grid": [1024], "trials": 5, "seed": 3}`.
#[pyfunction]
#[pyo3(signature = (id, overrides = None))]
fn run_experiment(py: Python<'_>, id: &str, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Py<PyAny>> {
    let id: ExperimentId = id.parse().map_err(err)?;
    let mut value = serde_json::to_value(ExperimentConfig::new(id)).map_err(err)?;
    if let Some(o) = overrides {
        let text: String = py.import("json")?.call_method1("dumps", (o,))?.extract()?;
        let patch: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&text).map_err(err)?;
        let obj = value.as_object_mut().expect("config serializes to an object");
        for (k, v) in patch {
            if !obj.contains_key(&k) {
                return Err(err(format!("unknown config field `{k}`")));
            }
            obj.insert(k, v);
        }
    }
    let config: ExperimentConfig = serde_json::from_value(value).map_err(err)?;
    let report = py.detach(|| run_core(&config)).map_err(err)?;
    to_py(py, &report)
}

#[pymodule(name = "sparselaw")]
fn sparselaw_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStructure>()?;
    m.add_function(wrap_pyfunction!(eval_formula, m)?)?;
    m.add_function(wrap_pyfunction!(pebble_equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(goldilocks_eta, m)?)?;
    m.add_function(wrap_pyfunction!(log_star, m)?)?;
    m.add_function(wrap_pyfunction!(length_eta, m)?)?;
    m.add_function(wrap_pyfunction!(eval_parity_sentence, m)?)?;
    m.add_function(wrap_pyfunction!(build_levels, m)?)?;
    m.add_function(wrap_pyfunction!(height, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
