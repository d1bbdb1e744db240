//! Python bindings: catalogs, sessions, intentions and the statement renderer.
//! Documents cross the boundary as Python dicts and lists.

use std::sync::Arc;

use iolap::iql::{parse_statement, render_statement};
use iolap::session::seed_from_env;
use iolap::{Catalog, SessionManager, SharedCatalog, SubmitError};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde_json::Value;

create_exception!(iolap, IntentionError, PyException);

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (v.to_string(),))?.unbind())
}

fn from_py(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Raised with `(message, stage, position)`; `position` is a dict with
/// `line`, `column` and `offset`, or `None`.
fn submit_error(py: Python<'_>, e: SubmitError) -> PyErr {
    let position = e.to_json().get("position").cloned().unwrap_or(Value::Null);
    match to_py(py, &position) {
        Ok(p) => IntentionError::new_err((e.message, e.stage, p)),
        Err(err) => err,
    }
}

/// A loaded catalog shared by any number of sessions.
#[pyclass(module = "iolap")]
struct Engine {
    manager: Arc<SessionManager>,
}

#[pymethods]
impl Engine {
    /// Loads `catalog_dir` (or starts empty). The seed defaults to
    /// `ENGINE_SEED`, then 42.
    #[new]
    #[pyo3(signature = (catalog_dir=None, seed=None))]
    fn new(catalog_dir: Option<&str>, seed: Option<u64>) -> PyResult<Self> {
        let catalog = match catalog_dir {
            Some(dir) => Catalog::load_dir(dir).map_err(|e| PyValueError::new_err(e.to_string()))?,
            None => Catalog::default(),
        };
        Ok(Engine {
            manager: Arc::new(SessionManager::new(SharedCatalog::new(catalog), seed.unwrap_or_else(seed_from_env))),
        })
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.manager.seed
    }

    /// Registers a `dimension`, `cube`, `benchmark` or `kpi` entry.
    fn register(&self, kind: &str, spec: &Bound<'_, PyAny>) -> PyResult<()> {
        let spec = from_py(spec)?;
        self.manager.catalog.register(kind, &spec).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn catalog(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.manager.catalog.read().to_json())
    }

    fn session(&self) -> Session {
        Session {
            manager: self.manager.clone(),
            id: self.manager.create(),
        }
    }
}

/// One analysis session. Results accumulate on its dashboard.
#[pyclass(module = "iolap")]
struct Session {
    manager: Arc<SessionManager>,
    #[pyo3(get)]
    id: u64,
}

#[pymethods]
impl Session {
    /// Runs an intention or cube query, optionally prefixed by `NAME =`, and
    /// returns the enhanced cube document.
    fn submit(&self, py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
        let manager = self.manager.clone();
        let id = self.id;
        let text = text.to_string();
        let result = py.detach(move || manager.submit(id, &text));
        match result {
            Ok(doc) => to_py(py, &doc),
            Err(e) => Err(submit_error(py, e)),
        }
    }

    fn dashboard(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let d = self.manager.dashboard(self.id).map_err(|e| submit_error(py, e))?;
        to_py(py, &d)
    }

    fn close(&self) -> bool {
        self.manager.close(self.id)
    }
}

/// Canonical text of a statement.
#[pyfunction]
fn canonical(py: Python<'_>, text: &str) -> PyResult<String> {
    parse_statement(text)
        .map(|s| render_statement(&s))
        .map_err(|e| submit_error(py, e.into()))
}

/// Kullback-Leibler divergence of the normalized values from uniform, or
/// `None` when the values are not a distribution.
#[pyfunction]
fn kl_to_uniform(values: Vec<f64>) -> Option<f64> {
    iolap::models::kl_to_uniform(&values)
}

#[pymodule]
#[pyo3(name = "iolap")]
fn iolap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Engine>()?;
    m.add_class::<Session>()?;
    m.add_function(wrap_pyfunction!(canonical, m)?)?;
    m.add_function(wrap_pyfunction!(kl_to_uniform, m)?)?;
    m.add("IntentionError", m.py().get_type::<IntentionError>())?;
    Ok(())
}
