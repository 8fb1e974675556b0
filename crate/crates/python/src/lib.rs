//! Python bindings. Results cross the boundary as plain dicts and lists.

use std::collections::BTreeSet;
use std::fs::File;
use std::path::PathBuf;

use analogon_core::engine::{Engine, EngineError};
use analogon_core::stats::{self, CorrelationResult};
use analogon_core::{abstract_corpus, FocusOnlyMode, FocusSelection, Match, Method};
use pyo3::create_exception;
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyString};
use pyo3::IntoPyObjectExt;
use serde_json::{json, Value};

create_exception!(analogon, AnalogonError, PyValueError, "Engine error; `code` holds the stable error code.");

fn raise(code: &str, message: impl std::fmt::Display) -> PyErr {
    let err = AnalogonError::new_err(format!("{code}: {message}"));
    Python::attach(|py| {
        let _ = err.value(py).setattr("code", code);
    });
    err
}

fn engine_err(e: EngineError) -> PyErr {
    raise(e.code(), &e)
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    match v {
        Value::Null => Ok(py.None().into_bound(py)),
        Value::Bool(b) => b.into_bound_py_any(py),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py),
            None => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py),
        },
        Value::String(s) => s.as_str().into_bound_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            Ok(list.into_any())
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            Ok(dict.into_any())
        }
    }
}

fn serialize<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| raise("serialization", e))?;
    to_py(py, &v)
}

/// Accepts a selection as a JSON string or as a dict.
fn selection_from(obj: &Bound<'_, PyAny>) -> PyResult<FocusSelection> {
    let text: String = if let Ok(s) = obj.cast::<PyString>() {
        s.to_str()?.to_owned()
    } else {
        let json = obj.py().import("json")?;
        json.call_method1("dumps", (obj,))?.extract()?
    };
    serde_json::from_str(&text).map_err(|e| raise("invalid_selection", e))
}

fn match_value(m: &Match) -> Value {
    let props: Vec<Value> = m.matched_properties.iter().map(|(l, p)| json!({ "lemma": l, "property": p })).collect();
    json!({
        "doc_id": m.doc_id,
        "score": m.score,
        "rank": m.rank,
        "method": m.method.as_str(),
        "matched_properties": props,
    })
}

/// Loaded corpus, knowledge base and word vectors.
#[pyclass(name = "Engine", frozen, module = "analogon")]
struct PyEngine {
    inner: Engine,
}

#[pymethods]
impl PyEngine {
    #[new]
    #[pyo3(signature = (corpus, kb, embeddings, kb_fallback = None, purpmech = None))]
    fn new(
        py: Python<'_>,
        corpus: PathBuf,
        kb: PathBuf,
        embeddings: PathBuf,
        kb_fallback: Option<PathBuf>,
        purpmech: Option<PathBuf>,
    ) -> PyResult<Self> {
        let inner = py
            .detach(|| Engine::load(&corpus, &kb, kb_fallback.as_deref(), &embeddings, purpmech.as_deref()))
            .map_err(engine_err)?;
        Ok(PyEngine { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.corpus.len()
    }

    fn products<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let list: Vec<Value> = self.inner.corpus.iter().map(|d| json!({ "id": d.id, "title": d.title })).collect();
        to_py(py, &Value::Array(list))
    }

    fn product<'py>(&self, py: Python<'py>, id: &str) -> PyResult<Bound<'py, PyAny>> {
        let doc = self.inner.corpus.get(id).ok_or_else(|| PyKeyError::new_err(id.to_string()))?;
        serialize(py, doc)
    }

    /// Level-ordered properties offered for a lemma.
    fn abstractions<'py>(&self, py: Python<'py>, lemma: &str) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &self.inner.kb.abstractions_for(&lemma.to_lowercase()))
    }

    /// Query tokens as `{"kind", "text"}` dicts.
    fn build_query<'py>(&self, py: Python<'py>, selection: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let sel = selection_from(selection)?;
        let doc = self
            .inner
            .corpus
            .get(&sel.doc_id)
            .ok_or_else(|| raise("unknown_document", format!("{:?}", sel.doc_id)))?;
        let q = analogon_core::build_query(doc, &sel, &self.inner.kb).map_err(|e| raise(e.code(), e))?;
        serialize(py, &q.tokens)
    }

    #[pyo3(signature = (selection, method = "focus-abstracted", k = 10, focus_only_mode = "step2-terms"))]
    fn search<'py>(
        &self,
        py: Python<'py>,
        selection: &Bound<'py, PyAny>,
        method: &str,
        k: usize,
        focus_only_mode: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let sel = selection_from(selection)?;
        let method: Method = method.parse().map_err(|e: analogon_core::SearchError| raise(e.code(), &e))?;
        let mode: FocusOnlyMode = serde_json::from_value(Value::from(focus_only_mode))
            .map_err(|_| raise("invalid_mode", format!("unknown focus-only mode {focus_only_mode:?}")))?;
        let outcome = py.detach(|| self.inner.search(&sel, method, k, mode)).map_err(engine_err)?;
        let out = json!({
            "query_tokens": serde_json::to_value(&outcome.query_tokens).expect("tokens serialize"),
            "matches": outcome.matches.iter().map(match_value).collect::<Vec<_>>(),
        });
        to_py(py, &out)
    }

    /// The corpus re-represented under `properties`.
    fn abstract_corpus<'py>(&self, py: Python<'py>, properties: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
        let props: BTreeSet<String> = properties.into_iter().collect();
        let docs = py.detach(|| abstract_corpus(&self.inner.corpus, &props, &self.inner.kb));
        serialize(py, &docs)
    }
}

/// 95% Fisher interval `(low, high)` for a correlation `r` over `n` pairs.
#[pyfunction]
fn fisher_ci(r: f64, n: usize) -> (f64, f64) {
    stats::fisher_ci(r, n)
}

/// `r`, its interval and two-sided p value.
#[pyfunction]
fn correlation<'py>(py: Python<'py>, r: f64, n: usize) -> PyResult<Bound<'py, PyAny>> {
    serialize(py, &CorrelationResult::from_r(r, n))
}

#[pyfunction]
fn pearson<'py>(py: Python<'py>, x: Vec<f64>, y: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let c = stats::pearson(&x, &y).map_err(|e| raise("stats", e))?;
    serialize(py, &c)
}

#[pyfunction]
fn one_way_anova<'py>(py: Python<'py>, groups: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyAny>> {
    let a = stats::one_way_anova(&groups).map_err(|e| raise("stats", e))?;
    serialize(py, &a)
}

#[pyfunction]
#[pyo3(signature = (groups, alpha = 0.05))]
fn tukey_hsd<'py>(py: Python<'py>, groups: Vec<Vec<f64>>, alpha: f64) -> PyResult<Bound<'py, PyAny>> {
    let t = py.detach(|| stats::tukey_hsd(&groups, alpha)).map_err(|e| raise("stats", e))?;
    serialize(py, &t)
}

/// Studentized range critical value.
#[pyfunction]
fn q_crit(py: Python<'_>, alpha: f64, k: usize, df: f64) -> f64 {
    py.detach(|| stats::q_crit(alpha, k, df))
}

/// Rows are raters, columns are rated items.
#[pyfunction]
fn cronbach_alpha(ratings: Vec<Vec<f64>>) -> PyResult<f64> {
    stats::cronbach_alpha(&ratings).map_err(|e| raise("stats", e))
}

/// Full evaluation report from a ratings CSV, as a dict.
#[pyfunction]
fn eval_report<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let file = File::open(&path).map_err(|e| raise("io", format!("{}: {e}", path.display())))?;
    let report = py
        .detach(|| stats::read_ratings(file).and_then(|r| stats::eval_report(&r)))
        .map_err(|e| raise("ratings", e))?;
    serialize(py, &report)
}

#[pymodule]
fn analogon(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("AnalogonError", m.py().get_type::<AnalogonError>())?;
    m.add_class::<PyEngine>()?;
    m.add("METHODS", Method::ALL.iter().map(|m| m.as_str()).collect::<Vec<_>>())?;
    m.add_function(wrap_pyfunction!(fisher_ci, m)?)?;
    m.add_function(wrap_pyfunction!(correlation, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(one_way_anova, m)?)?;
    m.add_function(wrap_pyfunction!(tukey_hsd, m)?)?;
    m.add_function(wrap_pyfunction!(q_crit, m)?)?;
    m.add_function(wrap_pyfunction!(cronbach_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(eval_report, m)?)?;
    Ok(())
}
