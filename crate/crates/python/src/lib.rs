//! Python bindings for screencode.
//!
//! Records, reports and manifests cross the boundary as plain Python
//! objects (dicts, lists, strings) decoded from their JSON form.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

use screencode::config::{Mode, ReactConfig, RunConfig};
use screencode::eval::{self, VacuousF1};
use screencode::pipeline;
use screencode::react::ReactState;
use screencode::record;
use screencode::synth::{self, CorpusSpec};
use screencode::taxonomy::{self, Action, Scene};
use screencode::vlm::{self, MockVlm};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(runtime_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: serde::de::DeserializeOwned>(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = py.import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(value_err)
}

fn scenes(names: Vec<String>) -> PyResult<BTreeSet<Scene>> {
    names.iter().map(|n| n.parse::<Scene>().map_err(value_err)).collect()
}

fn actions(names: Vec<String>) -> PyResult<BTreeSet<Action>> {
    names.iter().map(|n| n.parse::<Action>().map_err(value_err)).collect()
}

fn vacuous(name: &str) -> PyResult<VacuousF1> {
    match name {
        "one" => Ok(VacuousF1::One),
        "zero" => Ok(VacuousF1::Zero),
        other => Err(PyValueError::new_err(format!("vacuous must be 'one' or 'zero', got {other:?}"))),
    }
}

/// One unit's scenes and actions, with optional confidences and review flag.
#[pyclass(name = "LabelRecord", module = "screencode_py", from_py_object)]
#[derive(Clone)]
struct PyLabelRecord {
    inner: record::LabelRecord,
}

#[pymethods]
impl PyLabelRecord {
    #[new]
    #[pyo3(signature = (unit_id, scenes=Vec::new(), actions=Vec::new(), confidences=None, flagged=false))]
    fn new(
        unit_id: String,
        scenes: Vec<String>,
        actions: Vec<String>,
        confidences: Option<BTreeMap<String, f64>>,
        flagged: bool,
    ) -> PyResult<Self> {
        let mut inner = record::LabelRecord::with_labels(unit_id, self::scenes(scenes)?, self::actions(actions)?);
        for (name, c) in confidences.unwrap_or_default() {
            inner.confidences.insert(name.parse::<Action>().map_err(value_err)?, c);
        }
        inner.flagged = flagged;
        inner.validate().map_err(value_err)?;
        Ok(PyLabelRecord { inner })
    }

    #[getter]
    fn unit_id(&self) -> String {
        self.inner.unit_id.clone()
    }

    #[getter]
    fn scenes(&self) -> Vec<String> {
        self.inner.scenes.iter().map(|s| s.as_str().to_string()).collect()
    }

    #[getter]
    fn actions(&self) -> Vec<String> {
        self.inner.actions.iter().map(|a| a.as_str().to_string()).collect()
    }

    #[getter]
    fn confidences(&self) -> BTreeMap<String, f64> {
        self.inner.confidences.iter().map(|(a, c)| (a.as_str().to_string(), *c)).collect()
    }

    #[getter]
    fn flagged(&self) -> bool {
        self.inner.flagged
    }

    /// Scene-incompatible actions of this record.
    fn violations(&self) -> Vec<String> {
        self.inner.violations().iter().map(|v| v.action.as_str().to_string()).collect()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    #[staticmethod]
    fn from_dict(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyLabelRecord { inner: from_py(py, obj)? })
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "LabelRecord({:?}, scenes={:?}, actions={:?}, flagged={})",
            self.inner.unit_id,
            self.scenes(),
            self.actions(),
            if self.inner.flagged { "True" } else { "False" }
        )
    }
}

#[pyfunction]
fn scene_names() -> Vec<&'static str> {
    Scene::ALL.iter().map(|s| s.as_str()).collect()
}

#[pyfunction]
fn action_names() -> Vec<&'static str> {
    Action::ALL.iter().map(|a| a.as_str()).collect()
}

/// Scenes in which `action` can occur.
#[pyfunction]
fn compatible_scenes(action: &str) -> PyResult<Vec<&'static str>> {
    let a: Action = action.parse().map_err(value_err)?;
    Ok(taxonomy::compatible_scenes(a).iter().map(|s| s.as_str()).collect())
}

/// Actions among `actions` that cannot occur in any of `scenes`.
#[pyfunction]
fn check_compatibility(scenes: Vec<String>, actions: Vec<String>) -> PyResult<Vec<&'static str>> {
    let v = taxonomy::check_compatibility(&self::scenes(scenes)?, &self::actions(actions)?);
    Ok(v.iter().map(|v| v.action.as_str()).collect())
}

/// Reads a model reply into a dict; raises ValueError when no label object is found.
#[pyfunction]
fn parse_label<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    let label = vlm::parse_structured_label(text).map_err(value_err)?;
    to_py(py, &label)
}

#[pyfunction]
fn cohen_kappa(a: Vec<String>, b: Vec<String>) -> PyResult<f64> {
    eval::cohen_kappa(&a, &b).map_err(value_err)
}

/// Scores predictions against gold records; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (gold, pred, vacuous="one"))]
fn evaluate<'py>(py: Python<'py>, gold: Vec<PyLabelRecord>, pred: Vec<PyLabelRecord>, vacuous: &str) -> PyResult<Bound<'py, PyAny>> {
    let g: Vec<_> = gold.into_iter().map(|r| r.inner).collect();
    let p: Vec<_> = pred.into_iter().map(|r| r.inner).collect();
    let report = eval::evaluate_records(&g, &p, self::vacuous(vacuous)?).map_err(value_err)?;
    to_py(py, &report)
}

/// Scores two label files (TSV or JSONL).
#[pyfunction]
#[pyo3(signature = (gold, pred, vacuous="one"))]
fn evaluate_files<'py>(py: Python<'py>, gold: PathBuf, pred: PathBuf, vacuous: &str) -> PyResult<Bound<'py, PyAny>> {
    let report = eval::evaluate_corpus(&gold, &pred, self::vacuous(vacuous)?).map_err(runtime_err)?;
    to_py(py, &report)
}

#[pyfunction]
fn read_labels(path: PathBuf) -> PyResult<Vec<PyLabelRecord>> {
    let records = screencode::labels::read_labels(&path).map_err(runtime_err)?;
    Ok(records.into_iter().map(|inner| PyLabelRecord { inner }).collect())
}

/// Applies the reflection penalty to a coding and returns the calibrated record.
#[pyfunction]
#[pyo3(signature = (unit_id, scenes, actions, confidences=None, lam=0.3, review_threshold=0.5))]
fn reflect(
    unit_id: String,
    scenes: Vec<String>,
    actions: Vec<String>,
    confidences: Option<BTreeMap<String, f64>>,
    lam: f64,
    review_threshold: f64,
) -> PyResult<PyLabelRecord> {
    let mut label = vlm::StructuredLabel { scenes: self::scenes(scenes)?, actions: self::actions(actions)?, ..Default::default() };
    for (name, c) in confidences.unwrap_or_default() {
        label.confidences.insert(name.parse::<Action>().map_err(value_err)?, c);
    }
    let cfg = ReactConfig { lambda: lam, review_threshold, ..ReactConfig::default() };
    let inner = screencode::react::reflect(&label, &ReactState::new(unit_id), &cfg);
    Ok(PyLabelRecord { inner })
}

/// Writes a synthetic corpus under `out`; returns its gold records.
#[pyfunction]
#[pyo3(signature = (out, seed=0, n_videos=10, video_length_s=60.0, inject_incompatible=0.0))]
fn synthesize(out: PathBuf, seed: u64, n_videos: usize, video_length_s: f64, inject_incompatible: f64) -> PyResult<Vec<PyLabelRecord>> {
    let spec = CorpusSpec { seed, n_videos, video_length_s, inject_incompatible, ..CorpusSpec::default() };
    let corpus = synth::generate_corpus(&spec).map_err(value_err)?;
    corpus.write(&out).map_err(runtime_err)?;
    Ok(corpus.gold.into_iter().map(|inner| PyLabelRecord { inner }).collect())
}

/// SHA-256 digest over every file below `dir`.
#[pyfunction]
fn directory_digest(dir: PathBuf) -> PyResult<String> {
    synth::directory_digest(&dir).map_err(runtime_err)
}

/// Codes a corpus with the scripted provider and writes the run directory.
/// Returns the run manifest as a dict.
#[pyfunction]
#[pyo3(signature = (input, out, mock, mode="workflow", jobs=4))]
fn run_mock<'py>(py: Python<'py>, input: PathBuf, out: PathBuf, mock: PathBuf, mode: &str, jobs: usize) -> PyResult<Bound<'py, PyAny>> {
    let mode: Mode = mode.parse().map_err(value_err)?;
    let cfg = RunConfig { mode, mock: Some(mock.clone()), jobs, ..RunConfig::default() };
    cfg.validate().map_err(value_err)?;
    let vlm = MockVlm::load(&mock).map_err(runtime_err)?;
    let result = py.detach(|| {
        let output = pipeline::run_corpus(&cfg, &vlm, &input).map_err(|e| e.to_string())?;
        output.write(&out).map_err(|e| e.to_string())?;
        Ok::<_, String>(output.manifest)
    });
    to_py(py, &result.map_err(runtime_err)?)
}

/// Runs the command-line interface with `argv` (without the program name); returns the exit code.
#[pyfunction]
fn main(py: Python<'_>, argv: Vec<String>) -> i32 {
    py.detach(|| screencode::cli::run_command(std::iter::once("screencode".to_string()).chain(argv)))
}

#[pymodule]
fn screencode_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyLabelRecord>()?;
    m.add_function(wrap_pyfunction!(scene_names, m)?)?;
    m.add_function(wrap_pyfunction!(action_names, m)?)?;
    m.add_function(wrap_pyfunction!(compatible_scenes, m)?)?;
    m.add_function(wrap_pyfunction!(check_compatibility, m)?)?;
    m.add_function(wrap_pyfunction!(parse_label, m)?)?;
    m.add_function(wrap_pyfunction!(cohen_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_files, m)?)?;
    m.add_function(wrap_pyfunction!(read_labels, m)?)?;
    m.add_function(wrap_pyfunction!(reflect, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(directory_digest, m)?)?;
    m.add_function(wrap_pyfunction!(run_mock, m)?)?;
    m.add_function(wrap_pyfunction!(main, m)?)?;
    Ok(())
}
