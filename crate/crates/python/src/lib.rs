//! Python bindings: `import xca`.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use xca_core::loader::{parse_document, KbDocument, LoadError};
use xca_core::{self as core, RenderFormat};

fn load_err(e: LoadError) -> PyErr {
    let issues: Vec<String> = e.issues().iter().map(ToString::to_string).collect();
    PyValueError::new_err(format!("{e}: {}", issues.join("; ")))
}

fn strings<T: ToString>(items: impl IntoIterator<Item = T>) -> Vec<String> {
    items.into_iter().map(|i| i.to_string()).collect()
}

#[pyclass(frozen, module = "xca")]
pub struct KnowledgeBase {
    inner: core::KnowledgeBase,
}

#[pymethods]
impl KnowledgeBase {
    /// The knowledge base shipped with the library.
    #[staticmethod]
    fn default() -> Self {
        Self { inner: core::default_kb().clone() }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        core::load_kb(text.as_bytes()).map(|inner| Self { inner }).map_err(load_err)
    }

    fn to_json(&self) -> String {
        core::serialize_kb(&self.inner)
    }

    #[getter]
    fn version(&self) -> String {
        self.inner.version().to_owned()
    }

    #[getter]
    fn fingerprint(&self) -> String {
        self.inner.fingerprint()
    }

    fn goal_ids(&self) -> Vec<String> {
        strings(self.inner.goals().iter().map(|g| g.id))
    }

    fn method_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.inner.catalog().iter().map(|e| e.id.clone()).collect();
        ids.sort();
        ids
    }

    fn __repr__(&self) -> String {
        format!(
            "KnowledgeBase(version={:?}, goals={}, methods={})",
            self.inner.version(),
            self.inner.goals().len(),
            self.inner.catalog().len()
        )
    }
}

#[pyclass(frozen, module = "xca")]
pub struct DeviceProfile {
    inner: core::DeviceProfile,
}

#[pymethods]
impl DeviceProfile {
    /// Parse a profile document (`{"device": {...}}`).
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        core::load_profile(text.as_bytes()).map(|inner| Self { inner }).map_err(load_err)
    }

    fn to_json(&self) -> String {
        core::serialize_profile(&self.inner)
    }

    /// A copy with fields replaced, e.g. `{"loop_type": "closed"}`.
    fn with_overrides(&self, overrides: BTreeMap<String, String>) -> PyResult<Self> {
        let pairs: Vec<(String, String)> = overrides.into_iter().collect();
        let inner = core::apply_overrides(&self.inner, &pairs).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let issues = inner.validate();
        if !issues.is_empty() {
            return Err(PyValueError::new_err(strings(&issues).join("; ")));
        }
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn loop_type(&self) -> String {
        self.inner.loop_type.to_string()
    }

    #[getter]
    fn model_types(&self) -> Vec<String> {
        strings(&self.inner.model_types)
    }

    #[getter]
    fn input_modalities(&self) -> Vec<String> {
        strings(&self.inner.input_modalities)
    }

    #[getter]
    fn audience(&self) -> String {
        self.inner.audience.to_string()
    }

    fn __repr__(&self) -> String {
        format!("DeviceProfile(name={:?}, loop_type={})", self.inner.name, self.inner.loop_type)
    }
}

#[pyclass(frozen, module = "xca")]
pub struct AnalysisReport {
    inner: core::AnalysisReport,
}

#[pymethods]
impl AnalysisReport {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        core::AnalysisReport::from_structured(text.as_bytes())
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> String {
        String::from_utf8(core::render(&self.inner, RenderFormat::Structured)).expect("utf-8")
    }

    fn to_markdown(&self) -> String {
        String::from_utf8(core::render(&self.inner, RenderFormat::Document)).expect("utf-8")
    }

    /// Regulations that apply, e.g. `["MDR", "AIA"]`.
    #[getter]
    fn applicable(&self) -> Vec<String> {
        strings(self.inner.findings.iter().filter(|f| f.applies).map(|f| f.regulation))
    }

    #[getter]
    fn required_goals(&self) -> Vec<String> {
        strings(self.inner.requirements.iter().map(|r| r.goal))
    }

    #[getter]
    fn addressable_goals(&self) -> Vec<String> {
        strings(self.inner.addressable_goals())
    }

    #[getter]
    fn manual_goals(&self) -> Vec<String> {
        strings(self.inner.manual_goals.iter().map(|m| m.goal))
    }

    #[getter]
    fn eligible(&self) -> Vec<String> {
        self.inner.eligible.iter().map(|e| e.entry_id.clone()).collect()
    }

    #[getter]
    fn covers(&self) -> Vec<Vec<String>> {
        self.inner.recommendation.covers.clone()
    }

    #[getter]
    fn min_cover_size(&self) -> Option<usize> {
        self.inner.recommendation.min_size()
    }

    fn __repr__(&self) -> String {
        format!(
            "AnalysisReport(device={:?}, applicable={:?}, covers={})",
            self.inner.profile_echo.name,
            self.applicable(),
            self.inner.recommendation.covers.len()
        )
    }
}

fn kb_or_default(kb: Option<&KnowledgeBase>) -> core::KnowledgeBase {
    kb.map_or_else(|| core::default_kb().clone(), |k| k.inner.clone())
}

#[pyfunction]
#[pyo3(signature = (profile, kb=None, cap=core::DEFAULT_COVER_CAP))]
fn analyze(profile: &DeviceProfile, kb: Option<&KnowledgeBase>, cap: usize) -> PyResult<AnalysisReport> {
    if cap == 0 {
        return Err(PyValueError::new_err("cap must be positive"));
    }
    Ok(AnalysisReport { inner: core::analyze(&profile.inner, &kb_or_default(kb), cap) })
}

/// Structured diff between the reports of two profiles, as JSON text.
#[pyfunction]
#[pyo3(signature = (base, modified, kb=None))]
fn diff(base: &DeviceProfile, modified: &DeviceProfile, kb: Option<&KnowledgeBase>) -> String {
    let kb = kb_or_default(kb);
    let cap = core::DEFAULT_COVER_CAP;
    let d = core::diff_reports(&core::analyze(&base.inner, &kb, cap), &core::analyze(&modified.inner, &kb, cap));
    serde_json::to_string_pretty(&d).expect("diff serializes")
}

/// Issues of a KB document as `(severity, code, location, message)` tuples.
#[pyfunction]
fn validate_kb(text: &str) -> Vec<(String, String, String, String)> {
    let issues = match parse_document::<KbDocument>(text.as_bytes(), "") {
        Ok(doc) => core::validate_kb(&doc),
        Err(e) => e.issues(),
    };
    issues
        .into_iter()
        .map(|i| {
            let severity = if i.is_error() { "error" } else { "warning" };
            (severity.to_owned(), i.code.as_str().to_owned(), i.location, i.message)
        })
        .collect()
}

/// Minimum covers of a goal map `{entry_id: [goal ids]}` over `goals`.
#[pyfunction]
#[pyo3(signature = (rows, goals, cap=core::DEFAULT_COVER_CAP))]
fn minimal_covers(rows: BTreeMap<String, Vec<String>>, goals: Vec<String>, cap: usize) -> PyResult<Vec<Vec<String>>> {
    if cap == 0 {
        return Err(PyValueError::new_err("cap must be positive"));
    }
    let parse = |g: &String| g.parse::<core::GoalId>().map_err(|e| PyValueError::new_err(e.to_string()));
    let columns = goals.iter().map(parse).collect::<PyResult<Vec<_>>>()?;
    let mut cells = Vec::new();
    for row in rows.values() {
        let hit = row.iter().map(parse).collect::<PyResult<Vec<_>>>()?;
        cells.push(columns.iter().map(|c| hit.contains(c)).collect());
    }
    let matrix = core::CoverageMatrix {
        row_scopes: vec![core::Scope::Any; rows.len()],
        rows: rows.into_keys().collect(),
        columns,
        cells,
    };
    Ok(core::minimal_covers(&matrix, cap).covers)
}

#[pymodule]
fn xca(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<KnowledgeBase>()?;
    m.add_class::<DeviceProfile>()?;
    m.add_class::<AnalysisReport>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(diff, m)?)?;
    m.add_function(wrap_pyfunction!(validate_kb, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_covers, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
