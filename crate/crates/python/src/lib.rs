//! Python bindings for `solspace-core`.

use std::collections::HashMap;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use solspace_core as core;
use solspace_core::bayes::{BetaBinomialModel, PStableVariant, SolutionEstimate};
use solspace_core::detection::{label_propagation, louvain};
use solspace_core::{
    DetectorSpec, EdgeListOptions, ExplorationConfig, Membership, Seed, SolutionSpaceReport,
    TaxonomyThresholds, ValidityOptions,
};

create_exception!(
    solspace,
    SolspaceError,
    PyException,
    "Error raised by the solspace core."
);

fn err(e: core::Error) -> PyErr {
    SolspaceError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn variant(name: &str) -> PyResult<PStableVariant> {
    match name {
        "corrected" => Ok(PStableVariant::Corrected),
        "verbatim" | "paper_verbatim" => Ok(PStableVariant::Verbatim),
        other => Err(SolspaceError::new_err(format!(
            "unknown p_stable variant {other:?}"
        ))),
    }
}

/// An undirected weighted graph with string node labels.
#[pyclass(name = "Graph", module = "solspace", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyGraph {
    inner: core::Graph,
}

impl PyGraph {
    /// Accepts a list of community ids by node index or a dict keyed by label.
    fn membership(&self, obj: &Bound<'_, PyAny>) -> PyResult<Membership> {
        if let Ok(ids) = obj.extract::<Vec<usize>>() {
            if ids.len() != self.inner.node_count() {
                return Err(err(core::Error::LengthMismatch {
                    expected: self.inner.node_count(),
                    found: ids.len(),
                }));
            }
            return Ok(Membership(ids));
        }
        let by_label: HashMap<String, usize> = obj.extract()?;
        self.inner
            .labels()
            .iter()
            .map(|l| {
                by_label
                    .get(l)
                    .copied()
                    .ok_or_else(|| err(core::Error::MissingLabel(l.clone())))
            })
            .collect::<PyResult<Vec<_>>>()
            .map(Membership)
    }
}

#[pymethods]
impl PyGraph {
    /// Builds a graph from `(source, target)` or `(source, target, weight)` tuples.
    #[new]
    fn new(edges: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let mut parsed: Vec<(String, String, f64)> = Vec::with_capacity(edges.len());
        for e in edges {
            let triple = match e.extract::<(String, String, f64)>() {
                Ok(t) => t,
                Err(_) => {
                    let (s, t): (String, String) = e.extract()?;
                    (s, t, 1.0)
                }
            };
            parsed.push(triple);
        }
        let mut labels: Vec<String> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (s, t, _) in &parsed {
            for l in [s, t] {
                if seen.insert(l.clone()) {
                    labels.push(l.clone());
                }
            }
        }
        let inner = core::Graph::new(&labels, &parsed).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (text, delimiter = ',', header = false))]
    fn from_edge_list(text: &str, delimiter: char, header: bool) -> PyResult<Self> {
        let inner =
            core::load_edge_list(text, &EdgeListOptions { delimiter, header }).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, delimiter = ',', header = false))]
    fn read(path: std::path::PathBuf, delimiter: char, header: bool) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| err(e.into()))?;
        Self::from_edge_list(&text, delimiter, header)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn total_weight(&self) -> f64 {
        self.inner.total_weight()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn shuffle(&self, seed: u64) -> Self {
        Self {
            inner: self.inner.shuffle(Seed(seed)),
        }
    }

    #[pyo3(signature = (delimiter = ','))]
    fn to_edge_list(&self, delimiter: char) -> String {
        self.inner.to_edge_list(delimiter)
    }

    #[pyo3(signature = (membership, resolution = 1.0))]
    fn modularity(&self, membership: &Bound<'_, PyAny>, resolution: f64) -> PyResult<f64> {
        core::modularity(&self.inner, &self.membership(membership)?, resolution).map_err(err)
    }

    /// Community id per node index.
    #[pyo3(signature = (seed = 0, resolution = 1.0))]
    fn louvain(&self, seed: u64, resolution: f64) -> Vec<usize> {
        louvain(&self.inner, resolution, Seed(seed)).0
    }

    #[pyo3(signature = (seed = 0))]
    fn label_propagation(&self, seed: u64) -> Vec<usize> {
        label_propagation(&self.inner, Seed(seed)).0
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(nodes={}, edges={}, weight={})",
            self.inner.node_count(),
            self.inner.edge_count(),
            self.inner.total_weight()
        )
    }
}

/// Runs the exploration loop and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (
    graph, *, detector = "louvain", seed = 0, tau = 0.95, t_max = 1000, t_min = 10,
    level = 0.95, p_stable_variant = "corrected", resolution = 1.0, command = None,
    timeout_secs = 300, parallelism = 1, per_node_validity = false
))]
#[allow(clippy::too_many_arguments)]
fn explore<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    detector: &str,
    seed: u64,
    tau: f64,
    t_max: u64,
    t_min: u64,
    level: f64,
    p_stable_variant: &str,
    resolution: f64,
    command: Option<Vec<String>>,
    timeout_secs: u64,
    parallelism: usize,
    per_node_validity: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let mut spec = match detector {
        "louvain" => DetectorSpec::louvain(resolution),
        "lp" | "label_propagation" => DetectorSpec::label_propagation(),
        "external" => DetectorSpec::external(
            command.ok_or_else(|| SolspaceError::new_err("detector 'external' needs command"))?,
        ),
        other => {
            return Err(SolspaceError::new_err(format!(
                "unknown detector {other:?}"
            )))
        }
    };
    spec.timeout_secs = timeout_secs;
    let config = ExplorationConfig {
        t_max,
        tau,
        t_min,
        master_seed: Seed(seed),
        detector: spec,
        p_stable_variant: variant(p_stable_variant)?,
        thresholds: TaxonomyThresholds {
            level,
            ..Default::default()
        },
        validity: ValidityOptions {
            per_node: per_node_validity,
        },
        parallelism,
    };
    let g = &graph.inner;
    let text = py
        .detach(|| {
            let x = core::explore(g, &config)?;
            SolutionSpaceReport::new(g, &x)?.to_json()
        })
        .map_err(err)?;
    json_to_py(py, &text)
}

#[pyfunction]
#[pyo3(signature = (t, ns, variant = "corrected"))]
fn p_stable(t: u64, ns: u64, variant: &str) -> PyResult<f64> {
    if ns > t {
        return Err(SolspaceError::new_err(format!("ns ({ns}) exceeds t ({t})")));
    }
    let m = BetaBinomialModel {
        t,
        ns,
        ..Default::default()
    };
    Ok(m.p_stable(self::variant(variant)?))
}

#[pyfunction]
fn beta_quantile(a: f64, b: f64, q: f64) -> PyResult<f64> {
    core::beta_quantile(a, b, q).map_err(err)
}

/// `(count, p_point, p_lower, p_upper)` per count.
#[pyfunction]
#[pyo3(signature = (counts, t, level = 0.95))]
fn solution_estimates(counts: Vec<u64>, t: u64, level: f64) -> PyResult<Vec<(u64, f64, f64, f64)>> {
    Ok(core::solution_estimates(&counts, t, level)
        .map_err(err)?
        .into_iter()
        .map(|e| (e.count, e.p_point, e.p_lower, e.p_upper))
        .collect())
}

/// Category name for the estimates of the valid solutions.
#[pyfunction]
#[pyo3(signature = (estimates, dominant_lower = 0.5, sparse_upper = 0.5))]
fn classify(
    estimates: Vec<(u64, f64, f64, f64)>,
    dominant_lower: f64,
    sparse_upper: f64,
) -> PyResult<String> {
    let est: Vec<SolutionEstimate> = estimates
        .into_iter()
        .map(|(count, p_point, p_lower, p_upper)| SolutionEstimate {
            count,
            p_point,
            p_lower,
            p_upper,
        })
        .collect();
    let thresholds = TaxonomyThresholds {
        dominant_lower,
        sparse_upper,
        ..Default::default()
    };
    Ok(core::classify(est.len(), &est, &thresholds)
        .map_err(err)?
        .as_str()
        .to_string())
}

/// Relabels communities by first appearance.
#[pyfunction]
fn canonicalize(membership: Vec<usize>) -> Vec<u32> {
    core::canonicalize(&Membership(membership))
        .assignment()
        .to_vec()
}

#[pyfunction]
#[pyo3(signature = (graph, membership, per_node = false))]
fn validate<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    membership: &Bound<'py, PyAny>,
    per_node: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let p = core::canonicalize(&graph.membership(membership)?);
    let report = core::validate(&graph.inner, &p, ValidityOptions { per_node }).map_err(err)?;
    let text = serde_json::to_string(&report).map_err(|e| err(e.into()))?;
    let out = json_to_py(py, &text)?;
    out.cast::<PyDict>()?.set_item("k", p.community_count())?;
    Ok(out)
}

#[pymodule]
fn solspace(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SolspaceError", m.py().get_type::<SolspaceError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(explore, m)?)?;
    m.add_function(wrap_pyfunction!(p_stable, m)?)?;
    m.add_function(wrap_pyfunction!(beta_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(solution_estimates, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(canonicalize, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
