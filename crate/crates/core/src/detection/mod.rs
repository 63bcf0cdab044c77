//! Community detectors `A(G, rho) -> P`.
//!
//! Every detector consumes the graph's presentation order, so a shuffled
//! graph can (and is expected to) yield a different partition.

mod external;
mod label_propagation;
mod louvain;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Seed};

pub use external::{external_detect, DEFAULT_TIMEOUT, SEED_ENV};
pub use label_propagation::{
    label_propagation, label_propagation_with_stats, LpaStats, MAX_PASSES,
};
pub use louvain::{louvain, louvain_with_trace};

/// Community id per node, indexed by stable node index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Membership(pub Vec<usize>);

impl Membership {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of distinct community ids.
    pub fn community_count(&self) -> usize {
        let mut ids = self.0.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Louvain,
    LabelPropagation,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub kind: DetectorKind,
    /// Modularity resolution, Louvain only.
    pub resolution: f64,
    /// Argument vector of the child process, external only.
    #[serde(default)]
    pub external_command: Vec<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    pub seed: Seed,
}

fn default_timeout_secs() -> u64 {
    DEFAULT_TIMEOUT.as_secs()
}

impl DetectorSpec {
    pub fn louvain(resolution: f64) -> Self {
        Self {
            kind: DetectorKind::Louvain,
            resolution,
            external_command: Vec::new(),
            timeout_secs: default_timeout_secs(),
            seed: Seed(0),
        }
    }

    pub fn label_propagation() -> Self {
        Self {
            kind: DetectorKind::LabelPropagation,
            ..Self::louvain(1.0)
        }
    }

    pub fn external(command: Vec<String>) -> Self {
        Self {
            kind: DetectorKind::External,
            external_command: command,
            ..Self::louvain(1.0)
        }
    }

    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "resolution must be positive, got {}",
                self.resolution
            )));
        }
        if self.kind == DetectorKind::External && self.external_command.is_empty() {
            return Err(Error::InvalidParameter(
                "external detector needs a command".into(),
            ));
        }
        Ok(())
    }
}

/// Runs the detector described by `spec` on `g` as presented.
pub fn detect(g: &Graph, spec: &DetectorSpec) -> Result<Membership> {
    spec.validate()?;
    match spec.kind {
        DetectorKind::Louvain => Ok(louvain(g, spec.resolution, spec.seed)),
        DetectorKind::LabelPropagation => Ok(label_propagation(g, spec.seed)),
        DetectorKind::External => external_detect(
            g,
            &spec.external_command,
            spec.seed,
            Duration::from_secs(spec.timeout_secs),
        ),
    }
}

/// Newman modularity at resolution `gamma`:
/// `Q = sum_c [ w_in(c)/W - gamma * (d_c / 2W)^2 ]`.
pub fn modularity(g: &Graph, m: &Membership, resolution: f64) -> Result<f64> {
    if m.len() != g.node_count() {
        return Err(Error::LengthMismatch {
            expected: g.node_count(),
            found: m.len(),
        });
    }
    let w = g.total_weight();
    if w == 0.0 {
        return Ok(0.0);
    }
    let k = m.0.iter().copied().max().map_or(0, |x| x + 1);
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for e in g.edges() {
        if m.0[e.source] == m.0[e.target] {
            internal[m.0[e.source]] += e.weight;
        }
    }
    for v in 0..g.node_count() {
        degree[m.0[v]] += g.weighted_degree(v);
    }
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(win, d)| win / w - resolution * (d / (2.0 * w)).powi(2))
        .sum())
}
