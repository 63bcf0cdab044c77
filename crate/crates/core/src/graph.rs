//! Undirected weighted graphs with stable node identities and a separate,
//! shuffleable presentation order.
//!
//! Node indices are fixed at construction time and never change; `shuffle`
//! only permutes the order in which nodes and edges are presented to a
//! detector. Memberships produced on any shuffled copy are therefore
//! directly comparable with each other.

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed for every stochastic step of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Derives the seed of trial `index` by counter-based splitting
    /// (SplitMix64 finalizer over `master + index * golden_gamma`).
    pub fn split(self, index: u64) -> Seed {
        let mut z = self
            .0
            .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }

    pub(crate) fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Options for [`load_edge_list`].
#[derive(Debug, Clone)]
pub struct EdgeListOptions {
    pub delimiter: char,
    /// Treat the first non-comment row as a header.
    pub header: bool,
}

impl Default for EdgeListOptions {
    fn default() -> Self {
        Self {
            delimiter: ',',
            header: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    order: Vec<usize>,
    edges: Vec<Edge>,
    // (neighbor, weight) lists, each in edge presentation order
    adjacency: Vec<Vec<(usize, f64)>>,
    degrees: Vec<f64>,
    total_weight: f64,
}

impl Graph {
    /// Builds a graph from labels and labelled edges. Duplicate undirected
    /// edges are merged by summing weights.
    pub fn new<S: AsRef<str>>(labels: &[S], edges: &[(S, S, f64)]) -> Result<Self> {
        let mut builder = GraphBuilder::default();
        for l in labels {
            builder.node(l.as_ref());
        }
        for (i, (s, t, w)) in edges.iter().enumerate() {
            builder.edge(s.as_ref(), t.as_ref(), *w, i + 1)?;
        }
        builder.finish()
    }

    /// Builds a graph over nodes `0..n` labelled by their decimal index.
    pub fn from_index_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let mut builder = GraphBuilder::default();
        for l in &labels {
            builder.node(l);
        }
        for (i, &(s, t, w)) in edges.iter().enumerate() {
            if s >= n || t >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({s}, {t}) out of range for {n} nodes"
                )));
            }
            builder.edge(&labels[s], &labels[t], w, i + 1)?;
        }
        builder.finish()
    }

    fn assemble(labels: Vec<String>, index: HashMap<String, usize>, edges: Vec<Edge>) -> Self {
        let n = labels.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut degrees = vec![0.0; n];
        let mut total_weight = 0.0;
        for e in &edges {
            adjacency[e.source].push((e.target, e.weight));
            adjacency[e.target].push((e.source, e.weight));
            degrees[e.source] += e.weight;
            degrees[e.target] += e.weight;
            total_weight += e.weight;
        }
        Self {
            order: (0..n).collect(),
            labels,
            index,
            edges,
            adjacency,
            degrees,
            total_weight,
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sum of all edge weights (each undirected edge counted once).
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    /// Labels indexed by stable node index.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Node indices in presentation order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Edges in presentation order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    pub fn weighted_degree(&self, node: usize) -> f64 {
        self.degrees[node]
    }

    /// Returns a copy whose node and edge presentation orders are permuted
    /// by a seeded Fisher-Yates shuffle. Node indices, labels and weights
    /// are untouched.
    pub fn shuffle(&self, seed: Seed) -> Graph {
        let mut rng = seed.rng();
        let mut order = self.order.clone();
        order.shuffle(&mut rng);
        let mut edges = self.edges.clone();
        edges.shuffle(&mut rng);
        let mut g = Graph::assemble(self.labels.clone(), self.index.clone(), edges);
        g.order = order;
        g
    }

    /// True iff the subgraph induced by `nodes` is connected.
    pub fn is_connected_subset(&self, nodes: &[usize]) -> Result<bool> {
        if nodes.is_empty() {
            return Err(Error::EmptySubset);
        }
        let n = self.node_count();
        let mut member = vec![false; n];
        for &v in nodes {
            if v >= n {
                return Err(Error::NodeOutOfRange(v, n));
            }
            member[v] = true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([nodes[0]]);
        seen[nodes[0]] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &self.adjacency[v] {
                if member[u] && !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    queue.push_back(u);
                }
            }
        }
        let distinct = member.iter().filter(|&&m| m).count();
        Ok(reached == distinct)
    }

    /// Serializes the edge list (presentation order) with a
    /// `source,target,weight` header. Reloading it yields the same graph.
    pub fn to_edge_list(&self, delimiter: char) -> String {
        let mut out = format!("source{d}target{d}weight\n", d = delimiter);
        for e in &self.edges {
            out.push_str(&format!(
                "{}{d}{}{d}{}\n",
                self.labels[e.source],
                self.labels[e.target],
                e.weight,
                d = delimiter
            ));
        }
        out
    }
}

#[derive(Default)]
struct GraphBuilder {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    edge_slot: HashMap<(usize, usize), usize>,
}

impl GraphBuilder {
    fn node(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), i);
        i
    }

    fn edge(&mut self, source: &str, target: &str, weight: f64, line: usize) -> Result<()> {
        if source == target {
            return Err(Error::Parse {
                line,
                message: "self-loop".into(),
            });
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::Parse {
                line,
                message: format!("weight must be positive, got {weight}"),
            });
        }
        let s = self.node(source);
        let t = self.node(target);
        let key = (s.min(t), s.max(t));
        match self.edge_slot.get(&key) {
            Some(&slot) => self.edges[slot].weight += weight,
            None => {
                self.edge_slot.insert(key, self.edges.len());
                self.edges.push(Edge {
                    source: s,
                    target: t,
                    weight,
                });
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<Graph> {
        if self.labels.is_empty() {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        Ok(Graph::assemble(self.labels, self.index, self.edges))
    }
}

/// Parses a delimited edge list: `source,target[,weight]` per row, `#`
/// comments, optional header. Nodes are numbered in first-appearance order.
pub fn load_edge_list(text: &str, options: &EdgeListOptions) -> Result<Graph> {
    let mut builder = GraphBuilder::default();
    let mut header_pending = options.header;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.trim();
        if row.is_empty() || row.starts_with('#') {
            continue;
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let fields: Vec<&str> = row.split(options.delimiter).map(str::trim).collect();
        let weight = match fields.len() {
            2 => 1.0,
            3 => fields[2].parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("non-numeric weight {:?}", fields[2]),
            })?,
            n => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 2 or 3 fields, found {n}"),
                })
            }
        };
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty node label".into(),
            });
        }
        builder.edge(fields[0], fields[1], weight, line)?;
    }
    if builder.labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    builder.finish()
}
