//! Canonical partition identity and validity checks.

use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::detection::Membership;
use crate::error::{Error, Result};
use crate::graph::Graph;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub(crate) fn fnv1a_bytes(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn fnv1a(values: &[u32]) -> u64 {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    fnv1a_bytes(&bytes)
}

/// A partition with community ids renumbered `0..k` in order of first
/// appearance over node index order. Two partitions that differ only by a
/// relabeling of communities have the same canonical form.
#[derive(Debug, Clone, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<u32>", try_from = "Vec<u32>")]
pub struct CanonicalPartition {
    assignment: Vec<u32>,
    k: usize,
    digest: u64,
}

impl CanonicalPartition {
    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn community_count(&self) -> usize {
        self.k
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn digest(&self) -> u64 {
        self.digest
    }

    /// Node indices of each community, by community id.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c as usize].push(v);
        }
        out
    }

    pub fn to_membership(&self) -> Membership {
        Membership(self.assignment.iter().map(|&c| c as usize).collect())
    }
}

impl PartialEq for CanonicalPartition {
    fn eq(&self, other: &Self) -> bool {
        self.digest == other.digest && self.assignment == other.assignment
    }
}

impl Hash for CanonicalPartition {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.digest.hash(state);
    }
}

impl From<CanonicalPartition> for Vec<u32> {
    fn from(p: CanonicalPartition) -> Self {
        p.assignment
    }
}

impl TryFrom<Vec<u32>> for CanonicalPartition {
    type Error = String;

    fn try_from(v: Vec<u32>) -> std::result::Result<Self, String> {
        if v.is_empty() {
            return Err("empty partition".into());
        }
        let p = canonicalize_ids(&v);
        if p.assignment != v {
            return Err("assignment is not in canonical form".into());
        }
        Ok(p)
    }
}

fn canonicalize_ids<T: Copy + Eq + Hash>(ids: &[T]) -> CanonicalPartition {
    let mut map: HashMap<T, u32> = HashMap::new();
    let assignment: Vec<u32> = ids
        .iter()
        .map(|&id| {
            let next = map.len() as u32;
            *map.entry(id).or_insert(next)
        })
        .collect();
    CanonicalPartition {
        digest: fnv1a(&assignment),
        k: map.len(),
        assignment,
    }
}

pub fn canonicalize(m: &Membership) -> CanonicalPartition {
    canonicalize_ids(&m.0)
}

/// Community sizes, largest first.
pub fn community_sizes(p: &CanonicalPartition) -> Vec<usize> {
    let mut sizes = vec![0; p.k];
    for &c in &p.assignment {
        sizes[c as usize] += 1;
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefinitionViolation {
    pub community: usize,
    pub other: usize,
    pub internal_weight: f64,
    pub boundary_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub is_trivial: bool,
    pub disconnected_communities: Vec<usize>,
    pub definition_violations: Vec<DefinitionViolation>,
    pub valid: bool,
}

impl ValidityReport {
    /// A report for a partition that was never checked against a graph,
    /// e.g. synthetic fixtures.
    pub fn assumed(valid: bool) -> Self {
        Self {
            is_trivial: !valid,
            disconnected_communities: Vec::new(),
            definition_violations: Vec::new(),
            valid,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityOptions {
    /// Also flag `(i, j)` when any single node of `C_i` has more weight
    /// towards `C_j` than towards the rest of `C_i`.
    pub per_node: bool,
}

/// Checks triviality (`k = 1` or `k = n_v`), internal connectivity of every
/// community, and the community condition: `(i, j)` is a violation when the
/// weight between `C_i` and `C_j` exceeds twice the internal weight of
/// `C_i` (i.e. its internal degree sum).
pub fn validate(
    g: &Graph,
    p: &CanonicalPartition,
    options: ValidityOptions,
) -> Result<ValidityReport> {
    let n = g.node_count();
    if p.node_count() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: p.node_count(),
        });
    }
    let is_trivial = p.k == 1 || p.k == n;

    let mut disconnected_communities = Vec::new();
    for (c, nodes) in p.communities().iter().enumerate() {
        if !g.is_connected_subset(nodes)? {
            disconnected_communities.push(c);
        }
    }

    let community = |v: usize| p.assignment[v] as usize;
    let mut internal = vec![0.0; p.k];
    let mut boundary: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in g.edges() {
        let (a, b) = (community(e.source), community(e.target));
        if a == b {
            internal[a] += e.weight;
        } else {
            *boundary.entry((a, b)).or_default() += e.weight;
            *boundary.entry((b, a)).or_default() += e.weight;
        }
    }
    let mut flagged: BTreeMap<(usize, usize), ()> = boundary
        .iter()
        .filter(|(&(i, _), &w)| w > 2.0 * internal[i])
        .map(|(&key, _)| (key, ()))
        .collect();

    if options.per_node {
        let mut towards: HashMap<usize, f64> = HashMap::new();
        for v in 0..n {
            towards.clear();
            for &(u, w) in g.neighbors(v) {
                *towards.entry(community(u)).or_default() += w;
            }
            let own = towards.get(&community(v)).copied().unwrap_or(0.0);
            for (&c, &w) in &towards {
                if c != community(v) && w > own {
                    flagged.insert((community(v), c), ());
                }
            }
        }
    }

    let definition_violations: Vec<DefinitionViolation> = flagged
        .into_keys()
        .map(|(i, j)| DefinitionViolation {
            community: i,
            other: j,
            internal_weight: internal[i],
            boundary_weight: boundary[&(i, j)],
        })
        .collect();

    let valid =
        !is_trivial && disconnected_communities.is_empty() && definition_violations.is_empty();
    Ok(ValidityReport {
        is_trivial,
        disconnected_communities,
        definition_violations,
        valid,
    })
}

/// `node_label,community_id` rows in label order.
pub fn to_partition_csv(g: &Graph, p: &CanonicalPartition) -> String {
    let mut rows: Vec<(&str, u32)> = (0..g.node_count())
        .map(|v| (g.label(v), p.assignment[v]))
        .collect();
    rows.sort_unstable();
    let mut out = String::from("node_label,community_id\n");
    for (label, c) in rows {
        out.push_str(&format!("{label},{c}\n"));
    }
    out
}

/// Reads a membership from a CSV whose first column holds node labels and
/// column `column` (1-based after the label) holds community ids. The first
/// row is a header.
pub fn read_partition_csv(g: &Graph, text: &str, column: usize) -> Result<Membership> {
    if column == 0 {
        return Err(Error::InvalidParameter("column index starts at 1".into()));
    }
    let mut assignment: Vec<Option<usize>> = vec![None; g.node_count()];
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    lines.next().ok_or(Error::EmptyInput)?;
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse_err = |message: String| Error::Parse {
            line: i + 1,
            message,
        };
        let raw = fields
            .get(column)
            .ok_or_else(|| parse_err(format!("no column {column}")))?;
        let id = raw
            .parse()
            .map_err(|_| parse_err(format!("invalid community id {raw:?}")))?;
        let v = g
            .node_index(fields[0])
            .ok_or_else(|| Error::UnknownLabel(fields[0].to_string()))?;
        if assignment[v].replace(id).is_some() {
            return Err(parse_err(format!("duplicate label {:?}", fields[0])));
        }
    }
    assignment
        .into_iter()
        .enumerate()
        .map(|(v, a)| a.ok_or_else(|| Error::MissingLabel(g.label(v).to_string())))
        .collect::<Result<Vec<_>>>()
        .map(Membership)
}
