//! Two-phase Louvain modularity optimization.
//!
//! Local moves visit nodes in the graph's presentation order, rotated by
//! the seed; a node joins the neighboring community with the largest
//! strictly positive improvement over staying put, ties going to the lowest
//! community id. Communities are then collapsed into super-nodes and the
//! process repeats until a level makes no move.

use super::{modularity, Membership};
use crate::graph::{Graph, Seed};

struct Level {
    order: Vec<usize>,
    edges: Vec<(usize, usize, f64)>,
    adjacency: Vec<Vec<(usize, f64)>>,
    degree: Vec<f64>,
}

impl Level {
    fn new(n: usize, order: Vec<usize>, edges: Vec<(usize, usize, f64)>, degree: Vec<f64>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(s, t, w) in &edges {
            adjacency[s].push((t, w));
            adjacency[t].push((s, w));
        }
        Self {
            order,
            edges,
            adjacency,
            degree,
        }
    }

    fn len(&self) -> usize {
        self.degree.len()
    }

    /// Sweeps until no node moves. Returns whether anything moved at all.
    fn local_moves(&self, community: &mut [usize], resolution: f64, two_w: f64) -> bool {
        let n = self.len();
        let mut total = self.degree.clone();
        let mut link = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut moved_any = false;
        loop {
            let mut moved = false;
            for &v in &self.order {
                let current = community[v];
                let kv = self.degree[v];
                for &(u, w) in &self.adjacency[v] {
                    let c = community[u];
                    if link[c] == 0.0 {
                        touched.push(c);
                    }
                    link[c] += w;
                }
                total[current] -= kv;
                let gain = |c: usize, link: &[f64], total: &[f64]| {
                    link[c] - resolution * total[c] * kv / two_w
                };
                let stay = gain(current, &link, &total);
                let eps = 1e-12 * kv.max(1.0);
                let best_gain = touched
                    .iter()
                    .map(|&c| gain(c, &link, &total))
                    .fold(stay, f64::max);
                let mut target = current;
                if best_gain > stay + eps {
                    target = touched
                        .iter()
                        .copied()
                        .filter(|&c| gain(c, &link, &total) >= best_gain - eps)
                        .min()
                        .unwrap_or(current);
                }
                total[target] += kv;
                if target != current {
                    community[v] = target;
                    moved = true;
                }
                for c in touched.drain(..) {
                    link[c] = 0.0;
                }
            }
            if !moved {
                break;
            }
            moved_any = true;
        }
        moved_any
    }

    /// Collapses communities into super-nodes numbered by first appearance
    /// in this level's sweep order. Returns the coarse level and the map
    /// from this level's nodes to super-nodes.
    fn aggregate(&self, community: &[usize]) -> (Level, Vec<usize>) {
        let n = self.len();
        let mut renumber = vec![usize::MAX; n];
        let mut k = 0;
        for &v in &self.order {
            let c = community[v];
            if renumber[c] == usize::MAX {
                renumber[c] = k;
                k += 1;
            }
        }
        let map: Vec<usize> = community.iter().map(|&c| renumber[c]).collect();
        let mut degree = vec![0.0; k];
        for v in 0..n {
            degree[map[v]] += self.degree[v];
        }
        let mut slot: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::new();
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        for &(s, t, w) in &self.edges {
            let (a, b) = (map[s], map[t]);
            if a == b {
                continue;
            }
            let key = (a.min(b), a.max(b));
            match slot.get(&key) {
                Some(&i) => edges[i].2 += w,
                None => {
                    slot.insert(key, edges.len());
                    edges.push((a, b, w));
                }
            }
        }
        (Level::new(k, (0..k).collect(), edges, degree), map)
    }
}

fn run(g: &Graph, resolution: f64, seed: Seed, mut trace: Option<&mut Vec<f64>>) -> Membership {
    let n = g.node_count();
    let two_w = 2.0 * g.total_weight();
    if two_w == 0.0 {
        return Membership((0..n).collect());
    }
    let mut order = g.order().to_vec();
    order.rotate_left((seed.0 % n as u64) as usize);
    let edges = g
        .edges()
        .iter()
        .map(|e| (e.source, e.target, e.weight))
        .collect();
    let degree = (0..n).map(|v| g.weighted_degree(v)).collect();
    let mut level = Level::new(n, order, edges, degree);
    // stable node -> node of the current level
    let mut assignment: Vec<usize> = (0..n).collect();

    if let Some(t) = trace.as_deref_mut() {
        t.push(modularity(g, &Membership(assignment.clone()), resolution).unwrap_or(0.0));
    }
    loop {
        let mut community: Vec<usize> = (0..level.len()).collect();
        let moved = level.local_moves(&mut community, resolution, two_w);
        let (next, map) = level.aggregate(&community);
        for a in assignment.iter_mut() {
            *a = map[*a];
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(modularity(g, &Membership(assignment.clone()), resolution).unwrap_or(0.0));
        }
        if !moved || next.len() == level.len() {
            break;
        }
        level = next;
    }
    Membership(assignment)
}

pub fn louvain(g: &Graph, resolution: f64, seed: Seed) -> Membership {
    run(g, resolution, seed, None)
}

/// Like [`louvain`], also returning the modularity after initialization
/// and after every level.
pub fn louvain_with_trace(g: &Graph, resolution: f64, seed: Seed) -> (Membership, Vec<f64>) {
    let mut trace = Vec::new();
    let m = run(g, resolution, seed, Some(&mut trace));
    (m, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{load_edge_list, EdgeListOptions};

    fn load(text: &str) -> Graph {
        load_edge_list(text, &EdgeListOptions::default()).unwrap()
    }

    fn karate() -> Graph {
        let opts = EdgeListOptions {
            delimiter: ',',
            header: true,
        };
        load_edge_list(include_str!("../../tests/fixtures/karate.csv"), &opts).unwrap()
    }

    fn groups(m: &Membership) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut seen = std::collections::HashMap::new();
        for (v, &c) in m.0.iter().enumerate() {
            let i = *seen.entry(c).or_insert_with(|| {
                out.push(Vec::new());
                out.len() - 1
            });
            out[i].push(v);
        }
        out
    }

    #[test]
    fn barbell_splits_into_triangles() {
        let g = load("a,b\nb,c\nc,a\nc,d\nd,e\ne,f\nf,d");
        for s in 0..20 {
            let m = louvain(&g.shuffle(Seed(s)), 1.0, Seed(s));
            assert_eq!(groups(&m), vec![vec![0, 1, 2], vec![3, 4, 5]], "seed {s}");
        }
    }

    #[test]
    fn single_edge_merges() {
        let g = load("a,b");
        assert_eq!(groups(&louvain(&g, 1.0, Seed(0))), vec![vec![0, 1]]);
    }

    #[test]
    fn complete_graph_is_one_community() {
        let g = load("a,b\na,c\na,d\nb,c\nb,d\nc,d");
        for s in 0..8 {
            let m = louvain(&g.shuffle(Seed(s)), 1.0, Seed(s));
            assert_eq!(m.community_count(), 1);
        }
    }

    #[test]
    fn ring_of_triangles() {
        let mut rows = Vec::new();
        for t in 0..4 {
            let b = 3 * t;
            rows.push(format!("{},{}", b, b + 1));
            rows.push(format!("{},{}", b + 1, b + 2));
            rows.push(format!("{},{}", b + 2, b));
            rows.push(format!("{},{}", b + 2, (b + 3) % 12));
        }
        let g = load(&rows.join("\n"));
        for s in 0..10 {
            let m = louvain(&g.shuffle(Seed(s)), 1.0, Seed(s));
            let mut sizes: Vec<usize> = groups(&m).iter().map(Vec::len).collect();
            sizes.sort();
            assert_eq!(sizes, vec![3, 3, 3, 3], "seed {s}");
        }
    }

    #[test]
    fn isolated_nodes_and_empty_edges() {
        let g = Graph::from_index_edges(3, &[]).unwrap();
        assert_eq!(louvain(&g, 1.0, Seed(1)).community_count(), 3);
    }

    #[test]
    fn modularity_trace_is_monotone() {
        let g = karate();
        for s in 0..20 {
            let (_, trace) = louvain_with_trace(&g.shuffle(Seed(s)), 1.0, Seed(s));
            assert!(trace.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{trace:?}");
        }
    }

    #[test]
    fn deterministic_given_order_and_seed() {
        let g = karate();
        let h = g.shuffle(Seed(9));
        assert_eq!(louvain(&h, 1.0, Seed(4)), louvain(&h, 1.0, Seed(4)));
    }
}
