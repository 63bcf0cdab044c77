//! Asynchronous label propagation.

use rand::seq::{IndexedRandom, SliceRandom};

use super::Membership;
use crate::graph::{Graph, Seed};

/// Pass cap; oscillating inputs stop here and report `converged = false`.
pub const MAX_PASSES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpaStats {
    pub passes: usize,
    pub converged: bool,
}

pub fn label_propagation(g: &Graph, seed: Seed) -> Membership {
    label_propagation_with_stats(g, seed).0
}

/// Every node starts with its own label. Each pass visits the nodes in a
/// seeded shuffle of the presentation order; a node keeps its label if it
/// is among the heaviest labels of its neighborhood, otherwise it adopts
/// one of the heaviest, chosen uniformly at random.
pub fn label_propagation_with_stats(g: &Graph, seed: Seed) -> (Membership, LpaStats) {
    let n = g.node_count();
    let mut rng = seed.rng();
    let mut label: Vec<usize> = (0..n).collect();
    let mut weight = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut best: Vec<usize> = Vec::new();
    let mut order = g.order().to_vec();
    let mut stats = LpaStats {
        passes: 0,
        converged: false,
    };

    while stats.passes < MAX_PASSES {
        stats.passes += 1;
        order.shuffle(&mut rng);
        let mut changed = false;
        for &v in &order {
            for &(u, w) in g.neighbors(v) {
                let l = label[u];
                if weight[l] == 0.0 {
                    touched.push(l);
                }
                weight[l] += w;
            }
            if touched.is_empty() {
                continue;
            }
            let top = touched.iter().map(|&l| weight[l]).fold(f64::MIN, f64::max);
            let eps = 1e-12 * top.abs().max(1.0);
            best.clear();
            best.extend(touched.iter().copied().filter(|&l| weight[l] >= top - eps));
            if !best.contains(&label[v]) {
                // `best` is in neighbor presentation order, so the draw is
                // reproducible for a fixed graph and seed.
                label[v] = *best.choose(&mut rng).expect("non-empty");
                changed = true;
            }
            for l in touched.drain(..) {
                weight[l] = 0.0;
            }
        }
        if !changed {
            stats.converged = true;
            break;
        }
    }
    (Membership(label), stats)
}
