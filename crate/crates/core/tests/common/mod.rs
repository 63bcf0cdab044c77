//! Independent reference computations shared by the integration tests.
#![allow(dead_code, clippy::excessive_precision)]

use solspace_core::bayes::{BetaBinomialModel, PStableVariant};
use solspace_core::explorer::{Exploration, ExplorationConfig, SolutionSpace, StopReason};
use solspace_core::partition::{canonicalize, ValidityReport};
use solspace_core::{Graph, Membership};

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    // below ~100 ulp of the panel value the error estimate is roundoff
    if err <= tol.max(1e-14 * value.abs()) || depth == 0 {
        return value;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, tol, depth - 1) + adaptive(f, m, b, tol, depth - 1)
}

/// `int_0^x t^(a-1) (1-t)^(b-1) dt` for `x <= 1/2`, scaled by
/// `exp(-shift)`. For `a < 1` the substitution `t = s^(1/a)` removes the
/// endpoint singularity.
fn lower_integral(a: f64, b: f64, x: f64, shift: f64, tol: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if a < 1.0 {
        let f = move |s: f64| {
            let t = s.powf(1.0 / a);
            ((b - 1.0) * (1.0 - t).ln() - shift).exp() / a
        };
        adaptive(&f, 0.0, x.powf(a), tol, 40)
    } else {
        let f = move |t: f64| {
            if t <= 0.0 {
                return if a == 1.0 { (-shift).exp() } else { 0.0 };
            }
            ((a - 1.0) * t.ln() + (b - 1.0) * (1.0 - t).ln() - shift).exp()
        };
        adaptive(&f, 0.0, x, tol, 40)
    }
}

/// CDF of Beta(a, b) by adaptive Gauss-Kronrod quadrature of the density.
/// The normalizing constant is itself integrated, so no special functions
/// are involved.
pub struct BetaCdfOracle {
    a: f64,
    b: f64,
    shift: f64,
    lower_half: f64,
    upper_half: f64,
}

impl BetaCdfOracle {
    pub fn new(a: f64, b: f64) -> Self {
        // log of the unnormalized density at its mode (or at 1/2 when the
        // density is unbounded), keeps the integrand in range
        let mode = if a > 1.0 && b > 1.0 {
            (a - 1.0) / (a + b - 2.0)
        } else {
            0.5
        };
        let shift = (a - 1.0) * mode.ln() + (b - 1.0) * (1.0 - mode).ln();
        let rough = lower_integral(a, b, 0.5, shift, 1e-6) + lower_integral(b, a, 0.5, shift, 1e-6);
        let tol = rough * 1e-14;
        let lower_half = lower_integral(a, b, 0.5, shift, tol);
        let upper_half = lower_integral(b, a, 0.5, shift, tol);
        Self {
            a,
            b,
            shift,
            lower_half,
            upper_half,
        }
    }

    fn total(&self) -> f64 {
        self.lower_half + self.upper_half
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let tol = self.total() * 1e-14;
        if x <= 0.5 {
            lower_integral(self.a, self.b, x, self.shift, tol) / self.total()
        } else {
            1.0 - lower_integral(self.b, self.a, 1.0 - x, self.shift, tol) / self.total()
        }
    }

    pub fn quantile(&self, q: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo < 1e-14 {
                break;
            }
            if self.cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Every set partition of `0..n` as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=max + 1 {
            prefix.push(c);
            extend(prefix, max.max(c), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut prefix = vec![0];
    extend(&mut prefix, 0, n, &mut out);
    out
}

/// Modularity computed straight from the pair-sum definition
/// `Q = 1/(2W) sum_ij [A_ij - gamma k_i k_j / 2W] delta(c_i, c_j)`.
pub fn modularity_by_pairs(g: &Graph, m: &[usize], gamma: f64) -> f64 {
    let n = g.node_count();
    let mut adj = vec![vec![0.0; n]; n];
    for e in g.edges() {
        adj[e.source][e.target] += e.weight;
        adj[e.target][e.source] += e.weight;
    }
    let two_w = 2.0 * g.total_weight();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if m[i] == m[j] {
                q += adj[i][j] - gamma * g.weighted_degree(i) * g.weighted_degree(j) / two_w;
            }
        }
    }
    q / two_w
}

/// Maximum modularity over all set partitions.
pub fn brute_force_max_modularity(g: &Graph, gamma: f64) -> (f64, Membership) {
    set_partitions(g.node_count())
        .into_iter()
        .map(|p| (modularity_by_pairs(g, &p, gamma), Membership(p)))
        .fold((f64::MIN, Membership(vec![])), |best, cur| {
            if cur.0 > best.0 {
                cur
            } else {
                best
            }
        })
}

/// Union-find connectivity of the subgraph induced by `nodes`.
pub fn union_find_connected(g: &Graph, nodes: &[usize]) -> bool {
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut inside = vec![false; n];
    for &v in nodes {
        inside[v] = true;
    }
    for e in g.edges() {
        if inside[e.source] && inside[e.target] {
            let (a, b) = (find(&mut parent, e.source), find(&mut parent, e.target));
            parent[a] = b;
        }
    }
    let root = find(&mut parent, nodes[0]);
    nodes.iter().all(|&v| find(&mut parent, v) == root)
}

pub fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn fixture_path(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn load_fixture(name: &str) -> Graph {
    let opts = solspace_core::EdgeListOptions {
        delimiter: ',',
        header: true,
    };
    solspace_core::load_edge_list(&fixture(name), &opts).unwrap()
}

/// Nodes of the graph behind synthetic explorations.
pub const SYNTHETIC_NODES: usize = 64;

pub fn synthetic_graph() -> Graph {
    Graph::from_index_edges(SYNTHETIC_NODES, &[]).unwrap()
}

/// Trial log with `counts[i]` consecutive draws of solution `i`.
pub fn grouped_log(counts: &[u64]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize))
        .collect()
}

/// An exploration whose trials produced the solutions named in `log`, in
/// order. Solution `i` splits node `i` off from the rest; validity is
/// stipulated rather than computed.
pub fn synthetic_exploration(log: &[usize], valid: bool) -> Exploration {
    let distinct = log.iter().max().map_or(0, |m| m + 1);
    let partitions = (0..distinct)
        .map(|i| {
            let ids: Vec<usize> = (0..SYNTHETIC_NODES).map(|v| usize::from(v == i)).collect();
            (
                canonicalize(&Membership(ids)),
                ValidityReport::assumed(valid),
            )
        })
        .collect();
    let space = SolutionSpace::from_trial_log(partitions, log.to_vec()).unwrap();
    let mut model = BetaBinomialModel::default();
    let mut trace = Vec::new();
    let mut discovered = 0;
    for &s in log {
        model = model.update(s == discovered);
        if s == discovered {
            discovered += 1;
        }
        trace.push(model.p_stable(PStableVariant::Corrected));
    }
    Exploration {
        config: ExplorationConfig::default(),
        space,
        model,
        trace,
        stop_reason: StopReason::TMax,
        error: None,
    }
}
