//! Generators and brute-force oracles shared by the integration tests.
//! Nothing here calls the library's solvers or search routines.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use pmfgw::{ContinuousGraph, DiscreteGraph, GroundLoss, LossConfig};
use rand::Rng;

/// Every permutation of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

pub fn random_symmetric<R: Rng>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Array2<f64> {
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let x = rng.random_range(lo..hi);
            a[[i, j]] = x;
            a[[j, i]] = x;
        }
    }
    a
}

/// Random prediction with every entry in `[lo, hi)`.
pub fn random_prediction<R: Rng>(size: usize, dim: usize, lo: f64, hi: f64, rng: &mut R) -> ContinuousGraph {
    ContinuousGraph::new(
        Array1::from_shape_fn(size, |_| rng.random_range(lo..hi)),
        Array2::from_shape_fn((size, dim), |_| rng.random_range(0.0..1.0)),
        random_symmetric(size, lo, hi, rng),
    )
    .unwrap()
}

/// Random graph with real-valued features in `[0, 1)`.
pub fn random_graph<R: Rng>(m: usize, dim: usize, density: f64, rng: &mut R) -> DiscreteGraph {
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..i {
            if rng.random_bool(density) {
                edges.push((i, j));
            }
        }
    }
    DiscreteGraph::from_edges(Array2::from_shape_fn((m, dim), |_| rng.random_range(0.0..1.0)), &edges).unwrap()
}

/// Objective of the masked loss at the permutation plan `T[i, perm[i]] = 1`,
/// evaluated term by term from its definition.
pub fn objective_at_permutation(
    pred: &ContinuousGraph,
    target: &ContinuousGraph,
    cfg: &LossConfig,
    perm: &[usize],
) -> f64 {
    let alpha = cfg.effective_alpha().unwrap();
    let size = pred.size();
    let h = target.mask();
    let mass: f64 = h.sum();
    let mut node = 0.0;
    let mut feat = 0.0;
    let mut structure = 0.0;
    for i in 0..size {
        let j = perm[i];
        node += cfg.loss_h.eval(pred.mask()[i], h[j]);
        if h[j] != 0.0 {
            feat += cfg.loss_f.eval_vec(pred.features().row(i), target.features().row(j)).unwrap() * h[j];
        }
        for k in 0..size {
            let l = perm[k];
            structure += cfg.loss_a.eval(pred.edges()[[i, k]], target.edges()[[j, l]]) * h[j] * h[l];
        }
    }
    let mut value = alpha[0] * node / size as f64;
    if mass > 0.0 {
        value += alpha[1] * feat / mass + alpha[2] * structure / (mass * mass);
    }
    value
}

/// Smallest objective over all permutation plans.
pub fn permutation_minimum(pred: &ContinuousGraph, target: &ContinuousGraph, cfg: &LossConfig) -> f64 {
    permutations(pred.size())
        .iter()
        .map(|p| objective_at_permutation(pred, target, cfg, p))
        .fold(f64::INFINITY, f64::min)
}

/// `(L ⊗ T)[i, j] = sum_{k, l} loss(A[i, k], B[j, l]) W[i, k] W'[j, l] T[k, l]`.
pub fn quadruple_sum(
    loss: &GroundLoss,
    a: &Array2<f64>,
    b: &Array2<f64>,
    w: &Array2<f64>,
    wp: &Array2<f64>,
    t: &Array2<f64>,
) -> Array2<f64> {
    let (n, m) = (a.nrows(), b.nrows());
    Array2::from_shape_fn((n, m), |(i, j)| {
        let mut s = 0.0;
        for k in 0..n {
            for l in 0..m {
                s += loss.eval(a[[i, k]], b[[j, l]]) * w[[i, k]] * wp[[j, l]] * t[[k, l]];
            }
        }
        s
    })
}

/// Encoding of a graph with binary scalar features under a node order.
fn encode(g: &DiscreteGraph, order: &[usize]) -> Vec<u8> {
    let m = order.len();
    let mut code = Vec::with_capacity(m + m * m);
    for &u in order {
        code.push(g.features()[[u, 0]] as u8);
    }
    for &u in order {
        for &v in order {
            code.push(u8::from(g.has_edge(u, v)));
        }
    }
    code
}

/// Canonical form: size followed by the smallest encoding over node orders.
pub fn canonical(g: &DiscreteGraph) -> Vec<u8> {
    let m = g.num_nodes();
    let best = permutations(m).iter().map(|p| encode(g, p)).min().unwrap_or_default();
    let mut out = vec![m as u8];
    out.extend(best);
    out
}

/// One representative per isomorphism class of graphs with at most
/// `max_nodes` nodes and a binary scalar feature per node.
pub fn binary_graph_classes(max_nodes: usize) -> Vec<DiscreteGraph> {
    let mut seen = std::collections::BTreeSet::new();
    let mut reps = Vec::new();
    for m in 0..=max_nodes {
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        for labels in 0..(1u32 << m) {
            let features = Array2::from_shape_fn((m, 1), |(i, _)| f64::from((labels >> i) & 1));
            for mask in 0..(1u32 << pairs.len()) {
                let edges: Vec<(usize, usize)> =
                    pairs.iter().enumerate().filter(|(k, _)| (mask >> k) & 1 == 1).map(|(_, &e)| e).collect();
                let g = DiscreteGraph::from_edges(features.clone(), &edges).unwrap();
                if seen.insert(canonical(&g)) {
                    reps.push(g);
                }
            }
        }
    }
    reps
}

/// Edit cost of a bijection between `g1` and `g2` padded with isolated
/// dummy nodes to a common size; node `u` of the first maps to
/// `perm[u]` of the second. Dummies pair with real nodes as insertions or
/// deletions.
pub fn bijection_cost(g1: &DiscreteGraph, g2: &DiscreteGraph, perm: &[usize], same: impl Fn(usize, usize) -> bool) -> usize {
    let (m1, m2) = (g1.num_nodes(), g2.num_nodes());
    let n = perm.len();
    let mut cost = 0;
    for u in 0..n {
        let v = perm[u];
        cost += match (u < m1, v < m2) {
            (true, true) => usize::from(!same(u, v)),
            (false, false) => 0,
            _ => 1,
        };
        for w in 0..u {
            let x = perm[w];
            let e1 = u < m1 && w < m1 && g1.has_edge(u, w);
            let e2 = v < m2 && x < m2 && g2.has_edge(v, x);
            cost += usize::from(e1 != e2);
        }
    }
    cost
}

/// Exhaustive edit distance with exact feature equality.
pub fn exhaustive_edit(g1: &DiscreteGraph, g2: &DiscreteGraph) -> usize {
    let n = g1.num_nodes().max(g2.num_nodes());
    let same = |u: usize, v: usize| g1.features().row(u) == g2.features().row(v);
    permutations(n)
        .iter()
        .map(|p| bijection_cost(g1, g2, p, same))
        .min()
        .unwrap_or(0)
}
