//! Evaluation metrics: graph edit distance, isomorphism accuracy, size
//! accuracy, node accuracy and edge precision/recall.
//!
//! Every edit operation costs 1. Node substitution is free when the two
//! feature vectors are considered equal under [`FeatureEquality`].

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{decode, ContinuousGraph, DiscreteGraph, Permutation};
use crate::ground::GroundLoss;
use crate::solver::{
    cg_solve, round_to_permutation, FactorizedObjective, FactorizedTensor, SolverOptions,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureEquality {
    /// All components equal.
    Exact,
    /// Same index of the largest component (class labels).
    ArgMax,
    /// Euclidean distance at most `radius`.
    Radius(f64),
}

impl FeatureEquality {
    /// Positions considered equal within `fraction` of the image width.
    pub fn positions(fraction: f64, width: f64) -> Self {
        FeatureEquality::Radius(fraction * width)
    }

    pub fn equal(&self, a: ArrayView1<f64>, b: ArrayView1<f64>) -> bool {
        if a.len() != b.len() {
            return false;
        }
        match *self {
            FeatureEquality::Exact => a.iter().zip(b.iter()).all(|(x, y)| x == y),
            FeatureEquality::ArgMax => argmax(a) == argmax(b),
            FeatureEquality::Radius(r) => {
                let d2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
                d2.sqrt() <= r
            }
        }
    }
}

fn argmax(a: ArrayView1<f64>) -> Option<usize> {
    a.iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &x)| match best {
            Some((_, bx)) if bx >= x => best,
            _ => Some((i, x)),
        })
        .map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EditConfig {
    pub feature_equality: FeatureEquality,
    /// Largest combined node count searched exactly.
    pub exact_size_limit: usize,
}

impl Default for EditConfig {
    fn default() -> Self {
        Self {
            feature_equality: FeatureEquality::Exact,
            exact_size_limit: 10,
        }
    }
}

impl EditConfig {
    pub fn validate(&self) -> Result<()> {
        if let FeatureEquality::Radius(r) = self.feature_equality {
            if !(r >= 0.0) {
                return Err(Error::InvalidConfig(format!("radius {r} must be nonnegative")));
            }
        }
        Ok(())
    }
}

/// Edit distance together with the node mapping realizing it.
#[derive(Debug, Clone, PartialEq)]
pub struct EditResult {
    pub distance: usize,
    /// Image in the second graph of each node of the first graph, `None` for
    /// deleted nodes.
    pub mapping: Vec<Option<usize>>,
    /// False when the value comes from the approximate path (an upper bound).
    pub exact: bool,
}

struct Costs<'a> {
    g1: &'a DiscreteGraph,
    g2: &'a DiscreteGraph,
    subst: Array2<usize>,
}

impl<'a> Costs<'a> {
    fn new(g1: &'a DiscreteGraph, g2: &'a DiscreteGraph, cfg: &EditConfig) -> Self {
        let subst = Array2::from_shape_fn((g1.num_nodes(), g2.num_nodes()), |(u, v)| {
            usize::from(!cfg
                .feature_equality
                .equal(g1.features().row(u), g2.features().row(v)))
        });
        Self { g1, g2, subst }
    }
}

/// Total cost of the edit path induced by a node mapping.
pub fn alignment_cost(
    g1: &DiscreteGraph,
    g2: &DiscreteGraph,
    mapping: &[Option<usize>],
    cfg: &EditConfig,
) -> usize {
    let costs = Costs::new(g1, g2, cfg);
    full_cost(&costs, mapping)
}

fn full_cost(c: &Costs, mapping: &[Option<usize>]) -> usize {
    let m1 = c.g1.num_nodes();
    let m2 = c.g2.num_nodes();
    let mut used = vec![false; m2];
    let mut cost = 0;
    for u in 0..m1 {
        match mapping[u] {
            Some(v) => {
                used[v] = true;
                cost += c.subst[[u, v]];
            }
            None => cost += 1,
        }
        for w in 0..u {
            let e1 = c.g1.has_edge(u, w);
            match (mapping[u], mapping[w]) {
                (Some(v), Some(x)) => cost += usize::from(e1 != c.g2.has_edge(v, x)),
                _ => cost += usize::from(e1),
            }
        }
    }
    cost += used.iter().filter(|&&x| !x).count();
    for v in 0..m2 {
        for x in 0..v {
            if c.g2.has_edge(v, x) && (!used[v] || !used[x]) {
                cost += 1;
            }
        }
    }
    cost
}

struct Search<'a> {
    costs: Costs<'a>,
    allow_deletion: bool,
    mapping: Vec<Option<usize>>,
    used: Vec<bool>,
    best: usize,
    best_mapping: Vec<Option<usize>>,
}

impl Search<'_> {
    fn step_cost(&self, u: usize, target: Option<usize>) -> usize {
        let mut cost = match target {
            Some(v) => self.costs.subst[[u, v]],
            None => 1,
        };
        for w in 0..u {
            let e1 = self.costs.g1.has_edge(u, w);
            cost += match (target, self.mapping[w]) {
                (Some(v), Some(x)) => usize::from(e1 != self.costs.g2.has_edge(v, x)),
                _ => usize::from(e1),
            };
        }
        cost
    }

    fn finish_cost(&self) -> usize {
        let m2 = self.costs.g2.num_nodes();
        let mut cost = self.used.iter().filter(|&&x| !x).count();
        for v in 0..m2 {
            for x in 0..v {
                if self.costs.g2.has_edge(v, x) && (!self.used[v] || !self.used[x]) {
                    cost += 1;
                }
            }
        }
        cost
    }

    fn dfs(&mut self, u: usize, acc: usize, free: usize) {
        let m1 = self.costs.g1.num_nodes();
        let remaining = m1 - u;
        if acc + remaining.abs_diff(free) >= self.best {
            return;
        }
        if u == m1 {
            let total = acc + self.finish_cost();
            if total < self.best {
                self.best = total;
                self.best_mapping = self.mapping.clone();
            }
            return;
        }
        let m2 = self.costs.g2.num_nodes();
        for v in 0..m2 {
            if self.used[v] {
                continue;
            }
            let c = self.step_cost(u, Some(v));
            self.used[v] = true;
            self.mapping[u] = Some(v);
            self.dfs(u + 1, acc + c, free - 1);
            self.mapping[u] = None;
            self.used[v] = false;
        }
        if self.allow_deletion || free < remaining {
            let c = self.step_cost(u, None);
            self.dfs(u + 1, acc + c, free);
        }
    }
}

fn exact_search(g1: &DiscreteGraph, g2: &DiscreteGraph, cfg: &EditConfig, allow_deletion: bool) -> EditResult {
    let m1 = g1.num_nodes();
    let m2 = g2.num_nodes();
    let costs = Costs::new(g1, g2, cfg);
    // Deleting everything and inserting everything is always a valid path.
    let trivial: Vec<Option<usize>> = vec![None; m1];
    let trivial_cost = full_cost(&costs, &trivial);
    let mut search = Search {
        costs,
        allow_deletion,
        mapping: vec![None; m1],
        used: vec![false; m2],
        best: if allow_deletion { trivial_cost + 1 } else { usize::MAX },
        best_mapping: trivial,
    };
    search.dfs(0, 0, m2);
    EditResult {
        distance: search.best.min(if allow_deletion { trivial_cost } else { usize::MAX }),
        mapping: search.best_mapping,
        exact: true,
    }
}

/// Aligns two graphs padded to a common size with conditional gradient on
/// the graph matching objective, then rounds to a permutation.
fn approximate_search(g1: &DiscreteGraph, g2: &DiscreteGraph, cfg: &EditConfig) -> Result<EditResult> {
    let m1 = g1.num_nodes();
    let m2 = g2.num_nodes();
    let n = m1.max(m2);
    let costs = Costs::new(g1, g2, cfg);
    let linear = Array2::from_shape_fn((n, n), |(u, v)| match (u < m1, v < m2) {
        (true, true) => costs.subst[[u, v]] as f64,
        (false, false) => 0.0,
        _ => 1.0,
    });
    let mut a1 = Array2::zeros((n, n));
    a1.slice_mut(ndarray::s![..m1, ..m1]).assign(g1.adjacency());
    let mut a2 = Array2::zeros((n, n));
    a2.slice_mut(ndarray::s![..m2, ..m2]).assign(g2.adjacency());
    let ones = Array2::ones((n, n));
    let dec = GroundLoss::squared().decompose()?;
    // Ordered pairs count every edge twice.
    let tensor = FactorizedTensor::new(&dec, &a1, &a2, &ones, &ones)?;
    let objective = FactorizedObjective::new(linear, tensor, 0.5)?;
    let solved = cg_solve(&objective, &SolverOptions::oracle())?;
    let p = round_to_permutation(&solved.plan);
    let mapping: Vec<Option<usize>> = (0..m1)
        .map(|u| Some(p.apply(u)).filter(|&v| v < m2))
        .collect();
    Ok(EditResult {
        distance: full_cost(&costs, &mapping),
        mapping,
        exact: false,
    })
}

/// Minimum number of unit-cost edits turning `g1` into `g2`; exact when
/// the combined size is within `cfg.exact_size_limit`, an upper bound
/// otherwise.
pub fn edit_distance(g1: &DiscreteGraph, g2: &DiscreteGraph, cfg: &EditConfig) -> Result<EditResult> {
    cfg.validate()?;
    if g1.num_nodes() + g2.num_nodes() <= cfg.exact_size_limit {
        Ok(exact_search(g1, g2, cfg, true))
    } else {
        approximate_search(g1, g2, cfg)
    }
}

/// Forces the approximate path regardless of size.
pub fn edit_distance_approximate(g1: &DiscreteGraph, g2: &DiscreteGraph, cfg: &EditConfig) -> Result<EditResult> {
    cfg.validate()?;
    approximate_search(g1, g2, cfg)
}

/// Indices of the `m` slots with highest mask, ties to the lower index,
/// returned in increasing index order.
pub fn top_m_slots(pred: &ContinuousGraph, m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pred.size()).collect();
    order.sort_by(|&a, &b| {
        pred.mask()[b]
            .partial_cmp(&pred.mask()[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = order.into_iter().take(m).collect();
    kept.sort_unstable();
    kept
}

/// Alignment of a prediction with a target of size `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// Prediction restricted to its `m` most likely slots, edges thresholded,
    /// nodes in increasing slot order.
    pub selected: DiscreteGraph,
    /// Slot indices of the selected nodes.
    pub slots: Vec<usize>,
    /// `perm[i]` is the selected node matched to target node `i`.
    pub perm: Permutation,
    pub exact: bool,
}

impl Alignment {
    /// Selected graph reordered so that node `i` faces target node `i`.
    pub fn aligned(&self) -> DiscreteGraph {
        crate::graph::permute(&self.selected, &self.perm).expect("sizes agree")
    }
}

/// Keeps the `m` most likely predicted nodes and matches them one-to-one to
/// the target, minimizing the edit cost of the matching.
pub fn align_top_m(pred: &ContinuousGraph, target: &DiscreteGraph, cfg: &EditConfig) -> Result<Alignment> {
    cfg.validate()?;
    let m = target.num_nodes();
    if pred.size() < m {
        return Err(Error::SizeExceeded {
            size: m,
            max_nodes: pred.size(),
        });
    }
    let slots = top_m_slots(pred, m);
    let mut adjacency = Array2::zeros((m, m));
    for (a, &i) in slots.iter().enumerate() {
        for (b, &j) in slots.iter().enumerate() {
            if a != b && pred.edges()[[i, j]] > 0.5 {
                adjacency[[a, b]] = 1.0;
            }
        }
    }
    let features = pred.features().select(ndarray::Axis(0), &slots);
    let selected = DiscreteGraph::new(features, adjacency)?;
    let result = if 2 * m <= cfg.exact_size_limit {
        exact_search(&selected, target, cfg, false)
    } else {
        approximate_search(&selected, target, cfg)?
    };
    let mut perm = vec![0usize; m];
    for (u, v) in result.mapping.iter().enumerate() {
        perm[v.expect("bijection between equal sizes")] = u;
    }
    Ok(Alignment {
        selected,
        slots,
        perm: Permutation::new(perm)?,
        exact: result.exact,
    })
}

/// `1[#{h^ > 1/2} = m]`.
pub fn size_accuracy(pred: &ContinuousGraph, target: &DiscreteGraph) -> f64 {
    f64::from(u8::from(pred.predicted_size() == target.num_nodes()))
}

/// Fraction of target nodes whose aligned prediction has equal features.
pub fn node_accuracy_aligned(aligned: &DiscreteGraph, target: &DiscreteGraph, cfg: &EditConfig) -> f64 {
    let m = target.num_nodes();
    if m == 0 {
        return 1.0;
    }
    let hits = (0..m)
        .filter(|&i| cfg.feature_equality.equal(aligned.features().row(i), target.features().row(i)))
        .count();
    hits as f64 / m as f64
}

fn edge_counts(aligned: &DiscreteGraph, target: &DiscreteGraph) -> (usize, usize, usize) {
    let m = target.num_nodes();
    let mut both = 0;
    let mut predicted = 0;
    let mut actual = 0;
    for i in 0..m {
        for j in 0..m {
            let p = aligned.has_edge(i, j);
            let t = target.has_edge(i, j);
            both += usize::from(p && t);
            predicted += usize::from(p);
            actual += usize::from(t);
        }
    }
    (both, predicted, actual)
}

/// Precision over adjacency entries; 1 when nothing is predicted.
pub fn edge_precision_aligned(aligned: &DiscreteGraph, target: &DiscreteGraph) -> f64 {
    let (both, predicted, _) = edge_counts(aligned, target);
    if predicted == 0 {
        1.0
    } else {
        both as f64 / predicted as f64
    }
}

/// Recall over adjacency entries; 1 when the target has no edges.
pub fn edge_recall_aligned(aligned: &DiscreteGraph, target: &DiscreteGraph) -> f64 {
    let (both, _, actual) = edge_counts(aligned, target);
    if actual == 0 {
        1.0
    } else {
        both as f64 / actual as f64
    }
}

pub fn node_accuracy(pred: &ContinuousGraph, target: &DiscreteGraph, cfg: &EditConfig) -> Result<f64> {
    Ok(node_accuracy_aligned(&align_top_m(pred, target, cfg)?.aligned(), target, cfg))
}

pub fn edge_precision(pred: &ContinuousGraph, target: &DiscreteGraph, cfg: &EditConfig) -> Result<f64> {
    Ok(edge_precision_aligned(&align_top_m(pred, target, cfg)?.aligned(), target))
}

pub fn edge_recall(pred: &ContinuousGraph, target: &DiscreteGraph, cfg: &EditConfig) -> Result<f64> {
    Ok(edge_recall_aligned(&align_top_m(pred, target, cfg)?.aligned(), target))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleMetrics {
    pub index: usize,
    pub edit: usize,
    pub edit_exact: bool,
    pub gi: f64,
    pub size_acc: f64,
    pub node_acc: f64,
    pub edge_precision: f64,
    pub edge_recall: f64,
    pub predicted_size: usize,
    pub target_size: usize,
}

pub fn evaluate_pair(
    index: usize,
    pred: &ContinuousGraph,
    target: &DiscreteGraph,
    cfg: &EditConfig,
) -> Result<SampleMetrics> {
    let edit = edit_distance(&decode(pred), target, cfg)?;
    let alignment = align_top_m(pred, target, cfg)?;
    let aligned = alignment.aligned();
    Ok(SampleMetrics {
        index,
        edit: edit.distance,
        edit_exact: edit.exact,
        gi: f64::from(u8::from(edit.distance == 0)),
        size_acc: size_accuracy(pred, target),
        node_acc: node_accuracy_aligned(&aligned, target, cfg),
        edge_precision: edge_precision_aligned(&aligned, target),
        edge_recall: edge_recall_aligned(&aligned, target),
        predicted_size: pred.predicted_size(),
        target_size: target.num_nodes(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub count: usize,
    pub edit: f64,
    pub gi_acc: f64,
    pub size_acc: f64,
    pub node_acc: f64,
    pub edge_precision: f64,
    pub edge_recall: f64,
    /// Samples whose edit distance came from the approximate path.
    pub approximate_edits: usize,
    pub samples: Vec<SampleMetrics>,
}

impl MetricReport {
    pub fn from_samples(samples: Vec<SampleMetrics>) -> Self {
        let n = samples.len();
        let mean = |f: &dyn Fn(&SampleMetrics) -> f64| {
            if n == 0 {
                0.0
            } else {
                samples.iter().map(f).sum::<f64>() / n as f64
            }
        };
        Self {
            count: n,
            edit: mean(&|s| s.edit as f64),
            gi_acc: mean(&|s| s.gi),
            size_acc: mean(&|s| s.size_acc),
            node_acc: mean(&|s| s.node_acc),
            edge_precision: mean(&|s| s.edge_precision),
            edge_recall: mean(&|s| s.edge_recall),
            approximate_edits: samples.iter().filter(|s| !s.edit_exact).count(),
            samples,
        }
    }
}

/// Per-pair metrics (evaluated in parallel) and their means.
pub fn evaluate_dataset(
    preds: &[ContinuousGraph],
    targets: &[DiscreteGraph],
    cfg: &EditConfig,
) -> Result<MetricReport> {
    if preds.len() != targets.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} targets",
            preds.len(),
            targets.len()
        )));
    }
    let samples = preds
        .par_iter()
        .zip(targets.par_iter())
        .enumerate()
        .map(|(i, (p, t))| {
            evaluate_pair(i, p, t, cfg).map_err(|e| Error::BatchItem {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricReport::from_samples(samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{pad, to_continuous};
    use ndarray::array;

    fn unlabeled(m: usize, edges: &[(usize, usize)]) -> DiscreteGraph {
        DiscreteGraph::from_edges(Array2::zeros((m, 1)), edges).unwrap()
    }

    #[test]
    fn self_distance_zero() {
        let g = unlabeled(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(edit_distance(&g, &g, &EditConfig::default()).unwrap().distance, 0);
    }

    #[test]
    fn path_vs_triangle() {
        let p = unlabeled(3, &[(0, 1), (1, 2)]);
        let t = unlabeled(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(edit_distance(&p, &t, &EditConfig::default()).unwrap().distance, 1);
    }

    #[test]
    fn edge_vs_empty() {
        let g = unlabeled(2, &[(0, 1)]);
        let e = DiscreteGraph::empty(1);
        let cfg = EditConfig::default();
        assert_eq!(edit_distance(&g, &e, &cfg).unwrap().distance, 3);
        assert_eq!(edit_distance(&e, &g, &cfg).unwrap().distance, 3);
    }

    #[test]
    fn label_substitution() {
        let a = DiscreteGraph::from_edges(array![[1.0], [0.0]], &[(0, 1)]).unwrap();
        let b = DiscreteGraph::from_edges(array![[1.0], [1.0]], &[(0, 1)]).unwrap();
        assert_eq!(edit_distance(&a, &b, &EditConfig::default()).unwrap().distance, 1);
    }

    #[test]
    fn radius_equality() {
        let a = DiscreteGraph::from_edges(array![[0.10, 0.10]], &[]).unwrap();
        let b = DiscreteGraph::from_edges(array![[0.13, 0.13]], &[]).unwrap();
        let near = EditConfig {
            feature_equality: FeatureEquality::positions(0.05, 1.0),
            ..EditConfig::default()
        };
        assert_eq!(edit_distance(&a, &b, &near).unwrap().distance, 0);
        assert_eq!(edit_distance(&a, &b, &EditConfig::default()).unwrap().distance, 1);
        let bad = EditConfig {
            feature_equality: FeatureEquality::Radius(-1.0),
            ..EditConfig::default()
        };
        assert!(edit_distance(&a, &b, &bad).is_err());
    }

    #[test]
    fn approximate_is_upper_bound() {
        let g1 = unlabeled(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let g2 = unlabeled(5, &[(0, 1), (1, 2), (2, 0), (3, 4)]);
        let cfg = EditConfig::default();
        let exact = edit_distance(&g1, &g2, &cfg).unwrap();
        let approx = edit_distance_approximate(&g1, &g2, &cfg).unwrap();
        assert!(exact.exact && !approx.exact);
        assert!(approx.distance >= exact.distance);
        assert_eq!(alignment_cost(&g1, &g2, &approx.mapping, &cfg), approx.distance);
    }

    #[test]
    fn top_m_selection() {
        let pred = ContinuousGraph::new(array![0.9, 0.4, 0.8], Array2::zeros((3, 1)), Array2::zeros((3, 3))).unwrap();
        assert_eq!(top_m_slots(&pred, 2), vec![0, 2]);
        let tie = ContinuousGraph::new(array![0.5, 0.5, 0.1], Array2::zeros((3, 1)), Array2::zeros((3, 3))).unwrap();
        assert_eq!(top_m_slots(&tie, 1), vec![0]);
    }

    #[test]
    fn align_identity_on_padded_target() {
        let t = DiscreteGraph::from_edges(array![[1.0], [2.0], [3.0]], &[(0, 1)]).unwrap();
        let pred = pad(&t, 5).unwrap().into_continuous();
        let al = align_top_m(&pred, &t, &EditConfig::default()).unwrap();
        assert_eq!(al.slots, vec![0, 1, 2]);
        assert_eq!(al.perm, Permutation::identity(3));
    }

    #[test]
    fn perfect_prediction_metrics() {
        let t = DiscreteGraph::from_edges(array![[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]], &[(0, 1), (1, 2)]).unwrap();
        let pred = pad(&t, 4).unwrap().into_continuous();
        let s = evaluate_pair(0, &pred, &t, &EditConfig::default()).unwrap();
        assert_eq!((s.edit, s.gi, s.size_acc, s.node_acc, s.edge_precision, s.edge_recall), (0, 1.0, 1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn no_predicted_edges() {
        let t = unlabeled(3, &[(0, 1), (1, 2)]);
        let pred = to_continuous(&unlabeled(3, &[]));
        let cfg = EditConfig::default();
        assert_eq!(edge_recall(&pred, &t, &cfg).unwrap(), 0.0);
        assert_eq!(edge_precision(&pred, &t, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn one_wrong_feature() {
        let t = DiscreteGraph::from_edges(array![[1.0], [2.0], [3.0]], &[]).unwrap();
        let p = DiscreteGraph::from_edges(array![[1.0], [2.0], [4.0]], &[]).unwrap();
        let acc = node_accuracy(&to_continuous(&p), &t, &EditConfig::default()).unwrap();
        assert!((acc - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn dataset_means() {
        let t = unlabeled(2, &[(0, 1)]);
        let good = to_continuous(&t);
        let bad = to_continuous(&unlabeled(2, &[]));
        let cfg = EditConfig::default();
        let single = evaluate_dataset(&[good.clone()], &[t.clone()], &cfg).unwrap();
        assert_eq!(single.samples[0], evaluate_pair(0, &good, &t, &cfg).unwrap());
        let r = evaluate_dataset(&[good, bad], &[t.clone(), t], &cfg).unwrap();
        assert_eq!(r.edit, 0.5);
        assert_eq!(r.gi_acc, 0.5);
        assert_eq!(r.edge_recall, 0.5);
        assert!(evaluate_dataset(&[], &[unlabeled(1, &[])], &cfg).is_err());
    }
}
