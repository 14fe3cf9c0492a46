//! Graph representations and the operators moving between them.
//!
//! A [`DiscreteGraph`] is a target graph with `m` nodes. A [`ContinuousGraph`]
//! lives in the relaxed fixed-size space: a node-existence probability per
//! slot, a feature row per slot and a symmetric matrix of edge probabilities.
//! [`pad`] embeds a discrete graph into that space as a [`PaddedGraph`];
//! [`threshold`] rounds a continuous graph back and [`decode`] strips the
//! padding.

use ndarray::{concatenate, s, Array1, Array2, Axis};

use crate::error::{Error, Result};

/// Tolerance used when checking symmetry of real-valued edge matrices.
const SYMMETRY_TOL: f64 = 1e-12;

/// Attributed undirected graph with binary adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGraph {
    features: Array2<f64>,
    adjacency: Array2<f64>,
}

impl DiscreteGraph {
    /// Builds a graph, checking that the adjacency is a symmetric 0/1 matrix
    /// with an empty diagonal and that the feature rows match the node count.
    pub fn new(features: Array2<f64>, adjacency: Array2<f64>) -> Result<Self> {
        let m = adjacency.nrows();
        if adjacency.ncols() != m {
            return Err(Error::InvalidGraph(format!(
                "adjacency is {}x{}, expected square",
                m,
                adjacency.ncols()
            )));
        }
        if features.nrows() != m {
            return Err(Error::InvalidGraph(format!(
                "{} feature rows for {} nodes",
                features.nrows(),
                m
            )));
        }
        for i in 0..m {
            if adjacency[[i, i]] != 0.0 {
                return Err(Error::InvalidGraph(format!("self-loop on node {i}")));
            }
            for j in 0..m {
                let a = adjacency[[i, j]];
                if a != 0.0 && a != 1.0 {
                    return Err(Error::InvalidGraph(format!(
                        "adjacency entry ({i}, {j}) = {a} is not binary"
                    )));
                }
                if a != adjacency[[j, i]] {
                    return Err(Error::InvalidGraph(format!(
                        "adjacency is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGraph("non-finite feature".into()));
        }
        Ok(Self {
            features,
            adjacency,
        })
    }

    /// Graph with `m` nodes of dimension `d`, given as an edge list.
    pub fn from_edges(features: Array2<f64>, edges: &[(usize, usize)]) -> Result<Self> {
        let m = features.nrows();
        let mut adjacency = Array2::zeros((m, m));
        for &(u, v) in edges {
            if u >= m || v >= m || u == v {
                return Err(Error::InvalidGraph(format!("bad edge ({u}, {v})")));
            }
            adjacency[[u, v]] = 1.0;
            adjacency[[v, u]] = 1.0;
        }
        Self::new(features, adjacency)
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            features: Array2::zeros((0, dim)),
            adjacency: Array2::zeros((0, 0)),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn adjacency(&self) -> &Array2<f64> {
        &self.adjacency
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[[u, v]] != 0.0
    }

    pub fn num_edges(&self) -> usize {
        let m = self.num_nodes();
        (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .filter(|&(i, j)| self.has_edge(i, j))
            .count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency
            .rows()
            .into_iter()
            .map(|row| row.iter().filter(|&&a| a != 0.0).count())
            .collect()
    }

    pub fn into_parts(self) -> (Array2<f64>, Array2<f64>) {
        (self.features, self.adjacency)
    }
}

/// Prediction in the relaxed space: node-existence probabilities, node
/// features and edge probabilities, all over `M` slots.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousGraph {
    mask: Array1<f64>,
    features: Array2<f64>,
    edges: Array2<f64>,
}

impl ContinuousGraph {
    pub fn new(mask: Array1<f64>, features: Array2<f64>, edges: Array2<f64>) -> Result<Self> {
        let size = mask.len();
        if features.nrows() != size || edges.dim() != (size, size) {
            return Err(Error::InvalidGraph(format!(
                "mask has {} slots, features {}x{}, edges {}x{}",
                size,
                features.nrows(),
                features.ncols(),
                edges.nrows(),
                edges.ncols()
            )));
        }
        if let Some(x) = mask.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidGraph(format!("mask entry {x} outside [0, 1]")));
        }
        for i in 0..size {
            for j in 0..size {
                let a = edges[[i, j]];
                if !(0.0..=1.0).contains(&a) {
                    return Err(Error::InvalidGraph(format!(
                        "edge probability ({i}, {j}) = {a} outside [0, 1]"
                    )));
                }
                if (a - edges[[j, i]]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidGraph(format!(
                        "edge probabilities not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGraph("non-finite feature".into()));
        }
        Ok(Self {
            mask,
            features,
            edges,
        })
    }

    /// Number of slots `M`.
    pub fn size(&self) -> usize {
        self.mask.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn mask(&self) -> &Array1<f64> {
        &self.mask
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn edges(&self) -> &Array2<f64> {
        &self.edges
    }

    /// Number of slots whose existence probability is strictly above 1/2.
    pub fn predicted_size(&self) -> usize {
        self.mask.iter().filter(|&&h| h > 0.5).count()
    }

    pub fn into_parts(self) -> (Array1<f64>, Array2<f64>, Array2<f64>) {
        (self.mask, self.features, self.edges)
    }
}

/// A discrete graph embedded in the relaxed space: the first `true_size`
/// slots are real nodes, the rest are zero padding.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddedGraph {
    inner: ContinuousGraph,
    true_size: usize,
}

impl PaddedGraph {
    pub fn true_size(&self) -> usize {
        self.true_size
    }

    pub fn size(&self) -> usize {
        self.inner.size()
    }

    pub fn feature_dim(&self) -> usize {
        self.inner.feature_dim()
    }

    pub fn mask(&self) -> &Array1<f64> {
        self.inner.mask()
    }

    pub fn features(&self) -> &Array2<f64> {
        self.inner.features()
    }

    pub fn edges(&self) -> &Array2<f64> {
        self.inner.edges()
    }

    pub fn as_continuous(&self) -> &ContinuousGraph {
        &self.inner
    }

    pub fn into_continuous(self) -> ContinuousGraph {
        self.inner
    }

    /// Inverse of [`pad`]: drops the padding slots.
    pub fn unpad(&self) -> DiscreteGraph {
        let m = self.true_size;
        DiscreteGraph {
            features: self.inner.features.slice(s![..m, ..]).to_owned(),
            adjacency: self.inner.edges.slice(s![..m, ..m]).to_owned(),
        }
    }

    /// Copy of the target with features and edges of the padding slots
    /// replaced. Used to check that padded slots never reach the loss.
    pub fn with_padding_values(&self, feature_fill: f64, edge_fill: f64) -> ContinuousGraph {
        let m = self.true_size;
        let mut g = self.inner.clone();
        g.features.slice_mut(s![m.., ..]).fill(feature_fill);
        g.edges.slice_mut(s![m.., ..]).fill(edge_fill);
        g.edges.slice_mut(s![.., m..]).fill(edge_fill);
        g
    }
}

/// Bijection of `{0..n}`; `map[i]` is the source index placed at slot `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &p in &map {
            if p >= n || seen[p] {
                return Err(Error::InvalidPermutation(n));
            }
            seen[p] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &p) in self.map.iter().enumerate() {
            inv[p] = i;
        }
        Self { map: inv }
    }

    /// Permutation matrix `P` with `P[i, map[i]] = 1`, so that `P X` moves
    /// row `map[i]` of `X` to row `i`.
    pub fn to_matrix(&self) -> Array2<f64> {
        let n = self.map.len();
        let mut p = Array2::zeros((n, n));
        for (i, &j) in self.map.iter().enumerate() {
            p[[i, j]] = 1.0;
        }
        p
    }

    /// Uniformly random permutation.
    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Self { map }
    }
}

/// Embeds `g` into `max_nodes` slots.
pub fn pad(g: &DiscreteGraph, max_nodes: usize) -> Result<PaddedGraph> {
    let m = g.num_nodes();
    if m > max_nodes {
        return Err(Error::SizeExceeded {
            size: m,
            max_nodes,
        });
    }
    let mut mask = Array1::zeros(max_nodes);
    mask.slice_mut(s![..m]).fill(1.0);
    let mut features = Array2::zeros((max_nodes, g.feature_dim()));
    features.slice_mut(s![..m, ..]).assign(&g.features);
    let mut edges = Array2::zeros((max_nodes, max_nodes));
    edges.slice_mut(s![..m, ..m]).assign(&g.adjacency);
    Ok(PaddedGraph {
        inner: ContinuousGraph {
            mask,
            features,
            edges,
        },
        true_size: m,
    })
}

/// Rounds a continuous graph at 1/2. Kept nodes (mask strictly above 1/2)
/// are moved to the leading slots in their original order; an edge survives
/// when its probability is strictly above 1/2 and both endpoints survive.
pub fn threshold(y: &ContinuousGraph) -> PaddedGraph {
    let size = y.size();
    let kept: Vec<usize> = (0..size).filter(|&i| y.mask[i] > 0.5).collect();
    let m = kept.len();
    let mut mask = Array1::zeros(size);
    let mut features = Array2::zeros((size, y.feature_dim()));
    let mut edges = Array2::zeros((size, size));
    for (new_i, &old_i) in kept.iter().enumerate() {
        mask[new_i] = 1.0;
        features.row_mut(new_i).assign(&y.features.row(old_i));
        for (new_j, &old_j) in kept.iter().enumerate() {
            if new_i != new_j && y.edges[[old_i, old_j]] > 0.5 {
                edges[[new_i, new_j]] = 1.0;
            }
        }
    }
    PaddedGraph {
        inner: ContinuousGraph {
            mask,
            features,
            edges,
        },
        true_size: m,
    }
}

/// Thresholds then unpads.
pub fn decode(y: &ContinuousGraph) -> DiscreteGraph {
    threshold(y).unpad()
}

/// Node relabeling for either graph representation.
pub trait Permute: Sized {
    fn permute(&self, p: &Permutation) -> Result<Self>;
}

fn permute_rows(x: &Array2<f64>, p: &Permutation) -> Array2<f64> {
    x.select(Axis(0), p.as_slice())
}

fn conjugate(a: &Array2<f64>, p: &Permutation) -> Array2<f64> {
    a.select(Axis(0), p.as_slice())
        .select(Axis(1), p.as_slice())
}

fn check_len(expected: usize, p: &Permutation) -> Result<()> {
    if p.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "permutation of length {} applied to {} nodes",
            p.len(),
            expected
        )));
    }
    Ok(())
}

impl Permute for DiscreteGraph {
    fn permute(&self, p: &Permutation) -> Result<Self> {
        check_len(self.num_nodes(), p)?;
        Ok(Self {
            features: permute_rows(&self.features, p),
            adjacency: conjugate(&self.adjacency, p),
        })
    }
}

impl Permute for ContinuousGraph {
    fn permute(&self, p: &Permutation) -> Result<Self> {
        check_len(self.size(), p)?;
        Ok(Self {
            mask: self.mask.select(Axis(0), p.as_slice()),
            features: permute_rows(&self.features, p),
            edges: conjugate(&self.edges, p),
        })
    }
}

/// Convenience wrapper over [`Permute::permute`].
pub fn permute<G: Permute>(g: &G, p: &Permutation) -> Result<G> {
    g.permute(p)
}

/// Replaces node features `F` by `[F, A F]`.
pub fn feature_diffuse(g: &DiscreteGraph) -> DiscreteGraph {
    let diffused = g.adjacency.dot(&g.features);
    DiscreteGraph {
        features: concatenate![Axis(1), g.features, diffused],
        adjacency: g.adjacency.clone(),
    }
}

/// Lifts a discrete graph with `n` nodes to a continuous graph with all
/// slots active.
pub fn to_continuous(g: &DiscreteGraph) -> ContinuousGraph {
    ContinuousGraph {
        mask: Array1::ones(g.num_nodes()),
        features: g.features.clone(),
        edges: g.adjacency.clone(),
    }
}
