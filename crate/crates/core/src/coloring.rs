//! Generator for the Coloring benchmark: an L1 Voronoi partition of a square
//! raster, the adjacency graph of its regions and a proper coloring of that
//! graph, paired with the recolored image.

use std::path::Path;

use ndarray::Array2;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::DiscreteGraph;
use crate::io::{write_dataset, Record};

pub const MAX_ATTEMPTS: usize = 100;
pub const COLORING_BUDGET: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Plain,
    Big,
    /// Small instances whose image is emitted as a flat vector.
    Vect,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Variant::Plain),
            "big" => Ok(Variant::Big),
            "vect" => Ok(Variant::Vect),
            other => Err(Error::InvalidConfig(format!("unknown coloring variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColoringParams {
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// Side of the square image in pixels.
    pub resolution: usize,
    pub num_colors: usize,
    pub seed: u64,
}

impl Default for ColoringParams {
    fn default() -> Self {
        Self {
            min_nodes: 6,
            max_nodes: 10,
            resolution: 32,
            num_colors: 4,
            seed: 0,
        }
    }
}

impl ColoringParams {
    pub fn for_variant(variant: Variant) -> Self {
        match variant {
            Variant::Plain => Self::default(),
            Variant::Big => Self {
                min_nodes: 10,
                max_nodes: 15,
                resolution: 64,
                ..Self::default()
            },
            Variant::Vect => Self {
                min_nodes: 4,
                max_nodes: 6,
                resolution: 16,
                ..Self::default()
            },
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_nodes < 1 || self.min_nodes > self.max_nodes {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= min_nodes ({}) <= max_nodes ({})",
                self.min_nodes, self.max_nodes
            )));
        }
        if self.resolution < self.max_nodes {
            return Err(Error::InvalidConfig(format!(
                "resolution {} is below max_nodes {}",
                self.resolution, self.max_nodes
            )));
        }
        if self.num_colors < 4 {
            return Err(Error::InvalidConfig(format!(
                "num_colors {} must be at least 4",
                self.num_colors
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColoringInstance {
    /// Color index of every pixel.
    pub image: Array2<usize>,
    /// Region index of every pixel.
    pub labels: Array2<usize>,
    /// Region graph with one-hot color features, node `i` is region `i`.
    pub graph: DiscreteGraph,
    pub colors: Vec<usize>,
    /// `(x, y)` in the unit square; `x` runs along columns.
    pub centroids: Vec<[f64; 2]>,
}

/// Labels each pixel center with its nearest centroid in L1 distance, ties
/// going to the lowest index.
pub fn voronoi_partition(centroids: &[[f64; 2]], resolution: usize) -> Array2<usize> {
    let h = resolution as f64;
    Array2::from_shape_fn((resolution, resolution), |(row, col)| {
        let x = (col as f64 + 0.5) / h;
        let y = (row as f64 + 0.5) / h;
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, c) in centroids.iter().enumerate() {
            let d = (x - c[0]).abs() + (y - c[1]).abs();
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        best
    })
}

/// Region graph under 4-connectivity, with empty features.
pub fn region_adjacency(labels: &Array2<usize>) -> Result<DiscreteGraph> {
    let m = labels.iter().max().map_or(0, |&x| x + 1);
    let mut present = vec![false; m];
    for &l in labels {
        present[l] = true;
    }
    if let Some(missing) = present.iter().position(|&p| !p) {
        return Err(Error::InvalidGraph(format!("region {missing} has no pixel")));
    }
    let mut adjacency = Array2::zeros((m, m));
    let (rows, cols) = labels.dim();
    for r in 0..rows {
        for c in 0..cols {
            let here = labels[[r, c]];
            let mut link = |other: usize| {
                if other != here {
                    adjacency[[here, other]] = 1.0;
                    adjacency[[other, here]] = 1.0;
                }
            };
            if r + 1 < rows {
                link(labels[[r + 1, c]]);
            }
            if c + 1 < cols {
                link(labels[[r, c + 1]]);
            }
        }
    }
    DiscreteGraph::new(Array2::zeros((m, 0)), adjacency)
}

pub fn is_proper(g: &DiscreteGraph, colors: &[usize]) -> bool {
    let m = g.num_nodes();
    colors.len() == m && (0..m).all(|i| (0..i).all(|j| !g.has_edge(i, j) || colors[i] != colors[j]))
}

pub fn is_connected(g: &DiscreteGraph) -> bool {
    let m = g.num_nodes();
    if m == 0 {
        return true;
    }
    let mut seen = vec![false; m];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..m {
            if g.has_edge(u, v) && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

struct Dsatur<'a, R> {
    g: &'a DiscreteGraph,
    k: usize,
    colors: Vec<Option<usize>>,
    rng: &'a mut R,
    budget: usize,
}

impl<R: Rng> Dsatur<'_, R> {
    fn saturation(&self, u: usize) -> usize {
        let mut seen = vec![false; self.k];
        for v in 0..self.g.num_nodes() {
            if self.g.has_edge(u, v) {
                if let Some(c) = self.colors[v] {
                    seen[c] = true;
                }
            }
        }
        seen.into_iter().filter(|&s| s).count()
    }

    fn uncolored_degree(&self, u: usize) -> usize {
        (0..self.g.num_nodes())
            .filter(|&v| self.g.has_edge(u, v) && self.colors[v].is_none())
            .count()
    }

    fn pick(&mut self) -> Option<usize> {
        let mut best: Vec<usize> = Vec::new();
        let mut best_key = (0, 0);
        for u in 0..self.g.num_nodes() {
            if self.colors[u].is_some() {
                continue;
            }
            let key = (self.saturation(u), self.uncolored_degree(u));
            if best.is_empty() || key > best_key {
                best.clear();
                best_key = key;
            }
            if key == best_key {
                best.push(u);
            }
        }
        best.choose(self.rng).copied()
    }

    fn search(&mut self) -> Option<bool> {
        let Some(u) = self.pick() else {
            return Some(true);
        };
        let mut order: Vec<usize> = (0..self.k).collect();
        order.shuffle(self.rng);
        for c in order {
            let clash = (0..self.g.num_nodes()).any(|v| self.g.has_edge(u, v) && self.colors[v] == Some(c));
            if clash {
                continue;
            }
            if self.budget == 0 {
                return None;
            }
            self.budget -= 1;
            self.colors[u] = Some(c);
            match self.search() {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
        }
        self.colors[u] = None;
        Some(false)
    }
}

/// Random proper coloring with `k` colors by DSATUR-ordered backtracking.
/// Returns `None` when no coloring exists or the search budget runs out.
pub fn proper_coloring<R: Rng + ?Sized>(g: &DiscreteGraph, k: usize, rng: &mut R) -> Option<Vec<usize>> {
    proper_coloring_with_budget(g, k, rng, COLORING_BUDGET)
}

pub fn proper_coloring_with_budget<R: Rng + ?Sized>(
    g: &DiscreteGraph,
    k: usize,
    rng: &mut R,
    budget: usize,
) -> Option<Vec<usize>> {
    let mut rng = rng;
    let mut search = Dsatur {
        g,
        k,
        colors: vec![None; g.num_nodes()],
        rng: &mut rng,
        budget,
    };
    match search.search() {
        Some(true) => Some(search.colors.into_iter().map(|c| c.expect("all colored")).collect()),
        _ => None,
    }
}

fn snapped(c: &[f64; 2], resolution: usize) -> (usize, usize) {
    let h = resolution as f64;
    let cell = |x: f64| ((x * h) as usize).min(resolution - 1);
    (cell(c[0]), cell(c[1]))
}

/// One instance; centroids are redrawn whenever two share a grid cell, a
/// region comes out empty or coloring fails.
pub fn sample_instance<R: Rng + ?Sized>(params: &ColoringParams, rng: &mut R) -> Result<ColoringInstance> {
    params.validate()?;
    let m = rng.random_range(params.min_nodes..=params.max_nodes);
    for _ in 0..MAX_ATTEMPTS {
        let centroids: Vec<[f64; 2]> = (0..m).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let mut cells: Vec<(usize, usize)> = centroids.iter().map(|c| snapped(c, params.resolution)).collect();
        cells.sort_unstable();
        if cells.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let labels = voronoi_partition(&centroids, params.resolution);
        let Ok(regions) = region_adjacency(&labels) else {
            continue;
        };
        if regions.num_nodes() != m || !is_connected(&regions) {
            continue;
        }
        let Some(colors) = proper_coloring(&regions, params.num_colors, rng) else {
            continue;
        };
        let features = Array2::from_shape_fn((m, params.num_colors), |(i, c)| f64::from(u8::from(colors[i] == c)));
        let (_, adjacency) = regions.into_parts();
        let graph = DiscreteGraph::new(features, adjacency)?;
        let image = labels.mapv(|l| colors[l]);
        return Ok(ColoringInstance {
            image,
            labels,
            graph,
            colors,
            centroids,
        });
    }
    Err(Error::GenerationFailed {
        attempts: MAX_ATTEMPTS,
    })
}

/// Random stream of record `index`.
pub fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// `n` instances generated in parallel, in index order.
pub fn generate(n: usize, params: &ColoringParams) -> Result<Vec<ColoringInstance>> {
    params.validate()?;
    (0..n)
        .into_par_iter()
        .map(|i| sample_instance(params, &mut instance_rng(params.seed, i)))
        .collect()
}

/// Image payload of a record: a row-major grid, or a flat vector.
pub fn image_payload(instance: &ColoringInstance, flat: bool) -> Value {
    let pixels: Vec<usize> = instance.image.iter().copied().collect();
    if flat {
        json!({ "vector": pixels })
    } else {
        let (height, width) = instance.image.dim();
        json!({ "height": height, "width": width, "pixels": pixels })
    }
}

pub fn to_record(instance: &ColoringInstance, variant: Variant) -> Record {
    Record::new(instance.graph.clone()).with_input(image_payload(instance, variant == Variant::Vect))
}

/// Writes `n` generated records to `path`; identical inputs give identical
/// bytes.
pub fn generate_dataset(n: usize, params: &ColoringParams, variant: Variant, path: impl AsRef<Path>) -> Result<Vec<ColoringInstance>> {
    if n == 0 {
        return Err(Error::InvalidConfig("dataset size must be at least 1".into()));
    }
    let instances = generate(n, params)?;
    let records: Vec<Record> = instances.iter().map(|i| to_record(i, variant)).collect();
    write_dataset(path, &records)?;
    Ok(instances)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_centroid() {
        let labels = voronoi_partition(&[[0.3, 0.7]], 5);
        assert!(labels.iter().all(|&l| l == 0));
        let g = region_adjacency(&labels).unwrap();
        assert_eq!((g.num_nodes(), g.num_edges()), (1, 0));
    }

    #[test]
    fn mirrored_split_ties_to_first() {
        let labels = voronoi_partition(&[[0.125, 0.5], [0.625, 0.5]], 4);
        for row in labels.rows() {
            assert_eq!(row.to_vec(), vec![0, 0, 1, 1]);
        }
    }

    #[test]
    fn two_pixel_grid() {
        let g = region_adjacency(&array![[0, 1]]).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert!(region_adjacency(&array![[0, 2]]).is_err());
    }

    #[test]
    fn triangle_gets_three_colors() {
        let g = DiscreteGraph::from_edges(Array2::zeros((3, 0)), &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = proper_coloring(&g, 4, &mut rng).unwrap();
        assert!(is_proper(&g, &c));
        let k4 = DiscreteGraph::from_edges(
            Array2::zeros((5, 0)),
            &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)],
        )
        .unwrap();
        assert!(proper_coloring(&k4, 4, &mut rng).is_none());
    }

    #[test]
    fn two_regions_share_an_edge() {
        let params = ColoringParams {
            min_nodes: 2,
            max_nodes: 2,
            resolution: 8,
            ..ColoringParams::default()
        };
        let inst = sample_instance(&params, &mut instance_rng(3, 0)).unwrap();
        assert_eq!(inst.graph.num_edges(), 1);
        assert_ne!(inst.colors[0], inst.colors[1]);
    }

    #[test]
    fn rejects_bad_params() {
        let bad = ColoringParams {
            num_colors: 3,
            ..ColoringParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = ColoringParams {
            resolution: 5,
            ..ColoringParams::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn instance_invariants() {
        for inst in generate(50, &ColoringParams::default()).unwrap() {
            let m = inst.graph.num_nodes();
            assert!((6..=10).contains(&m));
            assert!(is_proper(&inst.graph, &inst.colors));
            assert!(is_connected(&inst.graph));
            for ((r, c), &l) in inst.labels.indexed_iter() {
                assert_eq!(inst.image[[r, c]], inst.colors[l]);
            }
        }
    }
}
