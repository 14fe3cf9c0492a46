//! Two-parameter toy family illustrating the non-convex training landscape
//! of the loss next to the piecewise-constant edit distance.
//!
//! The target has two nodes with features `e1`, `e2` joined by an edge,
//! padded to three slots. The prediction `y(a, h)` has mask `(1, h, 1 - h)`,
//! features `(e1, e2, e2)` and edges `A[0,1] = a`, `A[0,2] = 1 - a`. Both
//! `(1, 1)` and `(0, 0)` reproduce the target exactly.

use ndarray::{array, Array2};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{decode, pad, ContinuousGraph, DiscreteGraph, PaddedGraph};
use crate::loss::{pmfgw, LossConfig};
use crate::metrics::{edit_distance, EditConfig};
use crate::solver::SolverOptions;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToyPoint {
    pub a: f64,
    pub h: f64,
    pub train: f64,
    pub eval: f64,
}

/// Squared grounds with weights `(1, 1, 2)` left unnormalized: with two
/// target nodes the structure term then carries unit weight per mismatched
/// edge entry, which makes the landscape equal
/// `min((1 - a)^2 + 2/3 (1 - h)^2, a^2 + 2/3 h^2)`.
pub fn toy_config() -> LossConfig {
    LossConfig {
        normalize_alpha: false,
        ..LossConfig::squared()
            .with_alpha([1.0, 1.0, 2.0])
            .with_solver(SolverOptions::oracle())
    }
}

pub fn toy_target() -> PaddedGraph {
    let g = DiscreteGraph::from_edges(array![[1.0, 0.0], [0.0, 1.0]], &[(0, 1)]).expect("valid toy target");
    pad(&g, 3).expect("fits")
}

pub fn toy_prediction(a: f64, h: f64) -> Result<ContinuousGraph> {
    let mut edges = Array2::zeros((3, 3));
    edges[[0, 1]] = a;
    edges[[1, 0]] = a;
    edges[[0, 2]] = 1.0 - a;
    edges[[2, 0]] = 1.0 - a;
    ContinuousGraph::new(
        array![1.0, h, 1.0 - h],
        array![[1.0, 0.0], [0.0, 1.0], [0.0, 1.0]],
        edges,
    )
}

/// Closed form of the training landscape.
pub fn toy_closed_form(a: f64, h: f64) -> f64 {
    let keep_first = (1.0 - a).powi(2) + 2.0 / 3.0 * (1.0 - h).powi(2);
    let keep_second = a.powi(2) + 2.0 / 3.0 * h.powi(2);
    keep_first.min(keep_second)
}

/// Loss and decoded edit distance at one point of the family.
pub fn toy_point(a: f64, h: f64) -> Result<ToyPoint> {
    let pred = toy_prediction(a, h)?;
    let target = toy_target();
    let train = pmfgw(&pred, &target, &toy_config())?.value;
    let eval = edit_distance(&decode(&pred), &target.unpad(), &EditConfig::default())?.distance as f64;
    Ok(ToyPoint { a, h, train, eval })
}

/// Evaluates the family on a `grid_a x grid_h` grid over `[0, 1]^2`,
/// row-major in `a`.
pub fn toy_landscape(grid_a: usize, grid_h: usize) -> Result<Vec<ToyPoint>> {
    if grid_a < 2 || grid_h < 2 {
        return Err(Error::InvalidConfig("toy grid needs at least 2 points per axis".into()));
    }
    let points: Vec<(f64, f64)> = (0..grid_a)
        .flat_map(|i| {
            (0..grid_h).map(move |j| (i as f64 / (grid_a - 1) as f64, j as f64 / (grid_h - 1) as f64))
        })
        .collect();
    points.into_par_iter().map(|(a, h)| toy_point(a, h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn global_minima() {
        for (a, h) in [(1.0, 1.0), (0.0, 0.0)] {
            let p = toy_point(a, h).unwrap();
            assert!(p.train <= 1e-8, "{p:?}");
            assert_eq!(p.eval, 0.0);
        }
    }

    #[test]
    fn off_diagonal_corners() {
        let p = toy_point(0.0, 1.0).unwrap();
        assert!((p.train - 2.0 / 3.0).abs() < 1e-8);
        assert_eq!(p.eval, 1.0);
    }

    #[test]
    fn small_grid_matches_closed_form() {
        for p in toy_landscape(5, 5).unwrap() {
            assert!((p.train - toy_closed_form(p.a, p.h)).abs() < 1e-6, "{p:?}");
        }
        assert!(toy_landscape(1, 5).is_err());
    }
}
