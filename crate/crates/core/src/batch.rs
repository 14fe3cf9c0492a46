//! Flat-buffer batch interface for foreign callers.
//!
//! Every graph is passed as three contiguous row-major `f64` slices: mask
//! (`M`), features (`M x d`) and edges (`M x M`). All items of a batch share
//! `M` and `d`. Items are evaluated in parallel and returned in input order.

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::ContinuousGraph;
use crate::ground::GroundLoss;
use crate::loss::{pmfgw_general, pmfgw_grad_general, LossConfig};
use crate::solver::SolverOptions;

pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

#[derive(Debug, Clone, Copy)]
pub struct GraphBuffer<'a> {
    pub mask: &'a [f64],
    pub features: &'a [f64],
    pub edges: &'a [f64],
}

impl<'a> GraphBuffer<'a> {
    pub fn new(mask: &'a [f64], features: &'a [f64], edges: &'a [f64]) -> Self {
        Self { mask, features, edges }
    }

    fn to_graph(self, max_nodes: usize, feature_dim: usize) -> Result<ContinuousGraph> {
        let expect = |name: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Error::DimensionMismatch(format!("{name} buffer has {got} values, expected {want}")))
            }
        };
        expect("mask", self.mask.len(), max_nodes)?;
        expect("features", self.features.len(), max_nodes * feature_dim)?;
        expect("edges", self.edges.len(), max_nodes * max_nodes)?;
        if let Some(bad) = [self.mask, self.features, self.edges].iter().flat_map(|s| s.iter()).find(|x| !x.is_finite()) {
            return Err(Error::InvalidGraph(format!("non-finite value {bad}")));
        }
        ContinuousGraph::new(
            Array1::from(self.mask.to_vec()),
            Array2::from_shape_vec((max_nodes, feature_dim), self.features.to_vec()).expect("length checked"),
            Array2::from_shape_vec((max_nodes, max_nodes), self.edges.to_vec()).expect("length checked"),
        )
    }
}

/// Gradient of one item, row-major like the inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBuffer {
    pub d_mask: Vec<f64>,
    pub d_features: Vec<f64>,
    pub d_edges: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BatchRequest<'a> {
    pub max_nodes: usize,
    pub feature_dim: usize,
    pub predictions: Vec<GraphBuffer<'a>>,
    pub targets: Vec<GraphBuffer<'a>>,
    pub config: LossConfig,
}

/// Loss configuration from plain scalars and loss names
/// (`"l2"`, `"bce"`, `"softmax-ce"`).
#[allow(clippy::too_many_arguments)]
pub fn config_from_scalars(
    alpha: [f64; 3],
    loss_h: &str,
    loss_f: &str,
    loss_a: &str,
    normalize_alpha: bool,
    max_iterations: usize,
    relative_tolerance: f64,
    restarts: usize,
    seed: u64,
) -> Result<LossConfig> {
    let cfg = LossConfig {
        alpha,
        loss_h: loss_h.parse::<GroundLoss>()?,
        loss_f: loss_f.parse::<GroundLoss>()?,
        loss_a: loss_a.parse::<GroundLoss>()?,
        normalize_alpha,
        solver: SolverOptions {
            max_iterations,
            relative_tolerance,
            restarts,
            seed,
            ..SolverOptions::default()
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn item_graphs(req: &BatchRequest, i: usize) -> Result<(ContinuousGraph, ContinuousGraph)> {
    let pred = req.predictions[i].to_graph(req.max_nodes, req.feature_dim)?;
    let target = req.targets[i].to_graph(req.max_nodes, req.feature_dim)?;
    Ok((pred, target))
}

fn run<T: Send>(req: &BatchRequest, f: impl Fn(&ContinuousGraph, &ContinuousGraph) -> Result<T> + Sync) -> Result<Vec<T>> {
    req.config.validate()?;
    if req.predictions.len() != req.targets.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} targets",
            req.predictions.len(),
            req.targets.len()
        )));
    }
    (0..req.predictions.len())
        .into_par_iter()
        .map(|i| {
            item_graphs(req, i)
                .and_then(|(p, t)| f(&p, &t))
                .map_err(|e| Error::BatchItem {
                    index: i,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// Loss values and plan-fixed gradients of every item.
pub fn loss_and_grad(req: &BatchRequest) -> Result<(Vec<f64>, Vec<GradientBuffer>)> {
    let items = run(req, |p, t| {
        let result = pmfgw_general(p, t, &req.config)?;
        let g = pmfgw_grad_general(p, t, &req.config, &result.plan)?;
        Ok((
            result.value,
            GradientBuffer {
                d_mask: g.d_mask.to_vec(),
                d_features: g.d_features.iter().copied().collect(),
                d_edges: g.d_edges.iter().copied().collect(),
            },
        ))
    })?;
    Ok(items.into_iter().unzip())
}

pub fn loss_only(req: &BatchRequest) -> Result<Vec<f64>> {
    run(req, |p, t| Ok(pmfgw_general(p, t, &req.config)?.value))
}
