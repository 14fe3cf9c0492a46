//! Partially-masked fused Gromov-Wasserstein (PMFGW) loss between a
//! continuous predicted graph and a padded discrete target, with its
//! conditional gradient solver, exact small-scale oracles, plan-fixed
//! gradients, graph evaluation metrics and the Coloring benchmark generator.

pub mod batch;
pub mod bench;
pub mod coloring;
pub mod error;
pub mod graph;
pub mod ground;
pub mod io;
pub mod loss;
pub mod metrics;
pub mod solver;
pub mod toy;

pub use error::{Error, Result};
pub use graph::{
    decode, feature_diffuse, pad, permute, threshold, to_continuous, ContinuousGraph, DiscreteGraph, PaddedGraph,
    Permutation, Permute,
};
pub use ground::{GroundLoss, LossDecomposition, LossKind};
pub use loss::{
    fgw, gm_exact, grad_check, padded_fgw, partial_fgw, pmfgw, pmfgw_at_plan, pmfgw_batch, pmfgw_general, pmfgw_grad,
    pmfgw_value_and_grad, LossConfig, LossGradient, LossResult,
};
pub use solver::{cg_solve, hungarian, Init, SolverOptions, SolverTrace, TransportPlan};
