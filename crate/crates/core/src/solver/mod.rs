//! Optimal transport machinery: linear assignment, factorized tensor
//! products, the conditional gradient solver and exhaustive oracles.

pub mod brute;
pub mod cg;
pub mod hungarian;
pub mod plan;
pub mod tensor;

pub use brute::{brute_force_min, for_each_permutation, round_to_permutation, MAX_EXHAUSTIVE};
pub use cg::{
    cg_solve, line_search, CgResult, DenseObjective, FactorizedObjective, NaiveObjective,
    QuadraticObjective,
};
pub use hungarian::hungarian;
pub use plan::{Init, SolverOptions, SolverTrace, TransportPlan, MARGINAL_TOL};
pub use tensor::{tensor_product_factorized, tensor_product_naive, FactorizedTensor};
