//! The partially-masked fused Gromov-Wasserstein loss and its relatives.
//!
//! For a prediction `(h^, F^, A^)` over `M` slots and a padded target
//! `(h, F, A)` with `m = |h|_1` real nodes, the loss is the minimum over
//! doubly stochastic `T` of
//!
//! ```text
//!   a_h / M   * sum_ij   T_ij l_h(h^_i, h_j)
//! + a_f / m   * sum_ij   T_ij l_F(f^_i, f_j) h_j
//! + a_A / m^2 * sum_ijkl T_ij T_kl l_A(A^_ik, A_jl) h_j h_l
//! ```
//!
//! The quadratic term goes through [`FactorizedTensor`] with unit predicted
//! weights and target weights `h h^T`, so each solver iteration is `O(M^3)`.
//! Targets with `m = 0` contribute nothing to the feature and structure
//! terms.

use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{pad, to_continuous, ContinuousGraph, DiscreteGraph, PaddedGraph, Permutation};
use crate::ground::{GroundLoss, LossKind};
use crate::solver::{
    brute_force_min, cg_solve, FactorizedObjective, FactorizedTensor, NaiveObjective, QuadraticObjective, SolverOptions,
    SolverTrace, TransportPlan,
};

#[derive(Debug, Clone, PartialEq)]
pub struct LossConfig {
    /// Weights of the node, feature and structure terms.
    pub alpha: [f64; 3],
    pub loss_h: GroundLoss,
    pub loss_f: GroundLoss,
    pub loss_a: GroundLoss,
    /// Rescale `alpha` to sum to one before use.
    pub normalize_alpha: bool,
    pub solver: SolverOptions,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            alpha: [1.0, 1.0, 1.0],
            loss_h: GroundLoss::bce(),
            loss_f: GroundLoss::squared(),
            loss_a: GroundLoss::bce(),
            normalize_alpha: true,
            solver: SolverOptions::default(),
        }
    }
}

impl LossConfig {
    /// Squared ground loss on all three terms.
    pub fn squared() -> Self {
        Self {
            loss_h: GroundLoss::squared(),
            loss_f: GroundLoss::squared(),
            loss_a: GroundLoss::squared(),
            ..Self::default()
        }
    }

    pub fn with_alpha(mut self, alpha: [f64; 3]) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.solver = solver;
        self
    }

    /// The weights actually applied: validated, and rescaled onto the
    /// simplex when `normalize_alpha` is set.
    pub fn effective_alpha(&self) -> Result<[f64; 3]> {
        if self.alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha {:?} must be finite and nonnegative",
                self.alpha
            )));
        }
        if !self.normalize_alpha {
            return Ok(self.alpha);
        }
        let total: f64 = self.alpha.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidConfig("alpha sums to zero".into()));
        }
        Ok(self.alpha.map(|a| a / total))
    }

    pub fn validate(&self) -> Result<()> {
        self.effective_alpha()?;
        self.solver.validate()?;
        if self.loss_h.kind() == LossKind::SoftmaxCrossEntropy {
            return Err(Error::InvalidConfig("node loss cannot be softmax-ce".into()));
        }
        self.loss_a.decompose()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LossResult {
    pub value: f64,
    pub term_h: f64,
    pub term_f: f64,
    pub term_a: f64,
    /// Weights used, after normalization.
    pub alpha: [f64; 3],
    pub plan: TransportPlan,
    pub trace: SolverTrace,
}

impl LossResult {
    /// `alpha . (term_h, term_f, term_a)`.
    pub fn weighted_terms(&self) -> f64 {
        self.alpha[0] * self.term_h + self.alpha[1] * self.term_f + self.alpha[2] * self.term_a
    }

    /// First `m` columns of the plan: the coupling of every predicted slot
    /// with the real target nodes.
    pub fn partial_plan(&self, m: usize) -> Array2<f64> {
        self.plan.matrix().slice(ndarray::s![.., ..m]).to_owned()
    }
}

/// Gradient of the objective with respect to the prediction at a fixed plan.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient {
    pub d_mask: Array1<f64>,
    pub d_features: Array2<f64>,
    pub d_edges: Array2<f64>,
}

/// Assembled objective for one (prediction, target) pair.
struct Instance {
    objective: FactorizedObjective,
    /// `l_h(h^_i, h_j)`.
    node_cost: Array2<f64>,
    /// `l_F(f^_i, f_j) h_j`.
    feature_cost: Array2<f64>,
    size: usize,
    mass: f64,
    alpha: [f64; 3],
}

fn check_pair(pred: &ContinuousGraph, target: &ContinuousGraph) -> Result<()> {
    if pred.size() != target.size() {
        return Err(Error::DimensionMismatch(format!(
            "prediction has {} slots, target {}",
            pred.size(),
            target.size()
        )));
    }
    if pred.feature_dim() != target.feature_dim() {
        return Err(Error::DimensionMismatch(format!(
            "prediction features have dimension {}, target {}",
            pred.feature_dim(),
            target.feature_dim()
        )));
    }
    Ok(())
}

fn inv_or_zero(x: f64) -> f64 {
    if x > 0.0 {
        1.0 / x
    } else {
        0.0
    }
}

impl Instance {
    fn build(pred: &ContinuousGraph, target: &ContinuousGraph, cfg: &LossConfig) -> Result<Self> {
        cfg.validate()?;
        check_pair(pred, target)?;
        let alpha = cfg.effective_alpha()?;
        let size = pred.size();
        let h = target.mask();
        let mass: f64 = h.sum();

        let node_cost = Array2::from_shape_fn((size, size), |(i, j)| cfg.loss_h.eval(pred.mask()[i], h[j]));
        let mut feature_cost = Array2::zeros((size, size));
        for i in 0..size {
            for j in 0..size {
                if h[j] != 0.0 {
                    feature_cost[[i, j]] =
                        cfg.loss_f.eval_vec(pred.features().row(i), target.features().row(j))? * h[j];
                }
            }
        }

        let inv_size = inv_or_zero(size as f64);
        let inv_mass = inv_or_zero(mass);
        let linear = &node_cost * (alpha[0] * inv_size) + &feature_cost * (alpha[1] * inv_mass);

        let dec = cfg.loss_a.decompose()?;
        let hcol = h.view().insert_axis(Axis(1));
        let target_weights = hcol.dot(&hcol.t());
        let tensor = FactorizedTensor::new(
            &dec,
            pred.edges(),
            target.edges(),
            &Array2::ones((size, size)),
            &target_weights,
        )?;
        let objective = FactorizedObjective::new(linear, tensor, alpha[2] * inv_mass * inv_mass)?;
        Ok(Self {
            objective,
            node_cost,
            feature_cost,
            size,
            mass,
            alpha,
        })
    }

    fn result(&self, plan: TransportPlan, trace: SolverTrace) -> LossResult {
        let t = plan.matrix();
        let dot = |a: &Array2<f64>| -> f64 { a.iter().zip(t.iter()).map(|(x, y)| x * y).sum() };
        let term_h = dot(&self.node_cost) * inv_or_zero(self.size as f64);
        let term_f = dot(&self.feature_cost) * inv_or_zero(self.mass);
        let inv_mass = inv_or_zero(self.mass);
        let term_a = if inv_mass > 0.0 {
            dot(&self.objective.tensor().apply_unchecked(t)) * inv_mass * inv_mass
        } else {
            0.0
        };
        let mut result = LossResult {
            value: 0.0,
            term_h,
            term_f,
            term_a,
            alpha: self.alpha,
            plan,
            trace,
        };
        result.value = result.weighted_terms();
        result
    }
}

/// Loss between a prediction and a target whose mask need not be a padded
/// block; `m` is the mask total. Padded slots (zero mask) never enter the
/// feature and structure terms.
pub fn pmfgw_general(pred: &ContinuousGraph, target: &ContinuousGraph, cfg: &LossConfig) -> Result<LossResult> {
    let inst = Instance::build(pred, target, cfg)?;
    let solved = cg_solve(&inst.objective, &cfg.solver)?;
    Ok(inst.result(solved.plan, solved.trace))
}

/// Loss between a continuous prediction and a padded target.
pub fn pmfgw(pred: &ContinuousGraph, target: &PaddedGraph, cfg: &LossConfig) -> Result<LossResult> {
    pmfgw_general(pred, target.as_continuous(), cfg)
}

/// Objective value and term breakdown at a given plan, without solving.
pub fn pmfgw_at_plan(
    pred: &ContinuousGraph,
    target: &ContinuousGraph,
    cfg: &LossConfig,
    plan: &TransportPlan,
) -> Result<LossResult> {
    let inst = Instance::build(pred, target, cfg)?;
    if plan.size() != inst.size {
        return Err(Error::InfeasiblePlan(format!(
            "plan of size {} for {} slots",
            plan.size(),
            inst.size
        )));
    }
    Ok(inst.result(plan.clone(), SolverTrace::default()))
}

/// Exact minimum of the objective over permutations (`M <= 8`).
pub fn pmfgw_exhaustive(pred: &ContinuousGraph, target: &ContinuousGraph, cfg: &LossConfig) -> Result<(Permutation, f64)> {
    let inst = Instance::build(pred, target, cfg)?;
    brute_force_min(&inst.objective)
}

/// Partial derivatives of the objective with respect to the prediction,
/// holding `plan` fixed.
pub fn pmfgw_grad(
    pred: &ContinuousGraph,
    target: &PaddedGraph,
    cfg: &LossConfig,
    plan: &TransportPlan,
) -> Result<LossGradient> {
    pmfgw_grad_general(pred, target.as_continuous(), cfg, plan)
}

pub fn pmfgw_grad_general(
    pred: &ContinuousGraph,
    target: &ContinuousGraph,
    cfg: &LossConfig,
    plan: &TransportPlan,
) -> Result<LossGradient> {
    cfg.validate()?;
    check_pair(pred, target)?;
    let size = pred.size();
    // Re-check feasibility: the plan may come from outside.
    let plan = TransportPlan::new(plan.matrix().clone())?;
    if plan.size() != size {
        return Err(Error::InfeasiblePlan(format!("plan of size {} for {size} slots", plan.size())));
    }
    let t = plan.matrix();
    let alpha = cfg.effective_alpha()?;
    let h = target.mask();
    let mass: f64 = h.sum();
    let inv_size = inv_or_zero(size as f64);
    let inv_mass = inv_or_zero(mass);

    let mut d_mask = Array1::zeros(size);
    for i in 0..size {
        d_mask[i] = alpha[0]
            * inv_size
            * (0..size)
                .map(|j| t[[i, j]] * cfg.loss_h.grad(pred.mask()[i], h[j]))
                .sum::<f64>();
    }

    let dim = pred.feature_dim();
    let mut d_features = Array2::zeros((size, dim));
    if inv_mass > 0.0 {
        for i in 0..size {
            let mut row = vec![0.0; dim];
            for j in 0..size {
                let w = t[[i, j]] * h[j];
                if w != 0.0 {
                    cfg.loss_f
                        .grad_vec_into(pred.features().row(i), target.features().row(j), w, &mut row)?;
                }
            }
            for (k, v) in row.into_iter().enumerate() {
                d_features[[i, k]] = alpha[1] * inv_mass * v;
            }
        }
    }

    let mut d_edges = Array2::zeros((size, size));
    if inv_mass > 0.0 {
        let dec = cfg.loss_a.decompose()?;
        let hcol = h.view().insert_axis(Axis(1));
        let target_weights = hcol.dot(&hcol.t());
        let cross = target.edges().mapv(|b| dec.h2(b)) * &target_weights;
        let direct = t.dot(&target_weights).dot(&t.t());
        let mixed = t.dot(&cross).dot(&t.t());
        let scale = alpha[2] * inv_mass * inv_mass;
        for i in 0..size {
            for k in 0..size {
                let a = pred.edges()[[i, k]];
                d_edges[[i, k]] = scale * (dec.df1(a) * direct[[i, k]] - dec.dh1(a) * mixed[[i, k]]);
            }
        }
        // Exact symmetry up to rounding: symmetrize explicitly.
        let sym = (&d_edges + &d_edges.t()) * 0.5;
        d_edges = sym;
    }

    Ok(LossGradient {
        d_mask,
        d_features,
        d_edges,
    })
}

/// Largest relative gap `|g - fd| / max(|g|, |fd|, 1e-6)` between the
/// analytic gradient and central differences of the objective at `plan`.
/// Edge entries are perturbed symmetrically, so off-diagonal differences
/// are compared with twice the reported gradient.
pub fn grad_check(
    pred: &ContinuousGraph,
    target: &ContinuousGraph,
    cfg: &LossConfig,
    plan: &TransportPlan,
    step: f64,
) -> Result<f64> {
    let grad = pmfgw_grad_general(pred, target, cfg, plan)?;
    let value = |mask: Array1<f64>, features: Array2<f64>, edges: Array2<f64>| -> Result<f64> {
        let p = ContinuousGraph::new(mask, features, edges)?;
        Ok(pmfgw_at_plan(&p, target, cfg, plan)?.value)
    };
    let rel = |analytic: f64, fd: f64| (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-6);
    let (mask, features, edges) = (pred.mask(), pred.features(), pred.edges());
    let mut worst: f64 = 0.0;
    for i in 0..pred.size() {
        let mut up = mask.clone();
        let mut down = mask.clone();
        up[i] += step;
        down[i] -= step;
        let fd = (value(up, features.clone(), edges.clone())? - value(down, features.clone(), edges.clone())?) / (2.0 * step);
        worst = worst.max(rel(grad.d_mask[i], fd));
        for k in 0..pred.feature_dim() {
            let mut up = features.clone();
            let mut down = features.clone();
            up[[i, k]] += step;
            down[[i, k]] -= step;
            let fd = (value(mask.clone(), up, edges.clone())? - value(mask.clone(), down, edges.clone())?) / (2.0 * step);
            worst = worst.max(rel(grad.d_features[[i, k]], fd));
        }
        for k in i..pred.size() {
            let mut up = edges.clone();
            let mut down = edges.clone();
            up[[i, k]] += step;
            down[[i, k]] -= step;
            if k != i {
                up[[k, i]] += step;
                down[[k, i]] -= step;
            }
            let fd = (value(mask.clone(), features.clone(), up)? - value(mask.clone(), features.clone(), down)?) / (2.0 * step);
            let factor = if k == i { 1.0 } else { 2.0 };
            worst = worst.max(rel(factor * grad.d_edges[[i, k]], fd));
        }
    }
    Ok(worst)
}

/// Loss value and plan-fixed gradient in one pass.
pub fn pmfgw_value_and_grad(
    pred: &ContinuousGraph,
    target: &PaddedGraph,
    cfg: &LossConfig,
) -> Result<(LossResult, LossGradient)> {
    let result = pmfgw(pred, target, cfg)?;
    let grad = pmfgw_grad(pred, target, cfg, &result.plan)?;
    Ok((result, grad))
}

/// Evaluates independent pairs in parallel; results follow input order.
pub fn pmfgw_batch(
    preds: &[ContinuousGraph],
    targets: &[PaddedGraph],
    cfg: &LossConfig,
) -> Result<Vec<LossResult>> {
    if preds.len() != targets.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} targets",
            preds.len(),
            targets.len()
        )));
    }
    preds
        .par_iter()
        .zip(targets.par_iter())
        .enumerate()
        .map(|(index, (p, t))| {
            pmfgw(p, t, cfg).map_err(|e| Error::BatchItem {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Fused Gromov-Wasserstein between two graphs of equal size, without
/// size normalization: `a_f sum T l_F + a_A sum T T l_A`.
pub fn fgw(g1: &DiscreteGraph, g2: &DiscreteGraph, cfg: &LossConfig) -> Result<LossResult> {
    let inst = fgw_instance(g1, g2, cfg)?;
    let solved = cg_solve(&inst.objective, &cfg.solver)?;
    Ok(inst.result(solved.plan, solved.trace))
}

/// Exact graph matching over permutations for the same objective as
/// [`fgw`] (`m <= 8`).
pub fn gm_exact(g1: &DiscreteGraph, g2: &DiscreteGraph, cfg: &LossConfig) -> Result<(Permutation, f64)> {
    let inst = fgw_instance(g1, g2, cfg)?;
    brute_force_min(&inst.objective)
}

struct FgwInstance {
    objective: FactorizedObjective,
    feature_cost: Array2<f64>,
    alpha: [f64; 3],
}

impl FgwInstance {
    fn result(&self, plan: TransportPlan, trace: SolverTrace) -> LossResult {
        let t = plan.matrix();
        let term_f: f64 = self.feature_cost.iter().zip(t.iter()).map(|(x, y)| x * y).sum();
        let lt = self.objective.tensor().apply_unchecked(t);
        let term_a: f64 = lt.iter().zip(t.iter()).map(|(x, y)| x * y).sum();
        let mut r = LossResult {
            value: 0.0,
            term_h: 0.0,
            term_f,
            term_a,
            alpha: self.alpha,
            plan,
            trace,
        };
        r.value = r.weighted_terms();
        r
    }
}

fn fgw_instance(g1: &DiscreteGraph, g2: &DiscreteGraph, cfg: &LossConfig) -> Result<FgwInstance> {
    cfg.validate()?;
    let m = g1.num_nodes();
    if g2.num_nodes() != m {
        return Err(Error::DimensionMismatch(format!(
            "graphs have {} and {} nodes",
            m,
            g2.num_nodes()
        )));
    }
    if g1.feature_dim() != g2.feature_dim() {
        return Err(Error::DimensionMismatch("feature dimensions differ".into()));
    }
    let alpha = cfg.effective_alpha()?;
    let mut feature_cost = Array2::zeros((m, m));
    for i in 0..m {
        for j in 0..m {
            feature_cost[[i, j]] = cfg.loss_f.eval_vec(g1.features().row(i), g2.features().row(j))?;
        }
    }
    let ones = Array2::ones((m, m));
    let tensor = FactorizedTensor::new(&cfg.loss_a.decompose()?, g1.adjacency(), g2.adjacency(), &ones, &ones)?;
    let objective = FactorizedObjective::new(&feature_cost * alpha[1], tensor, alpha[2])?;
    Ok(FgwInstance {
        objective,
        feature_cost,
        alpha,
    })
}

/// The masked objective with a zero node loss, so that only the feature and
/// structure terms remain.
pub fn padded_fgw(pred: &ContinuousGraph, target: &ContinuousGraph, cfg: &LossConfig) -> Result<LossResult> {
    let cfg = LossConfig {
        loss_h: GroundLoss::constant(0.0),
        ..cfg.clone()
    };
    pmfgw_general(pred, target, &cfg)
}

/// Partial fused Gromov-Wasserstein: matches `small` to a subgraph of `big`
/// by padding `small` to the size of `big`. The first `m` columns of the
/// returned plan form the partial coupling.
pub fn partial_fgw(big: &DiscreteGraph, small: &DiscreteGraph, cfg: &LossConfig) -> Result<LossResult> {
    if small.num_nodes() > big.num_nodes() {
        return Err(Error::SizeExceeded {
            size: small.num_nodes(),
            max_nodes: big.num_nodes(),
        });
    }
    let target = pad(small, big.num_nodes())?;
    padded_fgw(&to_continuous(big), target.as_continuous(), cfg)
}

/// Dense assembled objective for a pair, exposed for oracle comparisons.
pub fn pmfgw_objective(
    pred: &ContinuousGraph,
    target: &ContinuousGraph,
    cfg: &LossConfig,
) -> Result<impl QuadraticObjective> {
    Ok(Instance::build(pred, target, cfg)?.objective)
}

/// The same objective with the structure tensor evaluated by the quadruple
/// sum, for timing and cross-checks.
pub fn pmfgw_naive_objective(
    pred: &ContinuousGraph,
    target: &ContinuousGraph,
    cfg: &LossConfig,
) -> Result<NaiveObjective> {
    let inst = Instance::build(pred, target, cfg)?;
    let size = inst.size;
    let hcol = target.mask().view().insert_axis(Axis(1));
    NaiveObjective::new(
        inst.objective.linear_cost().clone(),
        cfg.loss_a,
        pred.edges().clone(),
        target.edges().clone(),
        Array2::ones((size, size)),
        hcol.dot(&hcol.t()),
        inst.objective.scale(),
    )
}
