//! Conditional gradient (Frank-Wolfe) over the Birkhoff polytope for
//! objectives `<T, C> + <T, L ⊗ T>`.
//!
//! Each step linearizes the objective at the current plan, solves the
//! resulting assignment problem for a vertex, and moves toward it with an
//! exact line search on the one-dimensional quadratic.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::hungarian;
use super::plan::{Init, SolverOptions, SolverTrace, TransportPlan};
use super::tensor::FactorizedTensor;
use crate::error::{Error, Result};
use crate::ground::GroundLoss;

/// Linear-plus-quadratic objective over square transport plans.
pub trait QuadraticObjective: Sync {
    fn size(&self) -> usize;

    fn linear_cost(&self) -> &Array2<f64>;

    /// `L ⊗ T`.
    fn tensor_apply(&self, t: &Array2<f64>) -> Array2<f64>;

    /// `L^T ⊗ T`; equals [`QuadraticObjective::tensor_apply`] for symmetric
    /// tensors.
    fn tensor_apply_adjoint(&self, t: &Array2<f64>) -> Array2<f64>;

    fn is_symmetric(&self) -> bool;

    fn value(&self, t: &Array2<f64>) -> f64 {
        frobenius(t, self.linear_cost()) + frobenius(t, &self.tensor_apply(t))
    }

    /// `C + (L + L^T) ⊗ T`.
    fn gradient(&self, t: &Array2<f64>) -> Array2<f64> {
        let lt = self.tensor_apply(t);
        let mut g = self.linear_cost().clone();
        if self.is_symmetric() {
            g.scaled_add(2.0, &lt);
        } else {
            g += &lt;
            g += &self.tensor_apply_adjoint(t);
        }
        g
    }
}

pub(crate) fn frobenius(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Objective with a factorized structure tensor scaled by `scale`.
#[derive(Debug, Clone)]
pub struct FactorizedObjective {
    linear: Array2<f64>,
    tensor: FactorizedTensor,
    scale: f64,
}

impl FactorizedObjective {
    pub fn new(linear: Array2<f64>, tensor: FactorizedTensor, scale: f64) -> Result<Self> {
        let n = linear.nrows();
        if linear.ncols() != n || tensor.pred_size() != n || tensor.target_size() != n {
            return Err(Error::DimensionMismatch(format!(
                "linear cost {}x{} with a {}x{} tensor",
                n,
                linear.ncols(),
                tensor.pred_size(),
                tensor.target_size()
            )));
        }
        Ok(Self {
            linear,
            tensor,
            scale,
        })
    }

    pub fn tensor(&self) -> &FactorizedTensor {
        &self.tensor
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl QuadraticObjective for FactorizedObjective {
    fn size(&self) -> usize {
        self.linear.nrows()
    }

    fn linear_cost(&self) -> &Array2<f64> {
        &self.linear
    }

    fn tensor_apply(&self, t: &Array2<f64>) -> Array2<f64> {
        let mut out = self.tensor.apply_unchecked(t);
        out *= self.scale;
        out
    }

    fn tensor_apply_adjoint(&self, t: &Array2<f64>) -> Array2<f64> {
        let mut out = self.tensor.apply_adjoint_unchecked(t);
        out *= self.scale;
        out
    }

    fn is_symmetric(&self) -> bool {
        self.tensor.is_symmetric()
    }
}

/// Same objective as [`FactorizedObjective`] but evaluating the tensor
/// product by the quadruple sum. Reference path for timing and tests.
#[derive(Debug, Clone)]
pub struct NaiveObjective {
    linear: Array2<f64>,
    loss: GroundLoss,
    a_pred: Array2<f64>,
    a_tgt: Array2<f64>,
    w_pred: Array2<f64>,
    w_tgt: Array2<f64>,
    scale: f64,
}

impl NaiveObjective {
    pub fn new(
        linear: Array2<f64>,
        loss: GroundLoss,
        a_pred: Array2<f64>,
        a_tgt: Array2<f64>,
        w_pred: Array2<f64>,
        w_tgt: Array2<f64>,
        scale: f64,
    ) -> Result<Self> {
        let n = linear.nrows();
        for (name, m) in [
            ("linear cost", &linear),
            ("predicted structure", &a_pred),
            ("target structure", &a_tgt),
            ("predicted weights", &w_pred),
            ("target weights", &w_tgt),
        ] {
            if m.dim() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self {
            linear,
            loss,
            a_pred,
            a_tgt,
            w_pred,
            w_tgt,
            scale,
        })
    }

    fn product(&self, a: &Array2<f64>, b: &Array2<f64>, w: &Array2<f64>, wp: &Array2<f64>, t: &Array2<f64>) -> Array2<f64> {
        let mut out = super::tensor::tensor_product_naive(&self.loss, a, b, w, wp, t)
            .expect("shapes checked at construction");
        out *= self.scale;
        out
    }
}

impl QuadraticObjective for NaiveObjective {
    fn size(&self) -> usize {
        self.linear.nrows()
    }

    fn linear_cost(&self) -> &Array2<f64> {
        &self.linear
    }

    fn tensor_apply(&self, t: &Array2<f64>) -> Array2<f64> {
        self.product(&self.a_pred, &self.a_tgt, &self.w_pred, &self.w_tgt, t)
    }

    fn tensor_apply_adjoint(&self, t: &Array2<f64>) -> Array2<f64> {
        self.product(
            &self.a_pred.t().to_owned(),
            &self.a_tgt.t().to_owned(),
            &self.w_pred.t().to_owned(),
            &self.w_tgt.t().to_owned(),
            t,
        )
    }

    fn is_symmetric(&self) -> bool {
        false
    }
}

/// Objective with an explicit `n^4` tensor, `tensor[((i * n + j) * n + k) * n + l] = L[i, j, k, l]`
/// so that `(L ⊗ T)[i, j] = sum_{k, l} L[i, j, k, l] T[k, l]`.
#[derive(Debug, Clone)]
pub struct DenseObjective {
    linear: Array2<f64>,
    tensor: Vec<f64>,
    symmetric: bool,
}

impl DenseObjective {
    pub fn new(linear: Array2<f64>, tensor: Vec<f64>) -> Result<Self> {
        let n = linear.nrows();
        if linear.ncols() != n || tensor.len() != n * n * n * n {
            return Err(Error::DimensionMismatch(format!(
                "dense tensor of length {} for size {n}",
                tensor.len()
            )));
        }
        let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
        let mut symmetric = true;
        'outer: for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        if tensor[idx(i, j, k, l)] != tensor[idx(k, l, i, j)] {
                            symmetric = false;
                            break 'outer;
                        }
                    }
                }
            }
        }
        Ok(Self {
            linear,
            tensor,
            symmetric,
        })
    }

    fn contract(&self, t: &Array2<f64>, swap: bool) -> Array2<f64> {
        let n = self.linear.nrows();
        Array2::from_shape_fn((n, n), |(i, j)| {
            let mut acc = 0.0;
            for k in 0..n {
                for l in 0..n {
                    let idx = if swap {
                        ((k * n + l) * n + i) * n + j
                    } else {
                        ((i * n + j) * n + k) * n + l
                    };
                    acc += self.tensor[idx] * t[[k, l]];
                }
            }
            acc
        })
    }
}

impl QuadraticObjective for DenseObjective {
    fn size(&self) -> usize {
        self.linear.nrows()
    }

    fn linear_cost(&self) -> &Array2<f64> {
        &self.linear
    }

    fn tensor_apply(&self, t: &Array2<f64>) -> Array2<f64> {
        self.contract(t, false)
    }

    fn tensor_apply_adjoint(&self, t: &Array2<f64>) -> Array2<f64> {
        self.contract(t, true)
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// Minimizer over `[0, 1]` of `phi(t) = phi(0) + b t + a t^2`.
pub fn line_search(a: f64, b: f64) -> f64 {
    if a > 0.0 {
        (-b / (2.0 * a)).clamp(0.0, 1.0)
    } else if a + b < 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Output of [`cg_solve`].
#[derive(Debug, Clone)]
pub struct CgResult {
    pub plan: TransportPlan,
    pub value: f64,
    pub trace: SolverTrace,
}

fn initial_plan(opts: &SolverOptions, n: usize, restart: usize) -> Result<TransportPlan> {
    let init = if restart == 0 { &opts.init } else { &Init::Random };
    match init {
        Init::Uniform => Ok(TransportPlan::uniform(n)),
        Init::Given(plan) => {
            if plan.size() != n {
                return Err(Error::DimensionMismatch(format!(
                    "initial plan of size {} for a problem of size {n}",
                    plan.size()
                )));
            }
            Ok(plan.clone())
        }
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(restart as u64);
            Ok(TransportPlan::random(n, &mut rng))
        }
    }
}

fn run_once<O: QuadraticObjective + ?Sized>(obj: &O, opts: &SolverOptions, start: TransportPlan) -> CgResult {
    let mut t = start.into_matrix();
    let mut f = obj.value(&t);
    let mut trace = SolverTrace {
        objectives: vec![f],
        ..SolverTrace::default()
    };

    for _ in 0..opts.max_iterations {
        let grad = obj.gradient(&t);
        let vertex = hungarian::solve(&grad);
        let mut direction = -&t;
        for (i, &j) in vertex.iter().enumerate() {
            direction[[i, j]] += 1.0;
        }
        let slope = frobenius(&direction, &grad);
        // Frank-Wolfe gap is -slope; nothing left to gain along any vertex.
        if -slope <= 1e-13 * f.abs().max(1.0) {
            break;
        }
        let curvature = frobenius(&direction, &obj.tensor_apply(&direction));
        let step = line_search(curvature, slope);
        if step <= 0.0 {
            break;
        }
        t.scaled_add(step, &direction);
        let next = f + step * slope + step * step * curvature;
        trace.objectives.push(next);
        trace.step_sizes.push(step);
        trace.iterations += 1;
        let decrease = f - next;
        f = next;
        if decrease <= opts.relative_tolerance * f.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }

    let value = obj.value(&t);
    CgResult {
        plan: TransportPlan::new_unchecked(t),
        value,
        trace,
    }
}

/// Runs conditional gradient from each restart's initial plan and keeps the
/// lowest value (earliest restart on ties). Restart 0 starts from
/// `opts.init`; later restarts start from random plans seeded by
/// `(opts.seed, restart)`.
pub fn cg_solve<O: QuadraticObjective + ?Sized>(obj: &O, opts: &SolverOptions) -> Result<CgResult> {
    opts.validate()?;
    let n = obj.size();
    let starts = (0..opts.restarts)
        .map(|r| initial_plan(opts, n, r))
        .collect::<Result<Vec<_>>>()?;
    let runs: Vec<CgResult> = if opts.restarts > 1 {
        starts
            .into_par_iter()
            .map(|start| run_once(obj, opts, start))
            .collect()
    } else {
        starts.into_iter().map(|start| run_once(obj, opts, start)).collect()
    };
    let (best_index, _) = runs
        .iter()
        .enumerate()
        .fold((0usize, f64::INFINITY), |(bi, bv), (i, r)| {
            if r.value < bv {
                (i, r.value)
            } else {
                (bi, bv)
            }
        });
    let mut best = runs.into_iter().nth(best_index).expect("at least one restart");
    best.trace.restart = best_index;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::brute::brute_force_min;
    use ndarray::array;
    use rand::Rng;

    fn random_dense(n: usize, rng: &mut ChaCha8Rng, symmetric: bool) -> DenseObjective {
        let linear = Array2::from_shape_fn((n, n), |_| rng.random_range(0.0..1.0));
        let mut tensor: Vec<f64> = (0..n.pow(4)).map(|_| rng.random_range(-0.5..1.0)).collect();
        if symmetric {
            let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            tensor[idx(k, l, i, j)] = tensor[idx(i, j, k, l)];
                        }
                    }
                }
            }
        }
        DenseObjective::new(linear, tensor).unwrap()
    }

    #[test]
    fn line_search_matches_grid() {
        let cases = [(1.0, -0.5), (1.0, -3.0), (1.0, 0.5), (-1.0, 0.5), (-1.0, 0.9), (0.0, -1.0), (0.0, 1.0), (-2.0, 1.5)];
        for (a, b) in cases {
            let t = line_search(a, b);
            let phi = |x: f64| b * x + a * x * x;
            for k in 0..=100 {
                let x = k as f64 / 100.0;
                assert!(phi(t) <= phi(x) + 1e-15, "a={a} b={b} t={t} x={x}");
            }
        }
    }

    #[test]
    fn linear_problem_converges_in_one_step() {
        let linear = array![[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]];
        let obj = DenseObjective::new(linear.clone(), vec![0.0; 81]).unwrap();
        let res = cg_solve(&obj, &SolverOptions::default()).unwrap();
        let (p, v) = hungarian::hungarian(&linear).unwrap();
        assert_eq!(res.trace.iterations, 1);
        assert_eq!(res.plan.as_permutation(), Some(p));
        assert!((res.value - v).abs() < 1e-12);
    }

    #[test]
    fn trace_monotone_and_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=5 {
            for sym in [true, false] {
                let obj = random_dense(n, &mut rng, sym);
                let res = cg_solve(&obj, &SolverOptions::default()).unwrap();
                assert!(res.trace.is_monotone(1e-12));
                assert!(res.plan.marginal_error() < 1e-8);
                assert!(res.plan.matrix().iter().all(|&x| x >= -1e-12));
                assert!((res.value - res.trace.objectives.last().unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn non_symmetric_gradient_matches_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let obj = random_dense(3, &mut rng, false);
        assert!(!obj.is_symmetric());
        let t = TransportPlan::random(3, &mut rng).into_matrix();
        let g = obj.gradient(&t);
        let h = 1e-6;
        for i in 0..3 {
            for j in 0..3 {
                let mut tp = t.clone();
                tp[[i, j]] += h;
                let mut tm = t.clone();
                tm[[i, j]] -= h;
                let fd = (obj.value(&tp) - obj.value(&tm)) / (2.0 * h);
                assert!((fd - g[[i, j]]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn restarts_never_worse_than_single_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let obj = random_dense(4, &mut rng, true);
            let one = cg_solve(&obj, &SolverOptions::default()).unwrap();
            let five = cg_solve(&obj, &SolverOptions::oracle()).unwrap();
            assert!(five.value <= one.value + 1e-12);
            let (_, exact) = brute_force_min(&obj).unwrap();
            assert!(five.value.is_finite() && exact.is_finite());
        }
    }

    #[test]
    fn random_init_is_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let obj = random_dense(4, &mut rng, true);
        let opts = SolverOptions {
            init: Init::Random,
            seed: 77,
            ..SolverOptions::default()
        };
        let a = cg_solve(&obj, &opts).unwrap();
        let b = cg_solve(&obj, &opts).unwrap();
        assert_eq!(a.plan, b.plan);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn given_init_size_checked() {
        let obj = DenseObjective::new(Array2::zeros((2, 2)), vec![0.0; 16]).unwrap();
        let opts = SolverOptions {
            init: Init::Given(TransportPlan::uniform(3)),
            ..SolverOptions::default()
        };
        assert!(cg_solve(&obj, &opts).is_err());
    }

    #[test]
    fn invalid_options() {
        let obj = DenseObjective::new(Array2::zeros((2, 2)), vec![0.0; 16]).unwrap();
        let opts = SolverOptions {
            max_iterations: 0,
            ..SolverOptions::default()
        };
        assert!(cg_solve(&obj, &opts).is_err());
    }
}
