use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Permutation;

/// Marginal tolerance for membership in the Birkhoff polytope.
pub const MARGINAL_TOL: f64 = 1e-8;

/// Doubly stochastic `M x M` coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    matrix: Array2<f64>,
}

impl TransportPlan {
    pub fn new(matrix: Array2<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::InfeasiblePlan(format!(
                "plan is {}x{}, expected square",
                n,
                matrix.ncols()
            )));
        }
        if let Some(x) = matrix.iter().find(|&&x| !(x >= -MARGINAL_TOL)) {
            return Err(Error::InfeasiblePlan(format!("negative entry {x}")));
        }
        for (i, row) in matrix.rows().into_iter().enumerate() {
            let s = row.sum();
            if (s - 1.0).abs() > MARGINAL_TOL {
                return Err(Error::InfeasiblePlan(format!("row {i} sums to {s}")));
            }
        }
        for (j, col) in matrix.columns().into_iter().enumerate() {
            let s = col.sum();
            if (s - 1.0).abs() > MARGINAL_TOL {
                return Err(Error::InfeasiblePlan(format!("column {j} sums to {s}")));
            }
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: Array2<f64>) -> Self {
        Self { matrix }
    }

    /// Every entry equal to `1 / n`.
    pub fn uniform(n: usize) -> Self {
        Self {
            matrix: Array2::from_elem((n, n), 1.0 / n.max(1) as f64),
        }
    }

    pub fn from_permutation(p: &Permutation) -> Self {
        Self {
            matrix: p.to_matrix(),
        }
    }

    /// Random convex combination of `n` uniformly random permutations.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let k = n.max(1);
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut matrix = Array2::zeros((n, n));
        for w in weights {
            let p = Permutation::random(n, rng);
            for i in 0..n {
                matrix[[i, p.apply(i)]] += w / total;
            }
        }
        Self { matrix }
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.matrix
    }

    /// Largest deviation of a row or column sum from one.
    pub fn marginal_error(&self) -> f64 {
        let rows = self.matrix.rows().into_iter().map(|r| (r.sum() - 1.0).abs());
        let cols = self.matrix.columns().into_iter().map(|c| (c.sum() - 1.0).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }

    /// The permutation this plan equals, if it is a vertex of the polytope.
    pub fn as_permutation(&self) -> Option<Permutation> {
        let n = self.size();
        let mut map = Vec::with_capacity(n);
        for row in self.matrix.rows() {
            let j = row.iter().position(|&x| (x - 1.0).abs() <= MARGINAL_TOL)?;
            if row.iter().enumerate().any(|(k, &x)| k != j && x.abs() > MARGINAL_TOL) {
                return None;
            }
            map.push(j);
        }
        Permutation::new(map).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Uniform,
    Given(TransportPlan),
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub relative_tolerance: f64,
    pub init: Init,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            relative_tolerance: 1e-6,
            init: Init::Uniform,
            restarts: 1,
            seed: 0,
        }
    }
}

impl SolverOptions {
    /// Defaults with five restarts, used when comparing against exhaustive
    /// search.
    pub fn oracle() -> Self {
        Self {
            restarts: 5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.relative_tolerance > 0.0) {
            return Err(Error::InvalidConfig("relative_tolerance must be positive".into()));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-run record of the conditional gradient iterations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    /// Objective at the initial plan followed by one entry per step taken.
    pub objectives: Vec<f64>,
    /// Line-search step of each step taken.
    pub step_sizes: Vec<f64>,
    /// Number of steps that moved the plan.
    pub iterations: usize,
    /// Index of the restart that produced the returned plan.
    pub restart: usize,
}

impl SolverTrace {
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.objectives.windows(2).all(|w| w[1] <= w[0] + slack)
    }

    pub fn initial_objective(&self) -> Option<f64> {
        self.objectives.first().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_plan_is_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 0..8 {
            let p = TransportPlan::random(n, &mut rng);
            assert!(p.marginal_error() < 1e-12);
            assert!(TransportPlan::new(p.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn rejects_bad_marginals() {
        assert!(TransportPlan::new(array![[0.5, 0.5], [0.6, 0.4]]).is_err());
        assert!(TransportPlan::new(array![[1.5, -0.5], [-0.5, 1.5]]).is_err());
    }

    #[test]
    fn permutation_round_trip() {
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        assert_eq!(TransportPlan::from_permutation(&p).as_permutation(), Some(p));
        assert_eq!(TransportPlan::uniform(3).as_permutation(), None);
    }
}
