//! Dense linear assignment by the shortest augmenting path Hungarian method.
//!
//! O(n^3) with row/column potentials. Ties are resolved by the scan order of
//! the algorithm, so the result is deterministic for a given input.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::Permutation;

/// Minimizes `sum_i cost[i, p(i)]` over permutations `p`.
pub fn hungarian(cost: &Array2<f64>) -> Result<(Permutation, f64)> {
    let n = cost.nrows();
    if cost.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "assignment cost is {}x{}, expected square",
            n,
            cost.ncols()
        )));
    }
    for ((i, j), v) in cost.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFiniteCost { row: i, col: j });
        }
    }
    let assignment = solve(cost);
    let value = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[[i, j]])
        .sum();
    Ok((Permutation::new(assignment)?, value))
}

/// Row-to-column assignment; `cost` must be square and finite.
pub(crate) fn solve(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    if n == 0 {
        return Vec::new();
    }

    // 1-based arrays; index 0 is the virtual source column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);

        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;

            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }

            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }

            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }

        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(cost: &Array2<f64>) -> f64 {
        fn rec(cost: &Array2<f64>, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            let n = cost.nrows();
            if row == n {
                *best = best.min(acc);
                return;
            }
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    rec(cost, row + 1, used, acc + cost[[row, j]], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(cost, 0, &mut vec![false; cost.nrows()], 0.0, &mut best);
        best
    }

    #[test]
    fn identity_favoring() {
        let c = array![[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]];
        let (p, v) = hungarian(&c).unwrap();
        assert_eq!(p, Permutation::identity(3));
        assert_eq!(v, 0.0);
    }

    #[test]
    fn random_integer_three_by_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let c = Array2::from_shape_fn((3, 3), |_| rng.random_range(0..10) as f64);
            let (_, v) = hungarian(&c).unwrap();
            assert_eq!(v, brute_force(&c));
        }
    }

    #[test]
    fn random_real_up_to_seven() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=7 {
            for _ in 0..20 {
                let c = Array2::from_shape_fn((n, n), |_| rng.random_range(-5.0..5.0));
                let (p, v) = hungarian(&c).unwrap();
                assert!((v - brute_force(&c)).abs() < 1e-9);
                let direct: f64 = (0..n).map(|i| c[[i, p.apply(i)]]).sum();
                assert!((direct - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_matrix() {
        let c = Array2::from_elem((4, 4), 2.5);
        let (p, v) = hungarian(&c).unwrap();
        assert_eq!(v, 10.0);
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn deterministic() {
        let c = Array2::from_elem((5, 5), 1.0);
        assert_eq!(hungarian(&c).unwrap().0, hungarian(&c).unwrap().0);
    }

    #[test]
    fn rejects_non_finite() {
        let c = array![[0.0, f64::NAN], [1.0, 0.0]];
        assert!(matches!(hungarian(&c), Err(Error::NonFiniteCost { row: 0, col: 1 })));
    }

    #[test]
    fn empty() {
        let (p, v) = hungarian(&Array2::zeros((0, 0))).unwrap();
        assert!(p.is_empty());
        assert_eq!(v, 0.0);
    }
}
