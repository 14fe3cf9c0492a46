use ndarray::Array2;

use super::cg::QuadraticObjective;
use super::hungarian;
use super::plan::TransportPlan;
use crate::error::{Error, Result};
use crate::graph::Permutation;

/// Largest size accepted by the exhaustive searches.
pub const MAX_EXHAUSTIVE: usize = 8;

/// Calls `visit` on every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Exact minimum of the objective over permutation matrices.
pub fn brute_force_min<O: QuadraticObjective + ?Sized>(obj: &O) -> Result<(Permutation, f64)> {
    let n = obj.size();
    if n > MAX_EXHAUSTIVE {
        return Err(Error::TooLarge {
            size: n,
            limit: MAX_EXHAUSTIVE,
        });
    }
    let mut best = (Vec::new(), f64::INFINITY);
    let mut p = Array2::zeros((n, n));
    for_each_permutation(n, |perm| {
        p.fill(0.0);
        for (i, &j) in perm.iter().enumerate() {
            p[[i, j]] = 1.0;
        }
        let v = obj.value(&p);
        if v < best.1 {
            best = (perm.to_vec(), v);
        }
    });
    Ok((Permutation::new(best.0)?, best.1))
}

/// Permutation maximizing `<P, T>`.
pub fn round_to_permutation(plan: &TransportPlan) -> Permutation {
    let neg = plan.matrix().mapv(|x| -x);
    Permutation::new(hungarian::solve(&neg)).expect("assignment is a bijection")
}
