//! Tensor-matrix products `L ⊗ T` for tensors of the form
//! `L[i, i', j, j'] = l(A[i, j], A'[i', j']) W[i, j] W'[i', j']`.
//!
//! With a separable ground loss the product reduces to three matrix chains,
//! `U1 T W'^T + W T U2^T - V1 T V2^T`, which costs `O(n^2 m + n m^2)` instead
//! of the `O(n^2 m^2)` quadruple sum.

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::ground::{GroundLoss, LossDecomposition};

/// Precomputed factors of a separable structure tensor.
#[derive(Debug, Clone)]
pub struct FactorizedTensor {
    u1: Array2<f64>,
    u2: Array2<f64>,
    v1: Array2<f64>,
    v2: Array2<f64>,
    w_pred: Array2<f64>,
    w_tgt: Array2<f64>,
    symmetric: bool,
}

fn check_square(name: &str, a: &Array2<f64>, n: usize) -> Result<()> {
    if a.dim() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "{name} is {}x{}, expected {n}x{n}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

fn is_symmetric(a: &Array2<f64>) -> bool {
    let n = a.nrows();
    (0..n).all(|i| (0..i).all(|j| a[[i, j]] == a[[j, i]]))
}

impl FactorizedTensor {
    /// `a_pred`, `w_pred` are `n x n`; `a_tgt`, `w_tgt` are `m x m`.
    pub fn new(
        dec: &LossDecomposition,
        a_pred: &Array2<f64>,
        a_tgt: &Array2<f64>,
        w_pred: &Array2<f64>,
        w_tgt: &Array2<f64>,
    ) -> Result<Self> {
        let n = a_pred.nrows();
        let m = a_tgt.nrows();
        check_square("predicted structure", a_pred, n)?;
        check_square("predicted weights", w_pred, n)?;
        check_square("target structure", a_tgt, m)?;
        check_square("target weights", w_tgt, m)?;
        let symmetric = is_symmetric(a_pred)
            && is_symmetric(a_tgt)
            && is_symmetric(w_pred)
            && is_symmetric(w_tgt);
        Ok(Self {
            u1: a_pred.mapv(|a| dec.f1(a)) * w_pred,
            u2: a_tgt.mapv(|b| dec.f2(b)) * w_tgt,
            v1: a_pred.mapv(|a| dec.h1(a)) * w_pred,
            v2: a_tgt.mapv(|b| dec.h2(b)) * w_tgt,
            w_pred: w_pred.clone(),
            w_tgt: w_tgt.clone(),
            symmetric,
        })
    }

    pub fn pred_size(&self) -> usize {
        self.u1.nrows()
    }

    pub fn target_size(&self) -> usize {
        self.u2.nrows()
    }

    /// True when the tensor is invariant under the pair swap
    /// `(i, i') <-> (j, j')`, in which case the adjoint equals the product.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn target_weights(&self) -> &Array2<f64> {
        &self.w_tgt
    }

    /// `h2(A') * W'`, the target-side factor of the cross term.
    pub fn target_cross_factor(&self) -> &Array2<f64> {
        &self.v2
    }

    fn check_plan(&self, t: &Array2<f64>) -> Result<()> {
        if t.dim() != (self.pred_size(), self.target_size()) {
            return Err(Error::DimensionMismatch(format!(
                "plan is {}x{}, expected {}x{}",
                t.nrows(),
                t.ncols(),
                self.pred_size(),
                self.target_size()
            )));
        }
        Ok(())
    }

    /// `L ⊗ T`.
    pub fn apply(&self, t: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_plan(t)?;
        Ok(self.apply_unchecked(t))
    }

    pub(crate) fn apply_unchecked(&self, t: &Array2<f64>) -> Array2<f64> {
        let mut out = self.u1.dot(t).dot(&self.w_tgt.t());
        out += &self.w_pred.dot(t).dot(&self.u2.t());
        out -= &self.v1.dot(t).dot(&self.v2.t());
        out
    }

    /// `L^T ⊗ T`, the product with the pair-swapped tensor.
    pub fn apply_adjoint(&self, t: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_plan(t)?;
        Ok(self.apply_adjoint_unchecked(t))
    }

    pub(crate) fn apply_adjoint_unchecked(&self, t: &Array2<f64>) -> Array2<f64> {
        if self.symmetric {
            return self.apply_unchecked(t);
        }
        let mut out = self.u1.t().dot(t).dot(&self.w_tgt);
        out += &self.w_pred.t().dot(t).dot(&self.u2);
        out -= &self.v1.t().dot(t).dot(&self.v2);
        out
    }
}

/// Factorized product in one call.
pub fn tensor_product_factorized(
    dec: &LossDecomposition,
    a_pred: &Array2<f64>,
    a_tgt: &Array2<f64>,
    w_pred: &Array2<f64>,
    w_tgt: &Array2<f64>,
    t: &Array2<f64>,
) -> Result<Array2<f64>> {
    FactorizedTensor::new(dec, a_pred, a_tgt, w_pred, w_tgt)?.apply(t)
}

/// Literal quadruple sum
/// `(L ⊗ T)[i, i'] = sum_{j, j'} T[j, j'] l(A[i, j], A'[i', j']) W[i, j] W'[i', j']`.
pub fn tensor_product_naive(
    loss: &GroundLoss,
    a_pred: &Array2<f64>,
    a_tgt: &Array2<f64>,
    w_pred: &Array2<f64>,
    w_tgt: &Array2<f64>,
    t: &Array2<f64>,
) -> Result<Array2<f64>> {
    let n = a_pred.nrows();
    let m = a_tgt.nrows();
    check_square("predicted structure", a_pred, n)?;
    check_square("predicted weights", w_pred, n)?;
    check_square("target structure", a_tgt, m)?;
    check_square("target weights", w_tgt, m)?;
    if t.dim() != (n, m) {
        return Err(Error::DimensionMismatch(format!(
            "plan is {}x{}, expected {n}x{m}",
            t.nrows(),
            t.ncols()
        )));
    }
    let mut out = Array2::zeros((n, m));
    Zip::indexed(&mut out).for_each(|(i, ip), o| {
        let mut acc = 0.0;
        for j in 0..n {
            for jp in 0..m {
                acc += t[[j, jp]]
                    * loss.eval(a_pred[[i, j]], a_tgt[[ip, jp]])
                    * w_pred[[i, j]]
                    * w_tgt[[ip, jp]];
            }
        }
        *o = acc;
    });
    Ok(out)
}
