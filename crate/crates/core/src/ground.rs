//! Ground losses comparing a predicted value with a target value.
//!
//! The quadratic part of the objective only needs losses that split as
//! `l(a, b) = f1(a) + f2(b) - h1(a) * h2(b)`; [`GroundLoss::decompose`]
//! returns that split for the squared and binary cross-entropy losses.

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView1;

use crate::error::{Error, Result};

pub const DEFAULT_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    /// `(a - b)^2`, summed over components for vectors.
    Squared,
    /// Kullback-Leibler divergence between Bernoulli(q) and Bernoulli(p)
    /// with `p` the prediction; equals the cross-entropy for binary targets.
    BinaryCrossEntropy,
    /// `sum_k q_k log(q_k / p_k)` for a predicted probability vector `p`.
    SoftmaxCrossEntropy,
    /// Loss that ignores its arguments.
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundLoss {
    kind: LossKind,
    clamp_epsilon: f64,
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl GroundLoss {
    pub fn new(kind: LossKind, clamp_epsilon: f64) -> Result<Self> {
        if !(clamp_epsilon > 0.0 && clamp_epsilon < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "clamp epsilon {clamp_epsilon} outside (0, 0.5)"
            )));
        }
        Ok(Self {
            kind,
            clamp_epsilon,
        })
    }

    pub fn squared() -> Self {
        Self {
            kind: LossKind::Squared,
            clamp_epsilon: DEFAULT_CLAMP,
        }
    }

    pub fn bce() -> Self {
        Self {
            kind: LossKind::BinaryCrossEntropy,
            clamp_epsilon: DEFAULT_CLAMP,
        }
    }

    pub fn softmax_ce() -> Self {
        Self {
            kind: LossKind::SoftmaxCrossEntropy,
            clamp_epsilon: DEFAULT_CLAMP,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            kind: LossKind::Constant(value),
            clamp_epsilon: DEFAULT_CLAMP,
        }
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn clamp_epsilon(&self) -> f64 {
        self.clamp_epsilon
    }

    fn clamp(&self, p: f64) -> f64 {
        p.clamp(self.clamp_epsilon, 1.0 - self.clamp_epsilon)
    }

    /// Derivative of the clamp: zero when `p` sits outside the clamp band.
    fn clamp_active(&self, p: f64) -> bool {
        p >= self.clamp_epsilon && p <= 1.0 - self.clamp_epsilon
    }

    /// Scalar loss between a prediction and a target.
    pub fn eval(&self, predicted: f64, target: f64) -> f64 {
        match self.kind {
            LossKind::Squared => (predicted - target) * (predicted - target),
            LossKind::BinaryCrossEntropy => {
                let p = self.clamp(predicted);
                let q = target;
                let v = xlogx(q) + xlogx(1.0 - q) - q * p.ln() - (1.0 - q) * (1.0 - p).ln();
                v.max(0.0)
            }
            LossKind::SoftmaxCrossEntropy => {
                let p = self.clamp(predicted);
                (xlogx(target) - target * p.ln()).max(0.0)
            }
            LossKind::Constant(c) => c,
        }
    }

    /// Partial derivative with respect to the prediction.
    pub fn grad(&self, predicted: f64, target: f64) -> f64 {
        match self.kind {
            LossKind::Squared => 2.0 * (predicted - target),
            LossKind::BinaryCrossEntropy => {
                if !self.clamp_active(predicted) {
                    return 0.0;
                }
                -target / predicted + (1.0 - target) / (1.0 - predicted)
            }
            LossKind::SoftmaxCrossEntropy => {
                if !self.clamp_active(predicted) {
                    return 0.0;
                }
                -target / predicted
            }
            LossKind::Constant(_) => 0.0,
        }
    }

    /// Vector loss: squared distance, summed element-wise cross-entropy, or
    /// the categorical cross-entropy for `softmax-ce`.
    pub fn eval_vec(&self, predicted: ArrayView1<f64>, target: ArrayView1<f64>) -> Result<f64> {
        check_dims(predicted.len(), target.len())?;
        Ok(match self.kind {
            LossKind::Constant(c) => c,
            _ => predicted
                .iter()
                .zip(target.iter())
                .map(|(&p, &q)| self.eval(p, q))
                .sum(),
        })
    }

    /// Gradient of [`GroundLoss::eval_vec`] with respect to the prediction,
    /// accumulated as `out += scale * grad`.
    pub fn grad_vec_into(
        &self,
        predicted: ArrayView1<f64>,
        target: ArrayView1<f64>,
        scale: f64,
        out: &mut [f64],
    ) -> Result<()> {
        check_dims(predicted.len(), target.len())?;
        check_dims(predicted.len(), out.len())?;
        for ((o, &p), &q) in out.iter_mut().zip(predicted.iter()).zip(target.iter()) {
            *o += scale * self.grad(p, q);
        }
        Ok(())
    }

    /// Loss on raw scores: a sigmoid (scalar) or softmax (vector) is applied
    /// to the prediction first. Squared and constant losses take the scores
    /// unchanged.
    pub fn eval_logits(&self, logit: f64, target: f64) -> f64 {
        match self.kind {
            LossKind::BinaryCrossEntropy | LossKind::SoftmaxCrossEntropy => {
                self.eval(sigmoid(logit), target)
            }
            _ => self.eval(logit, target),
        }
    }

    pub fn eval_vec_logits(&self, logits: ArrayView1<f64>, target: ArrayView1<f64>) -> Result<f64> {
        match self.kind {
            LossKind::SoftmaxCrossEntropy => {
                let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exp = logits.mapv(|x| (x - max).exp());
                let probs = &exp / exp.sum();
                self.eval_vec(probs.view(), target)
            }
            LossKind::BinaryCrossEntropy => {
                let probs = logits.mapv(sigmoid);
                self.eval_vec(probs.view(), target)
            }
            _ => self.eval_vec(logits, target),
        }
    }

    /// Separable form `l(a, b) = f1(a) + f2(b) - h1(a) h2(b)`.
    pub fn decompose(&self) -> Result<LossDecomposition> {
        match self.kind {
            LossKind::SoftmaxCrossEntropy => Err(Error::NotDecomposable("softmax-ce")),
            kind => Ok(LossDecomposition {
                kind,
                clamp_epsilon: self.clamp_epsilon,
            }),
        }
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!(
            "prediction has dimension {a}, target {b}"
        )));
    }
    Ok(())
}

impl Default for GroundLoss {
    fn default() -> Self {
        Self::bce()
    }
}

impl FromStr for GroundLoss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" | "squared" => Ok(Self::squared()),
            "bce" => Ok(Self::bce()),
            "softmax-ce" => Ok(Self::softmax_ce()),
            other => Err(Error::InvalidConfig(format!(
                "unknown ground loss `{other}` (expected l2, bce or softmax-ce)"
            ))),
        }
    }
}

impl fmt::Display for GroundLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LossKind::Squared => write!(f, "l2"),
            LossKind::BinaryCrossEntropy => write!(f, "bce"),
            LossKind::SoftmaxCrossEntropy => write!(f, "softmax-ce"),
            LossKind::Constant(c) => write!(f, "constant({c})"),
        }
    }
}

/// The four scalar maps of a separable ground loss, with the derivatives of
/// the prediction-side maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossDecomposition {
    kind: LossKind,
    clamp_epsilon: f64,
}

impl LossDecomposition {
    fn clamp(&self, p: f64) -> f64 {
        p.clamp(self.clamp_epsilon, 1.0 - self.clamp_epsilon)
    }

    fn clamp_active(&self, p: f64) -> bool {
        p >= self.clamp_epsilon && p <= 1.0 - self.clamp_epsilon
    }

    pub fn f1(&self, a: f64) -> f64 {
        match self.kind {
            LossKind::Squared => a * a,
            LossKind::BinaryCrossEntropy => -self.clamp(a).ln(),
            LossKind::Constant(c) => c,
            LossKind::SoftmaxCrossEntropy => unreachable!(),
        }
    }

    pub fn f2(&self, b: f64) -> f64 {
        match self.kind {
            LossKind::Squared => b * b,
            LossKind::BinaryCrossEntropy => xlogx(b) + xlogx(1.0 - b),
            LossKind::Constant(_) => 0.0,
            LossKind::SoftmaxCrossEntropy => unreachable!(),
        }
    }

    pub fn h1(&self, a: f64) -> f64 {
        match self.kind {
            LossKind::Squared => 2.0 * a,
            LossKind::BinaryCrossEntropy => {
                let p = self.clamp(a);
                ((1.0 - p) / p).ln()
            }
            LossKind::Constant(_) => 0.0,
            LossKind::SoftmaxCrossEntropy => unreachable!(),
        }
    }

    pub fn h2(&self, b: f64) -> f64 {
        match self.kind {
            LossKind::Squared => b,
            LossKind::BinaryCrossEntropy => 1.0 - b,
            LossKind::Constant(_) => 0.0,
            LossKind::SoftmaxCrossEntropy => unreachable!(),
        }
    }

    pub fn df1(&self, a: f64) -> f64 {
        match self.kind {
            LossKind::Squared => 2.0 * a,
            LossKind::BinaryCrossEntropy => {
                if self.clamp_active(a) {
                    -1.0 / a
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }

    pub fn dh1(&self, a: f64) -> f64 {
        match self.kind {
            LossKind::Squared => 2.0,
            LossKind::BinaryCrossEntropy => {
                if self.clamp_active(a) {
                    -1.0 / (1.0 - a) - 1.0 / a
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }

    /// `f1(a) + f2(b) - h1(a) h2(b)`.
    pub fn reconstruct(&self, a: f64, b: f64) -> f64 {
        self.f1(a) + self.f2(b) - self.h1(a) * self.h2(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn squared_value() {
        assert!((GroundLoss::squared().eval(0.3, 1.0) - 0.49).abs() < 1e-15);
    }

    #[test]
    fn bce_matching_is_near_zero() {
        let eps = DEFAULT_CLAMP;
        let v = GroundLoss::bce().eval(1.0, 1.0);
        assert!(v >= 0.0 && v <= 2.0 * eps * eps.ln().abs());
        assert!(GroundLoss::bce().eval(0.0, 0.0) <= 2.0 * eps * eps.ln().abs());
    }

    #[test]
    fn bce_half_against_one_is_log_two() {
        // KL(p = 0.5, q = 1) = 1 * log(1 / 0.5) + 0
        let kl = |p: f64, q: f64| xlogx(q) - q * p.ln() + xlogx(1.0 - q) - (1.0 - q) * (1.0 - p).ln();
        let expected = kl(0.5, 1.0);
        assert!((expected - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((GroundLoss::bce().eval(0.5, 1.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn squared_decomposition_at_point() {
        let d = GroundLoss::squared().decompose().unwrap();
        assert!((d.reconstruct(0.3, 0.7) - 0.16).abs() < 1e-15);
    }

    #[test]
    fn bce_decomposition_at_point() {
        let d = GroundLoss::bce().decompose().unwrap();
        let lhs = d.reconstruct(0.25, 1.0);
        assert!((lhs - 4f64.ln()).abs() < 1e-14);
        assert!((lhs - GroundLoss::bce().eval(0.25, 1.0)).abs() < 1e-14);
    }

    #[test]
    fn bce_decomposition_grid() {
        let loss = GroundLoss::bce();
        let d = loss.decompose().unwrap();
        let eps = loss.clamp_epsilon();
        for k in 0..100 {
            let p = eps + (1.0 - 2.0 * eps) * k as f64 / 99.0;
            for q in [0.0, 1.0] {
                assert!((d.reconstruct(p, q) - loss.eval(p, q)).abs() < 1e-12, "p={p} q={q}");
            }
        }
    }

    #[test]
    fn softmax_ce_not_decomposable() {
        assert!(matches!(
            GroundLoss::softmax_ce().decompose(),
            Err(Error::NotDecomposable(_))
        ));
    }

    #[test]
    fn vector_dimension_mismatch() {
        let l = GroundLoss::squared();
        assert!(l.eval_vec(array![1.0, 2.0].view(), array![1.0].view()).is_err());
    }

    #[test]
    fn softmax_ce_one_hot() {
        let l = GroundLoss::softmax_ce();
        let v = l.eval_vec(array![0.7, 0.2, 0.1].view(), array![1.0, 0.0, 0.0].view()).unwrap();
        assert!((v + 0.7f64.ln()).abs() < 1e-15);
        let z = l.eval_vec(array![1.0, 0.0].view(), array![1.0, 0.0].view()).unwrap();
        assert!(z < 1e-6);
    }

    #[test]
    fn logits_wrapper_applies_sigmoid() {
        let l = GroundLoss::bce();
        assert!((l.eval_logits(0.0, 1.0) - std::f64::consts::LN_2).abs() < 1e-15);
        let v = GroundLoss::softmax_ce()
            .eval_vec_logits(array![0.0, 0.0].view(), array![1.0, 0.0].view())
            .unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn names_round_trip() {
        for name in ["l2", "bce", "softmax-ce"] {
            assert_eq!(name.parse::<GroundLoss>().unwrap().to_string(), name);
        }
        assert!("hinge".parse::<GroundLoss>().is_err());
    }

    #[test]
    fn clamp_epsilon_validated() {
        assert!(GroundLoss::new(LossKind::BinaryCrossEntropy, 0.0).is_err());
        assert!(GroundLoss::new(LossKind::BinaryCrossEntropy, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn decomposition_identity(a in 1e-7f64..(1.0 - 1e-7), b in 0.0f64..1.0, sq in proptest::bool::ANY) {
            let (loss, b) = if sq { (GroundLoss::squared(), b) } else { (GroundLoss::bce(), b.round()) };
            let d = loss.decompose().unwrap();
            prop_assert!((d.reconstruct(a, b) - loss.eval(a, b)).abs() < 1e-12);
        }

        #[test]
        fn nonnegative(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            for loss in [GroundLoss::squared(), GroundLoss::bce(), GroundLoss::softmax_ce()] {
                prop_assert!(loss.eval(a, b) >= 0.0);
            }
        }

        #[test]
        fn bce_gradient_matches_difference(p in 0.01f64..0.99, q in 0.0f64..1.0) {
            let l = GroundLoss::bce();
            let h = 1e-6;
            let fd = (l.eval(p + h, q) - l.eval(p - h, q)) / (2.0 * h);
            prop_assert!((fd - l.grad(p, q)).abs() < 1e-5 * (1.0 + fd.abs()));
            let d = l.decompose().unwrap();
            let via_split = d.df1(p) - d.dh1(p) * d.h2(q);
            prop_assert!((via_split - l.grad(p, q)).abs() < 1e-9 * (1.0 + fd.abs()));
        }
    }
}
