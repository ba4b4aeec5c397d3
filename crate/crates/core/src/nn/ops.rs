//! Pointwise activations and scalar losses with their exact gradients.

use crate::error::{Error, Result};

use super::{Scalar, Tensor4};

/// max(0, x), elementwise.
pub fn relu_forward<S: Scalar>(x: &Tensor4<S>) -> Tensor4<S> {
    let mut y = x.clone();
    for v in y.data.iter_mut() {
        if *v < S::ZERO {
            *v = S::ZERO;
        }
    }
    y
}

/// Routes upstream gradient through the ReLU mask: passes where the
/// forward input was > 0, zero elsewhere (the subgradient at exactly 0
/// is taken as 0).
pub fn relu_backward<S: Scalar>(x: &Tensor4<S>, grad_y: &Tensor4<S>) -> Result<Tensor4<S>> {
    if !x.same_shape(grad_y) {
        return Err(Error::ShapeMismatch(
            "relu backward: input and upstream gradient shapes differ".into(),
        ));
    }
    let mut gx = grad_y.clone();
    for (g, &v) in gx.data.iter_mut().zip(&x.data) {
        if !(v > S::ZERO) {
            *g = S::ZERO;
        }
    }
    Ok(gx)
}

/// Mean absolute error and its gradient, sign(pred − target)/N with
/// sign(0) = 0.
pub fn l1_loss<S: Scalar>(pred: &Tensor4<S>, target: &Tensor4<S>) -> Result<(f64, Tensor4<S>)> {
    if !pred.same_shape(target) {
        return Err(Error::ShapeMismatch(
            "l1 loss: prediction and target shapes differ".into(),
        ));
    }
    let n = pred.data.len() as f64;
    let mut grad = Tensor4::zeros(pred.n, pred.c, pred.h, pred.w);
    let mut total = 0.0;
    for ((g, &p), &t) in grad.data.iter_mut().zip(&pred.data).zip(&target.data) {
        let d = (p - t).to_f64();
        total += d.abs();
        let s = if d > 0.0 {
            1.0
        } else if d < 0.0 {
            -1.0
        } else {
            0.0
        };
        *g = S::from_f64(s / n);
    }
    Ok((total / n, grad))
}

/// Mean squared error and its gradient, 2(pred − target)/N.
pub fn l2_loss<S: Scalar>(pred: &Tensor4<S>, target: &Tensor4<S>) -> Result<(f64, Tensor4<S>)> {
    if !pred.same_shape(target) {
        return Err(Error::ShapeMismatch(
            "l2 loss: prediction and target shapes differ".into(),
        ));
    }
    let n = pred.data.len() as f64;
    let mut grad = Tensor4::zeros(pred.n, pred.c, pred.h, pred.w);
    let mut total = 0.0;
    for ((g, &p), &t) in grad.data.iter_mut().zip(&pred.data).zip(&target.data) {
        let d = (p - t).to_f64();
        total += d * d;
        *g = S::from_f64(2.0 * d / n);
    }
    Ok((total / n, grad))
}
