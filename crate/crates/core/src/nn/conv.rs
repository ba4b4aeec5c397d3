//! 3×3 same-padding convolution with exact reverse-mode gradients.

use crate::error::{Error, Result};
use crate::rng::Rng;

use super::{Scalar, Tensor4};

/// 3×3 convolution, stride 1, zero padding 1, so spatial dims are
/// preserved. Weights are laid out (C_out, C_in, 3, 3) row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2dLayer<S: Scalar> {
    pub c_in: usize,
    pub c_out: usize,
    pub weight: Vec<S>,
    pub bias: Vec<S>,
}

impl<S: Scalar> Conv2dLayer<S> {
    pub fn zeros(c_in: usize, c_out: usize) -> Self {
        Conv2dLayer {
            c_in,
            c_out,
            weight: vec![S::ZERO; c_out * c_in * 9],
            bias: vec![S::ZERO; c_out],
        }
    }

    /// Kaiming-uniform init: weights ~ U(−b, b) with b = √(6/fan_in),
    /// fan_in = 9·C_in; biases start at zero. Draw order is fixed
    /// (row-major over the weight array) so a seed pins the init exactly.
    pub fn kaiming(c_in: usize, c_out: usize, rng: &mut Rng) -> Self {
        let bound = (6.0 / (c_in as f64 * 9.0)).sqrt();
        let weight = (0..c_out * c_in * 9)
            .map(|_| S::from_f64(rng.uniform(-bound, bound)))
            .collect();
        Conv2dLayer {
            c_in,
            c_out,
            weight,
            bias: vec![S::ZERO; c_out],
        }
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    #[inline]
    fn w_idx(&self, co: usize, ci: usize, ky: usize, kx: usize) -> usize {
        ((co * self.c_in + ci) * 3 + ky) * 3 + kx
    }

    /// y[n,o,·,·] = b[o] + Σ_{c,ky,kx} w[o,c,ky,kx] · shifted x[n,c,·,·].
    ///
    /// The loop nest runs one contiguous row at a time per kernel tap
    /// (an AXPY over the row), which the compiler vectorizes; the result
    /// is bit-identical to the naive six-loop form because each output
    /// element still accumulates its nine taps in the same (c, ky, kx)
    /// order.
    pub fn forward(&self, x: &Tensor4<S>) -> Result<Tensor4<S>> {
        if x.c != self.c_in {
            return Err(Error::ShapeMismatch(format!(
                "conv expects {} input channels, got {}",
                self.c_in, x.c
            )));
        }
        let (n, _, h, w) = x.dims();
        let mut y = Tensor4::zeros(n, self.c_out, h, w);
        for ni in 0..n {
            for co in 0..self.c_out {
                let out_base = (ni * self.c_out + co) * h * w;
                let b = self.bias[co];
                for v in &mut y.data[out_base..out_base + h * w] {
                    *v = b;
                }
                for ci in 0..self.c_in {
                    let in_base = (ni * self.c_in + ci) * h * w;
                    for ky in 0..3usize {
                        let dy = ky as isize - 1;
                        let (y0, y1) = row_range(h, dy);
                        for kx in 0..3usize {
                            let dx = kx as isize - 1;
                            let (x0, x1) = row_range(w, dx);
                            if y0 >= y1 || x0 >= x1 {
                                continue;
                            }
                            let wv = self.weight[self.w_idx(co, ci, ky, kx)];
                            for yo in y0..y1 {
                                let yi = (yo as isize + dy) as usize;
                                let xi = (x0 as isize + dx) as usize;
                                let len = x1 - x0;
                                let out_row =
                                    &mut y.data[out_base + yo * w + x0..out_base + yo * w + x0 + len];
                                let in_row =
                                    &x.data[in_base + yi * w + xi..in_base + yi * w + xi + len];
                                for (o, &i) in out_row.iter_mut().zip(in_row) {
                                    *o += wv * i;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(y)
    }

    /// Exact gradients of [`Self::forward`] given upstream grad_y:
    /// returns (grad_x, grad_w, grad_b).
    pub fn backward(
        &self,
        x: &Tensor4<S>,
        grad_y: &Tensor4<S>,
    ) -> Result<(Tensor4<S>, Vec<S>, Vec<S>)> {
        if x.c != self.c_in || grad_y.c != self.c_out {
            return Err(Error::ShapeMismatch(format!(
                "conv backward: x has {} channels (want {}), grad_y has {} (want {})",
                x.c, self.c_in, grad_y.c, self.c_out
            )));
        }
        if (grad_y.n, grad_y.h, grad_y.w) != (x.n, x.h, x.w) {
            return Err(Error::ShapeMismatch(
                "conv backward: grad_y spatial/batch dims disagree with x".into(),
            ));
        }
        let (n, _, h, w) = x.dims();
        let mut grad_x = Tensor4::zeros(n, self.c_in, h, w);
        let mut grad_w = vec![S::ZERO; self.weight.len()];
        let mut grad_b = vec![S::ZERO; self.c_out];

        for ni in 0..n {
            for co in 0..self.c_out {
                let gy_base = (ni * self.c_out + co) * h * w;
                let mut b_acc = S::ZERO;
                for &g in &grad_y.data[gy_base..gy_base + h * w] {
                    b_acc += g;
                }
                grad_b[co] += b_acc;

                for ci in 0..self.c_in {
                    let in_base = (ni * self.c_in + ci) * h * w;
                    for ky in 0..3usize {
                        let dy = ky as isize - 1;
                        let (y0, y1) = row_range(h, dy);
                        for kx in 0..3usize {
                            let dx = kx as isize - 1;
                            let (x0, x1) = row_range(w, dx);
                            if y0 >= y1 || x0 >= x1 {
                                continue;
                            }
                            let len = x1 - x0;
                            let wv = self.weight[self.w_idx(co, ci, ky, kx)];
                            let mut w_acc = S::ZERO;
                            for yo in y0..y1 {
                                let yi = (yo as isize + dy) as usize;
                                let xi = (x0 as isize + dx) as usize;
                                let gy_row =
                                    &grad_y.data[gy_base + yo * w + x0..gy_base + yo * w + x0 + len];
                                let in_row =
                                    &x.data[in_base + yi * w + xi..in_base + yi * w + xi + len];
                                // dL/dw accumulates g·x over the valid region …
                                for (&g, &i) in gy_row.iter().zip(in_row) {
                                    w_acc += g * i;
                                }
                                // … and dL/dx scatters g back through the tap.
                                let gx_row = &mut grad_x.data
                                    [in_base + yi * w + xi..in_base + yi * w + xi + len];
                                for (gx, &g) in gx_row.iter_mut().zip(gy_row) {
                                    *gx += wv * g;
                                }
                            }
                            grad_w[self.w_idx(co, ci, ky, kx)] += w_acc;
                        }
                    }
                }
            }
        }
        Ok((grad_x, grad_w, grad_b))
    }
}

/// Output rows for which the input row shifted by `d` stays in bounds.
#[inline]
fn row_range(extent: usize, d: isize) -> (usize, usize) {
    let start = if d < 0 { 1 } else { 0 };
    let end = if d > 0 { extent - 1 } else { extent };
    (start, end)
}
