//! The two fixed feed-forward networks, built on a shared conv stack.
//!
//! Parameters are packed flat in a fixed order — for each layer in
//! sequence, the full weight block then the bias block — and every API
//! that moves parameters (optimizer, checkpoints, gradients) uses that
//! same order, so a flat vector is portable across all of them.

use crate::error::{Error, Result};
use crate::rng::Rng;

use super::checkpoint::{ArchDescriptor, Checkpoint};
use super::conv::Conv2dLayer;
use super::ops::{relu_backward, relu_forward};
use super::{Scalar, Tensor4};

pub const MINI_ISP_KIND: &str = "mini_isp";
pub const DENOISER_KIND: &str = "denoiser";

/// A chain of 3×3 conv layers with ReLU between them (none after the
/// last), optionally wrapped in a global residual connection
/// `out = x + chain(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvStack<S: Scalar> {
    pub layers: Vec<Conv2dLayer<S>>,
    pub residual: bool,
}

/// Intermediate activations retained by [`ConvStack::forward_cached`]
/// for the exact backward pass: each layer's input, and each hidden
/// layer's pre-activation (needed for the ReLU mask).
#[derive(Debug, Clone)]
pub struct StackCache<S: Scalar> {
    inputs: Vec<Tensor4<S>>,
    pre_acts: Vec<Tensor4<S>>,
}

impl<S: Scalar> ConvStack<S> {
    /// Kaiming-initialized stack over the channel chain `channels`
    /// (layer i maps channels[i] → channels[i+1]).
    pub fn new(channels: &[usize], residual: bool, rng: &mut Rng) -> Result<Self> {
        if channels.len() < 2 {
            return Err(Error::ShapeMismatch(
                "conv stack needs at least one layer (two channel entries)".into(),
            ));
        }
        if residual && channels[0] != channels[channels.len() - 1] {
            return Err(Error::ShapeMismatch(format!(
                "residual stack needs equal in/out channels, got {} and {}",
                channels[0],
                channels[channels.len() - 1]
            )));
        }
        let layers = channels
            .windows(2)
            .map(|p| Conv2dLayer::kaiming(p[0], p[1], rng))
            .collect();
        Ok(ConvStack { layers, residual })
    }

    pub fn in_channels(&self) -> usize {
        self.layers[0].c_in
    }

    pub fn out_channels(&self) -> usize {
        self.layers[self.layers.len() - 1].c_out
    }

    pub fn hidden_width(&self) -> usize {
        self.layers[0].c_out
    }

    pub fn forward(&self, x: &Tensor4<S>) -> Result<Tensor4<S>> {
        Ok(self.forward_cached(x)?.0)
    }

    pub fn forward_cached(&self, x: &Tensor4<S>) -> Result<(Tensor4<S>, StackCache<S>)> {
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_acts = Vec::with_capacity(last);
        let mut cur = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(&cur)?;
            inputs.push(cur);
            if i < last {
                cur = relu_forward(&z);
                pre_acts.push(z);
            } else {
                cur = z;
            }
        }
        if self.residual {
            for (o, &xi) in cur.data.iter_mut().zip(&x.data) {
                *o += xi;
            }
        }
        Ok((cur, StackCache { inputs, pre_acts }))
    }

    /// Gradients of a scalar loss given its gradient at the stack
    /// output; returns the input gradient and flat parameter gradients
    /// in packing order.
    pub fn backward(
        &self,
        cache: &StackCache<S>,
        grad_out: &Tensor4<S>,
    ) -> Result<(Tensor4<S>, Vec<S>)> {
        if cache.inputs.len() != self.layers.len() {
            return Err(Error::ShapeMismatch(
                "stack cache does not match layer count".into(),
            ));
        }
        let mut per_layer: Vec<(Vec<S>, Vec<S>)> = Vec::with_capacity(self.layers.len());
        let mut gz = grad_out.clone();
        let mut grad_x = None;
        for i in (0..self.layers.len()).rev() {
            let (gx, gw, gb) = self.layers[i].backward(&cache.inputs[i], &gz)?;
            per_layer.push((gw, gb));
            if i > 0 {
                gz = relu_backward(&cache.pre_acts[i - 1], &gx)?;
            } else {
                grad_x = Some(gx);
            }
        }
        per_layer.reverse();
        let mut grad_x = grad_x.expect("at least one layer");
        if self.residual {
            // The skip path feeds the output directly, so its gradient
            // adds on top of the chain's input gradient.
            for (g, &go) in grad_x.data.iter_mut().zip(&grad_out.data) {
                *g += go;
            }
        }
        let mut flat = Vec::with_capacity(self.param_count());
        for (gw, gb) in per_layer {
            flat.extend(gw);
            flat.extend(gb);
        }
        Ok((grad_x, flat))
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.param_count()).sum()
    }

    pub fn gather_params(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(&layer.weight);
            out.extend_from_slice(&layer.bias);
        }
        out
    }

    pub fn scatter_params(&mut self, flat: &[S]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut off = 0;
        for layer in &mut self.layers {
            let wn = layer.weight.len();
            layer.weight.copy_from_slice(&flat[off..off + wn]);
            off += wn;
            let bn = layer.bias.len();
            layer.bias.copy_from_slice(&flat[off..off + bn]);
            off += bn;
        }
        Ok(())
    }

    fn zeroed_like_arch(arch: &ArchDescriptor) -> Result<Self> {
        if arch.layers < 1 {
            return Err(Error::ArchMismatch("descriptor has zero layers".into()));
        }
        let mut channels = Vec::with_capacity(arch.layers + 1);
        channels.push(arch.in_channels);
        for _ in 1..arch.layers {
            channels.push(arch.width);
        }
        channels.push(arch.out_channels);
        let layers = channels
            .windows(2)
            .map(|p| Conv2dLayer::zeros(p[0], p[1]))
            .collect();
        Ok(ConvStack {
            layers,
            residual: arch.residual,
        })
    }
}

/// Learned ISP replacement: five 3×3 conv layers, ReLU after the first
/// four, hidden width `W` (128 by full-size convention; smaller widths
/// are fine and are recorded in checkpoints). Maps 3-channel linear RGB
/// to 3-channel display RGB. No residual path.
#[derive(Debug, Clone, PartialEq)]
pub struct MiniIspModel<S: Scalar> {
    pub stack: ConvStack<S>,
}

impl<S: Scalar> MiniIspModel<S> {
    pub const DEFAULT_WIDTH: usize = 128;

    pub fn new(width: usize, rng: &mut Rng) -> Result<Self> {
        let channels = [3, width, width, width, width, 3];
        Ok(MiniIspModel {
            stack: ConvStack::new(&channels, false, rng)?,
        })
    }

    pub fn width(&self) -> usize {
        self.stack.hidden_width()
    }

    pub fn arch(&self) -> ArchDescriptor {
        ArchDescriptor {
            kind: MINI_ISP_KIND.to_string(),
            layers: self.stack.layers.len(),
            width: self.width(),
            in_channels: 3,
            out_channels: 3,
            residual: false,
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if ck.arch.kind != MINI_ISP_KIND {
            return Err(Error::ArchMismatch(format!(
                "checkpoint holds a '{}' model, not '{MINI_ISP_KIND}'",
                ck.arch.kind
            )));
        }
        if ck.arch.layers != 5 || ck.arch.in_channels != 3 || ck.arch.out_channels != 3 {
            return Err(Error::ArchMismatch(format!(
                "unsupported mini-isp shape: {} layers, {}→{} channels",
                ck.arch.layers, ck.arch.in_channels, ck.arch.out_channels
            )));
        }
        let mut stack = ConvStack::zeroed_like_arch(&ck.arch)?;
        let flat: Vec<S> = ck.weights.iter().map(|&w| S::from_f64(w as f64)).collect();
        stack
            .scatter_params(&flat)
            .map_err(|_| Error::ArchMismatch("weight payload length disagrees with descriptor".into()))?;
        Ok(MiniIspModel { stack })
    }

    pub fn forward(&self, x: &Tensor4<S>) -> Result<Tensor4<S>> {
        self.stack.forward(x)
    }

    pub fn forward_cached(&self, x: &Tensor4<S>) -> Result<(Tensor4<S>, StackCache<S>)> {
        self.stack.forward_cached(x)
    }

    pub fn backward(
        &self,
        cache: &StackCache<S>,
        grad_out: &Tensor4<S>,
    ) -> Result<(Tensor4<S>, Vec<S>)> {
        self.stack.backward(cache, grad_out)
    }

    pub fn param_count(&self) -> usize {
        self.stack.param_count()
    }

    pub fn gather_params(&self) -> Vec<S> {
        self.stack.gather_params()
    }

    pub fn scatter_params(&mut self, flat: &[S]) -> Result<()> {
        self.stack.scatter_params(flat)
    }
}

/// Residual denoiser over 4-channel packed Bayer: `D` conv layers
/// (default 6) of hidden width `W` (default 32), with
/// `out = input + chain(input)`. The final layer starts at zero so an
/// untrained net is exactly the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyDenoiser<S: Scalar> {
    pub stack: ConvStack<S>,
}

impl<S: Scalar> TinyDenoiser<S> {
    pub const DEFAULT_DEPTH: usize = 6;
    pub const DEFAULT_WIDTH: usize = 32;

    pub fn new(rng: &mut Rng) -> Self {
        Self::with_shape(Self::DEFAULT_DEPTH, Self::DEFAULT_WIDTH, rng)
            .expect("default shape is valid")
    }

    pub fn with_shape(depth: usize, width: usize, rng: &mut Rng) -> Result<Self> {
        if depth < 2 {
            return Err(Error::ShapeMismatch(
                "denoiser needs at least two layers".into(),
            ));
        }
        let mut channels = vec![4];
        channels.extend(std::iter::repeat(width).take(depth - 1));
        channels.push(4);
        let mut stack = ConvStack::new(&channels, true, rng)?;
        let last = stack.layers.len() - 1;
        for w in stack.layers[last].weight.iter_mut() {
            *w = S::ZERO;
        }
        for b in stack.layers[last].bias.iter_mut() {
            *b = S::ZERO;
        }
        Ok(TinyDenoiser { stack })
    }

    pub fn depth(&self) -> usize {
        self.stack.layers.len()
    }

    pub fn width(&self) -> usize {
        self.stack.hidden_width()
    }

    pub fn arch(&self) -> ArchDescriptor {
        ArchDescriptor {
            kind: DENOISER_KIND.to_string(),
            layers: self.depth(),
            width: self.width(),
            in_channels: 4,
            out_channels: 4,
            residual: true,
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if ck.arch.kind != DENOISER_KIND {
            return Err(Error::ArchMismatch(format!(
                "checkpoint holds a '{}' model, not '{DENOISER_KIND}'",
                ck.arch.kind
            )));
        }
        if ck.arch.in_channels != 4 || ck.arch.out_channels != 4 || !ck.arch.residual {
            return Err(Error::ArchMismatch(
                "denoiser checkpoints must be residual with 4 channels each way".into(),
            ));
        }
        let mut stack = ConvStack::zeroed_like_arch(&ck.arch)?;
        let flat: Vec<S> = ck.weights.iter().map(|&w| S::from_f64(w as f64)).collect();
        stack
            .scatter_params(&flat)
            .map_err(|_| Error::ArchMismatch("weight payload length disagrees with descriptor".into()))?;
        Ok(TinyDenoiser { stack })
    }

    pub fn forward(&self, x: &Tensor4<S>) -> Result<Tensor4<S>> {
        self.stack.forward(x)
    }

    pub fn forward_cached(&self, x: &Tensor4<S>) -> Result<(Tensor4<S>, StackCache<S>)> {
        self.stack.forward_cached(x)
    }

    pub fn backward(
        &self,
        cache: &StackCache<S>,
        grad_out: &Tensor4<S>,
    ) -> Result<(Tensor4<S>, Vec<S>)> {
        self.stack.backward(cache, grad_out)
    }

    pub fn param_count(&self) -> usize {
        self.stack.param_count()
    }

    pub fn gather_params(&self) -> Vec<S> {
        self.stack.gather_params()
    }

    pub fn scatter_params(&mut self, flat: &[S]) -> Result<()> {
        self.stack.scatter_params(flat)
    }
}
