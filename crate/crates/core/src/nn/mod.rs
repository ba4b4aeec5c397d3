//! Minimal CNN engine: NCHW tensors, 3×3 same-padding convolution with
//! hand-written backward passes, ReLU, L1/L2 losses, Adam and a cosine
//! schedule, plus the two small architectures the pipeline trains.
//!
//! There is no autodiff graph. The networks here are fixed feed-forward
//! conv chains, so each op carries its exact reverse-mode derivative and
//! the whole engine stays small enough to audit. Everything is generic
//! over the scalar: `f32` for training, `f64` for finite-difference
//! gradient verification.

mod checkpoint;
mod conv;
mod model;
mod ops;
mod optim;
mod tensor;

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, ArchDescriptor,
    Checkpoint, TrainingManifest,
};
pub use conv::Conv2dLayer;
pub use model::{ConvStack, MiniIspModel, StackCache, TinyDenoiser};
pub use ops::{l1_loss, l2_loss, relu_backward, relu_forward};
pub use optim::{AdamState, CosineSchedule};
pub use tensor::Tensor4;

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Floating-point scalar the engine is generic over. Training runs in
/// `f32`; gradient-check tests instantiate the identical code in `f64`.
pub trait Scalar:
    Copy
    + PartialOrd
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + 'static
{
    const ZERO: Self;
    const ONE: Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;
}

impl Scalar for f32 {
    const ZERO: f32 = 0.0;
    const ONE: f32 = 1.0;
    fn from_f64(v: f64) -> f32 {
        v as f32
    }
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
    fn abs(self) -> f32 {
        f32::abs(self)
    }
    fn is_finite(self) -> bool {
        f32::is_finite(self)
    }
}

impl Scalar for f64 {
    const ZERO: f64 = 0.0;
    const ONE: f64 = 1.0;
    fn from_f64(v: f64) -> f64 {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}
