//! Desk-scale reproduction of a high-speed-camera raw imaging pipeline.
//!
//! The crate covers four stages that feed each other:
//!
//! 1. [`inverse_isp`] — turn ordinary 8-bit RGB images back into plausible
//!    linear sensor raws (dequantize, degamma, invert color correction and
//!    white balance, remosaic), plus the matching forward ISP.
//! 2. [`noise_model`] — degrade clean raws into realistic short-exposure
//!    captures: exposure-ratio scaling, Poisson shot noise with the
//!    sensor's photon-transfer gain, and playback of real bias frames for
//!    the signal-independent component.
//! 3. [`noise_analysis`] — measure noise from frame stacks and split its
//!    energy into signal-dependent and signal-independent parts.
//! 4. [`nn`] / [`training`] — a small self-contained CNN stack (tensors,
//!    conv layers, Adam, checkpoints) used to train a raw-domain denoiser
//!    and a compact learned ISP on the synthesized pairs, scored by
//!    [`metrics`].
//!
//! Everything is deterministic: a run is fully described by its seed and
//! config, and all randomness flows through the counter-based [`rng::Rng`].

pub mod bayer;
pub mod bias_db;
pub mod error;
pub mod frame;
pub mod hsrw;
pub mod inverse_isp;
pub mod mat3;
pub mod metrics;
pub mod nn;
pub mod noise_analysis;
pub mod noise_model;
pub mod profile;
pub mod rng;
pub mod synthetic;
pub mod training;

pub use bayer::{BayerPattern, CfaChannel};
pub use bias_db::BiasFrameDB;
pub use error::{Error, Result};
pub use frame::{LinearImage, RawFrame, RgbImage8};
pub use profile::CameraProfile;
pub use rng::Rng;
