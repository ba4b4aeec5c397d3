//! Desk-scale training loops for the two networks and the inference
//! pipeline that joins them.
//!
//! Both trainers share one skeleton: per step, draw a scene, produce an
//! aligned input/target crop (synthesizing the noisy input on the fly
//! for the denoiser), apply the same flips to both, take one Adam step
//! under a cosine schedule, and append a log line. Runs are bit-for-bit
//! reproducible from the seed and resumable mid-stream.

mod augment;
mod config;
mod dataset;
mod denoiser;
mod isp;
mod pack;
mod pipeline;

pub use augment::{crop_tensor, flip_h, flip_v, stack_batch};
pub use config::{log_to_jsonl, write_jsonl, LossKind, TrainConfig, TrainLogEntry, TrainOutcome};
pub use dataset::{IspDataset, IspPair, PairEntry, PairedDataset};
pub use denoiser::{build_val_pairs, denoiser_val_psnr, train_denoiser, train_denoiser_from};
pub use isp::{
    isp_val_psnr, linear_to_tensor, preprocess_for_isp, rgb8_to_tensor, tensor_to_rgb8,
    train_mini_isp, train_mini_isp_from,
};
pub use pack::{pack_bayer, quad_offsets, unpack_bayer, unpack_bayer_like};
pub use pipeline::{baseline_psnr, denoise_pipeline, gain_baseline};
