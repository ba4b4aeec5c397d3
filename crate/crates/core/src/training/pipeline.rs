//! End-to-end inference: denoise, white balance, render — plus the
//! brightness-gain baseline the denoiser is judged against.

use crate::error::Result;
use crate::frame::{RawFrame, RgbImage8};
use crate::metrics::{psnr, MetricConfig, Planes};
use crate::nn::{MiniIspModel, TinyDenoiser};

use super::isp::{linear_to_tensor, preprocess_for_isp, tensor_to_rgb8};
use super::pack::{pack_bayer, unpack_bayer_like};

/// Exposure compensation by pure gain: (counts − black)·R + black,
/// clamped to the valid range. R is expected to be ≥ 1 (the
/// short-exposure brightness deficit); the arithmetic tolerates any
/// positive value. The reported shutter is scaled by R to reflect the
/// exposure the output emulates.
pub fn gain_baseline(noisy: &RawFrame, ratio_r: f64) -> RawFrame {
    let black = f64::from(noisy.black_level);
    let white = f64::from(noisy.white_level);
    let data = noisy
        .data
        .iter()
        .map(|&v| ((f64::from(v) - black) * ratio_r + black).clamp(0.0, white).round() as u16)
        .collect();
    RawFrame::new(
        noisy.width,
        noisy.height,
        data,
        noisy.pattern,
        noisy.black_level,
        noisy.white_level,
        noisy.shutter_s.map(|s| s * ratio_r),
    )
    .expect("geometry unchanged")
}

/// Mean raw-space PSNR of the gain baseline against clean targets over
/// (noisy, clean) pairs.
pub fn baseline_psnr(pairs: &[(RawFrame, RawFrame)], ratio_r: f64) -> Result<f64> {
    let mut total = 0.0;
    for (noisy, clean) in pairs {
        let restored = gain_baseline(noisy, ratio_r);
        let cfg = MetricConfig::with_peak(clean.range());
        total += psnr(&Planes::from_raw(&restored), &Planes::from_raw(clean), &cfg)?;
    }
    Ok(total / pairs.len() as f64)
}

/// Full render path: pack → denoiser → unpack (saturating at white) →
/// demosaic + white balance → Mini-ISP → clamp → 8-bit RGB. Entirely
/// deterministic given inputs and checkpoints.
pub fn denoise_pipeline(
    noisy: &RawFrame,
    denoiser: &TinyDenoiser<f32>,
    mini_isp: &MiniIspModel<f32>,
    g_red: f64,
    g_blue: f64,
) -> Result<RgbImage8> {
    let packed = pack_bayer::<f32>(noisy)?;
    let denoised = denoiser.forward(&packed)?;
    let mut restored = unpack_bayer_like(&denoised, noisy)?;
    for v in restored.data.iter_mut() {
        *v = (*v).min(restored.white_level);
    }
    let linear = preprocess_for_isp(&restored, g_red, g_blue)?;
    let rendered = mini_isp.forward(&linear_to_tensor::<f32>(&linear))?;
    tensor_to_rgb8(&rendered)
}
