//! Reconstruction of linear raw frames from processed 8-bit RGB, and the
//! matching forward ISP.
//!
//! A display image has been demosaiced, gained, white-balanced,
//! color-corrected and gamma-compressed. Running those steps backwards
//! yields a plausible long-exposure sensor raw to use as clean ground
//! truth. Two details matter at desk scale:
//!
//! * The 8-bit source has only 256 levels, which would leave a comb of
//!   empty bins in the raw histogram. [`dequantize`] therefore spreads
//!   each value across its quantization cell with uniform dither.
//! * The display gamma is inverted with a plain power law (default
//!   exponent 3); there is no tone-mapping stage in either direction.
//!
//! The forward chain ([`forward_isp`]) exists so reconstruction can be
//! validated end-to-end: re-rendering a reconstructed raw must land close
//! to the source image.

use serde::{Deserialize, Serialize};

use crate::bayer::CfaChannel;
use crate::error::{Error, Result};
use crate::frame::{LinearImage, RawFrame, RgbImage8};
use crate::profile::CameraProfile;
use crate::rng::Rng;

#[derive(Debug, Clone)]
pub struct ReconstructionConfig {
    /// Display gamma to invert. Kept separate from the profile so a
    /// reconstruction sweep can deviate from the sensor description.
    pub gamma: f64,
    pub profile: CameraProfile,
    /// Uniform dither inside each 8-bit quantization cell. Disable only
    /// for bit-exact debugging; off means the deterministic cell midpoint.
    pub dither: bool,
    pub seed: u64,
}

impl ReconstructionConfig {
    pub fn new(profile: CameraProfile, seed: u64) -> Self {
        ReconstructionConfig {
            gamma: profile.gamma,
            profile,
            dither: true,
            seed,
        }
    }
}

/// Sidecar written next to each reconstructed frame; everything needed to
/// replay or audit the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionMeta {
    pub source_id: String,
    pub gamma: f64,
    pub g_red: f64,
    pub g_blue: f64,
    pub digital_gain: f64,
    pub seed: u64,
}

impl ReconstructionMeta {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Lift 8-bit values into [0,1) floats. With dither each value v becomes
/// (v + u)/256, u ~ U[0,1), filling its whole quantization cell; without,
/// the cell midpoint (v + 0.5)/256.
pub fn dequantize(img: &RgbImage8, rng: &mut Rng, dither: bool) -> LinearImage {
    let mut data = Vec::with_capacity(img.data.len());
    for &v in &img.data {
        let u = if dither { rng.next_f64() } else { 0.5 };
        data.push((f64::from(v) + u) / 256.0);
    }
    LinearImage {
        width: img.width,
        height: img.height,
        data,
    }
}

pub fn gamma_decompress(img: &LinearImage, gamma: f64) -> Result<LinearImage> {
    if gamma <= 0.0 {
        return Err(Error::NonPositiveGain { value: gamma });
    }
    check_nonnegative(img, "gamma_decompress")?;
    Ok(img.map(|v| v.powf(gamma)))
}

pub fn gamma_compress(img: &LinearImage, gamma: f64) -> Result<LinearImage> {
    if gamma <= 0.0 {
        return Err(Error::NonPositiveGain { value: gamma });
    }
    check_nonnegative(img, "gamma_compress")?;
    Ok(img.map(|v| v.powf(1.0 / gamma)))
}

fn check_nonnegative(img: &LinearImage, op: &'static str) -> Result<()> {
    if img.data.iter().any(|&v| v < 0.0) {
        return Err(Error::NegativeInput { op });
    }
    Ok(())
}

/// Map every pixel through the inverse of the color-correction matrix.
pub fn invert_ccm(img: &LinearImage, ccm: &crate::mat3::Mat3) -> Result<LinearImage> {
    let inv = ccm.inverse()?;
    Ok(apply_matrix(img, &inv))
}

pub fn apply_ccm(img: &LinearImage, ccm: &crate::mat3::Mat3) -> LinearImage {
    apply_matrix(img, ccm)
}

fn apply_matrix(img: &LinearImage, m: &crate::mat3::Mat3) -> LinearImage {
    let mut out = img.clone();
    for px in out.data.chunks_exact_mut(3) {
        let v = m.mul_vec([px[0], px[1], px[2]]);
        px.copy_from_slice(&v);
    }
    out
}

/// Draw one white-balance gain pair from the profile's intervals; green
/// is the reference channel and stays at 1. Red is drawn before blue.
pub fn sample_wb_gains(profile: &CameraProfile, rng: &mut Rng) -> (f64, f64) {
    let g_red = rng.uniform(profile.wb_red_range.lo, profile.wb_red_range.hi);
    let g_blue = rng.uniform(profile.wb_blue_range.lo, profile.wb_blue_range.hi);
    (g_red, g_blue)
}

pub fn invert_white_balance(img: &LinearImage, g_red: f64, g_blue: f64) -> Result<LinearImage> {
    check_gains(g_red, g_blue)?;
    Ok(scale_rb(img, 1.0 / g_red, 1.0 / g_blue))
}

pub fn apply_white_balance(img: &LinearImage, g_red: f64, g_blue: f64) -> Result<LinearImage> {
    check_gains(g_red, g_blue)?;
    Ok(scale_rb(img, g_red, g_blue))
}

fn check_gains(g_red: f64, g_blue: f64) -> Result<()> {
    for g in [g_red, g_blue] {
        if g <= 0.0 {
            return Err(Error::NonPositiveGain { value: g });
        }
    }
    Ok(())
}

fn scale_rb(img: &LinearImage, sr: f64, sb: f64) -> LinearImage {
    let mut out = img.clone();
    for px in out.data.chunks_exact_mut(3) {
        px[0] *= sr;
        px[2] *= sb;
    }
    out
}

pub fn invert_gain(img: &LinearImage, digital_gain: f64) -> Result<LinearImage> {
    if digital_gain <= 0.0 {
        return Err(Error::NonPositiveGain {
            value: digital_gain,
        });
    }
    Ok(img.map(|v| v / digital_gain))
}

pub fn apply_gain(img: &LinearImage, digital_gain: f64) -> Result<LinearImage> {
    if digital_gain <= 0.0 {
        return Err(Error::NonPositiveGain {
            value: digital_gain,
        });
    }
    Ok(img.map(|v| v * digital_gain))
}

/// Sample the CFA: each site keeps only the channel its color filter
/// passes, mapped to integer counts between the black and white levels.
/// Negative intermediates (possible after the inverse color matrix) are
/// clamped to zero here, at the very end of the chain.
pub fn mosaic(img: &LinearImage, profile: &CameraProfile, pattern: crate::bayer::BayerPattern) -> Result<RawFrame> {
    if img.width % 2 != 0 || img.height % 2 != 0 {
        return Err(Error::OddDimensions {
            width: img.width,
            height: img.height,
        });
    }
    let range = profile.range();
    let mut data = Vec::with_capacity(img.width * img.height);
    for row in 0..img.height {
        for col in 0..img.width {
            let ch = pattern.channel_at(row, col);
            let v = img.get(col, row, ch.rgb_index()).clamp(0.0, 1.0);
            // Half-away-from-zero rounding keeps golden frames stable.
            data.push((v * range).round() as u16 + profile.black_level);
        }
    }
    RawFrame::new(
        img.width,
        img.height,
        data,
        pattern,
        profile.black_level,
        profile.white_level,
        None,
    )
}

/// Bilinear demosaic with edge replication. Native sites keep their own
/// sample; missing channels average the same-channel sites of the 3×3
/// neighborhood, which reproduces the classic half/quarter-weight kernels
/// in the interior. Output is normalized to [0,1] by the frame's levels
/// (clamped below at 0; saturated sites may sit slightly above 1).
pub fn demosaic_bilinear(frame: &RawFrame) -> LinearImage {
    let (w, h) = (frame.width, frame.height);
    let black = f64::from(frame.black_level);
    let range = frame.range();
    let norm = |raw: u16| ((f64::from(raw) - black) / range).max(0.0);

    let mut out = LinearImage::zeros(w, h);
    for row in 0..h {
        for col in 0..w {
            let native = frame.pattern.channel_at(row, col);
            for ch in [CfaChannel::Red, CfaChannel::Green, CfaChannel::Blue] {
                let value = if ch == native {
                    norm(frame.get(col, row))
                } else {
                    let mut sum = 0.0;
                    let mut count = 0u32;
                    for dr in -1i64..=1 {
                        for dc in -1i64..=1 {
                            let rr = (row as i64 + dr).clamp(0, h as i64 - 1) as usize;
                            let cc = (col as i64 + dc).clamp(0, w as i64 - 1) as usize;
                            if frame.pattern.channel_at(rr, cc) == ch {
                                sum += norm(frame.get(cc, rr));
                                count += 1;
                            }
                        }
                    }
                    // A clamped 3×3 window always spans a full 2×2 quad,
                    // so every channel is represented.
                    sum / f64::from(count)
                };
                out.set(col, row, ch.rgb_index(), value);
            }
        }
    }
    out
}

/// Full unprocessing chain: dequantize → inverse gamma → inverse color
/// matrix → inverse white balance (gains sampled here) → inverse digital
/// gain → mosaic. The returned metadata records the sampled gains so the
/// forward rendering is reproducible.
pub fn reconstruct_long_exposure(
    img: &RgbImage8,
    cfg: &ReconstructionConfig,
    rng: &mut Rng,
) -> Result<(RawFrame, ReconstructionMeta)> {
    cfg.profile.validate()?;
    let dense = dequantize(img, rng, cfg.dither);
    let linear = gamma_decompress(&dense, cfg.gamma)?;
    let cam = invert_ccm(&linear, &cfg.profile.ccm)?;
    let (g_red, g_blue) = sample_wb_gains(&cfg.profile, rng);
    let unbalanced = invert_white_balance(&cam, g_red, g_blue)?;
    let sensor = invert_gain(&unbalanced, cfg.profile.digital_gain)?;
    sensor.assert_finite()?;
    let frame = mosaic(&sensor, &cfg.profile, default_pattern())?;
    let meta = ReconstructionMeta {
        source_id: String::new(),
        gamma: cfg.gamma,
        g_red,
        g_blue,
        digital_gain: cfg.profile.digital_gain,
        seed: cfg.seed,
    };
    Ok((frame, meta))
}

/// The CFA layout of the target device is not publicly documented; RGGB
/// is the conventional default and reconstruction always emits it.
/// Captured frames carry their own layout in the container header.
pub fn default_pattern() -> crate::bayer::BayerPattern {
    crate::bayer::BayerPattern::Rggb
}

/// Forward rendering used as the reconstruction test oracle and to make
/// display targets: demosaic → digital gain → white balance → color
/// matrix → gamma compression → 8-bit quantization. Values are clamped
/// to [0,1] after the color matrix, so the power law never sees
/// negatives.
pub fn forward_isp(frame: &RawFrame, g_red: f64, g_blue: f64, profile: &CameraProfile) -> Result<RgbImage8> {
    let linear = demosaic_bilinear(frame);
    let gained = apply_gain(&linear, profile.digital_gain)?;
    let balanced = apply_white_balance(&gained, g_red, g_blue)?;
    let corrected = apply_ccm(&balanced, &profile.ccm);
    let clamped = corrected.map(|v| v.clamp(0.0, 1.0));
    let display = gamma_compress(&clamped, profile.gamma)?;
    let data = display.data.iter().map(|&v| (v * 255.0).round() as u8).collect();
    RgbImage8::new(frame.width, frame.height, data)
}
