//! Short-exposure noise synthesis and photon-transfer gain estimation.
//!
//! A clean long-exposure raw is degraded in three moves:
//!
//! 1. scale the black-subtracted signal down by the shutter ratio R
//!    (R times shorter exposure collects R times fewer photons);
//! 2. replace the scaled signal with a Poisson draw at the sensor's
//!    system gain K — the signal-dependent (shot) component;
//! 3. add a real dark-room bias frame, black-subtracted, on top — the
//!    signal-independent component, which carries the sensor's streaky
//!    row-correlated read pattern that no parametric model captures.
//!
//! The pedestal is subtracted once up front and re-added once at the end,
//! so it is never double-counted between the signal and the bias frame.

use serde::{Deserialize, Serialize};

use crate::bias_db::BiasFrameDB;
use crate::error::{Error, Result};
use crate::frame::RawFrame;
use crate::rng::Rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthesisConfig {
    /// Shutter amplification ratio R ≥ 1: the clean exposure is R times
    /// longer than the one being simulated.
    pub ratio_r: f64,
    /// System gain in raw counts per photoelectron.
    pub k: f64,
    /// Signal-dependent (shot) noise toggle.
    pub enable_sd: bool,
    /// Signal-independent (bias playback) toggle.
    pub enable_si: bool,
    pub seed: u64,
    /// Shutter bucket to draw bias frames from. When absent, the bucket is
    /// resolved from the clean frame's shutter divided by R.
    #[serde(default)]
    pub shutter_s: Option<f64>,
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio_r >= 1.0) {
            return Err(Error::InvariantViolation(format!(
                "shutter ratio {} must be >= 1",
                self.ratio_r
            )));
        }
        if !(self.k > 0.0) {
            return Err(Error::NonPositiveGain { value: self.k });
        }
        Ok(())
    }
}

/// Sidecar recorded with every synthesized frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisMeta {
    pub ratio_r: f64,
    pub k: f64,
    pub enable_sd: bool,
    pub enable_si: bool,
    pub seed: u64,
    /// Shutter of the bias bucket actually used.
    pub bias_shutter_s: Option<f64>,
    /// Index of the bias frame drawn from that bucket.
    pub bias_frame_index: Option<usize>,
}

impl SynthesisMeta {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// One Poisson draw. Exact CDF inversion below λ = 30; above that a
/// rounded normal approximation, clamped at zero. The switch point is
/// part of the contract — moving it would change every golden output.
pub fn poisson(lambda: f64, rng: &mut Rng) -> f64 {
    debug_assert!(lambda >= 0.0);
    if lambda == 0.0 {
        return 0.0;
    }
    if lambda < 30.0 {
        let u = rng.next_f64();
        let mut k = 0.0f64;
        let mut p = (-lambda).exp();
        let mut cdf = p;
        while u >= cdf {
            k += 1.0;
            p *= lambda / k;
            cdf += p;
            // Far past any mass representable in f64; guards against a
            // pathological u ~ 1 with an underflowed tail.
            if k > 1000.0 {
                break;
            }
        }
        k
    } else {
        (lambda + lambda.sqrt() * rng.normal()).round().max(0.0)
    }
}

/// Replace each black-subtracted count with a Poisson draw of matching
/// mean: out = Poisson(signal/K)·K, so E[out] = signal and
/// Var[out] = K·signal.
pub fn shot_noise(signal: &[f64], k: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    if !(k > 0.0) {
        return Err(Error::NonPositiveGain { value: k });
    }
    if let Some((index, &value)) = signal.iter().enumerate().find(|(_, &v)| v < 0.0) {
        return Err(Error::NegativeSignal { index, value });
    }
    Ok(signal.iter().map(|&s| poisson(s / k, rng) * k).collect())
}

/// Uniformly pick one frame from the bucket for `shutter_s` and return the
/// requested crop plus the index of the chosen frame.
pub fn sample_bias(
    db: &BiasFrameDB,
    shutter_s: f64,
    crop: (usize, usize, usize, usize),
    rng: &mut Rng,
) -> Result<(RawFrame, usize)> {
    let bucket = db
        .bucket(shutter_s)
        .ok_or(Error::UnknownShutter { shutter_s })?;
    let index = rng.index(bucket.frames.len());
    let (x, y, w, h) = crop;
    let patch = bucket.frames[index].crop(x, y, w, h)?;
    Ok((patch, index))
}

/// Resolve which bias bucket a synthesis run should draw from.
///
/// Priority: an explicit `cfg.shutter_s`; otherwise the clean frame's
/// shutter divided by R, snapped to the nearest bucket; otherwise, if the
/// library has exactly one bucket, that one. Ambiguity is an error rather
/// than a silent guess.
fn resolve_bias_shutter(
    clean: &RawFrame,
    cfg: &SynthesisConfig,
    db: &BiasFrameDB,
) -> Result<f64> {
    if db.is_empty() {
        return Err(Error::UnknownShutter {
            shutter_s: cfg.shutter_s.unwrap_or(0.0),
        });
    }
    let target = cfg
        .shutter_s
        .or_else(|| clean.shutter_s.map(|s| s / cfg.ratio_r));
    match target {
        Some(t) => {
            if db.bucket(t).is_some() {
                Ok(t)
            } else {
                // Snap to the nearest recorded shutter; bias statistics
                // drift slowly with exposure so the closest bucket is the
                // best available stand-in.
                Ok(db
                    .shutters()
                    .into_iter()
                    .min_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs()))
                    .unwrap())
            }
        }
        None => {
            let shutters = db.shutters();
            if shutters.len() == 1 {
                Ok(shutters[0])
            } else {
                Err(Error::UnknownShutter { shutter_s: 0.0 })
            }
        }
    }
}

/// Degrade a clean frame into a simulated short exposure.
///
/// The black-subtracted signal is divided by R, optionally shot-noised,
/// optionally summed with a black-subtracted bias frame, then re-pedestaled,
/// rounded and clamped to the valid count range.
pub fn synthesize_noisy(
    clean: &RawFrame,
    cfg: &SynthesisConfig,
    db: &BiasFrameDB,
    rng: &mut Rng,
) -> Result<(RawFrame, SynthesisMeta)> {
    cfg.validate()?;
    let black = f64::from(clean.black_level);
    let white = f64::from(clean.white_level);

    let mut signal: Vec<f64> = clean
        .data
        .iter()
        .map(|&v| (f64::from(v) - black) / cfg.ratio_r)
        .collect();

    if cfg.enable_sd {
        signal = shot_noise(&signal, cfg.k, rng)?;
    }

    let mut bias_shutter = None;
    let mut bias_index = None;
    if cfg.enable_si {
        let shutter = resolve_bias_shutter(clean, cfg, db)?;
        let (patch, index) = sample_bias(db, shutter, (0, 0, clean.width, clean.height), rng)?;
        if !patch.same_geometry(clean) {
            return Err(Error::DimensionMismatch(format!(
                "bias frame {}x{} (black {}) vs clean {}x{} (black {})",
                patch.width,
                patch.height,
                patch.black_level,
                clean.width,
                clean.height,
                clean.black_level,
            )));
        }
        let bias_black = f64::from(patch.black_level);
        for (s, &b) in signal.iter_mut().zip(&patch.data) {
            *s += f64::from(b) - bias_black;
        }
        bias_shutter = Some(shutter);
        bias_index = Some(index);
    }

    let data: Vec<u16> = signal
        .iter()
        .map(|&s| (s + black).clamp(0.0, white).round() as u16)
        .collect();

    let shutter_out = clean.shutter_s.map(|s| s / cfg.ratio_r).or(bias_shutter);
    let frame = RawFrame::new(
        clean.width,
        clean.height,
        data,
        clean.pattern,
        clean.black_level,
        clean.white_level,
        shutter_out,
    )?;
    let meta = SynthesisMeta {
        ratio_r: cfg.ratio_r,
        k: cfg.k,
        enable_sd: cfg.enable_sd,
        enable_si: cfg.enable_si,
        seed: cfg.seed,
        bias_shutter_s: bias_shutter,
        bias_frame_index: bias_index,
    };
    Ok((frame, meta))
}

/// Photon-transfer estimate of the system gain K.
///
/// Input is one group of flat-field frames per illumination level. For
/// each level the per-pixel temporal mean and unbiased temporal variance
/// (both black-subtracted) are averaged spatially into one (μ, σ²) point,
/// and K is the through-origin least-squares slope of σ² against μ. The
/// pedestal and any fixed pattern cancel in the temporal variance, so read
/// noise does not pollute the fit.
pub fn estimate_system_gain(levels: &[Vec<RawFrame>]) -> Result<f64> {
    if levels.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need flats at >= 2 illumination levels, got {}",
            levels.len()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (li, frames) in levels.iter().enumerate() {
        let t = frames.len();
        if t < 2 {
            return Err(Error::InsufficientData(format!(
                "level {li}: need >= 2 frames for temporal variance, got {t}"
            )));
        }
        let first = &frames[0];
        for f in frames {
            if !f.same_geometry(first) {
                return Err(Error::DimensionMismatch(format!(
                    "level {li}: flat frames disagree in geometry"
                )));
            }
        }
        let black = f64::from(first.black_level);
        let pixels = first.data.len();
        let mut mean_sum = 0.0;
        let mut var_sum = 0.0;
        for p in 0..pixels {
            let mut m = 0.0;
            for f in frames {
                m += f64::from(f.data[p]) - black;
            }
            m /= t as f64;
            let mut v = 0.0;
            for f in frames {
                let d = f64::from(f.data[p]) - black - m;
                v += d * d;
            }
            v /= (t - 1) as f64;
            mean_sum += m;
            var_sum += v;
        }
        let mu = mean_sum / pixels as f64;
        let sigma2 = var_sum / pixels as f64;
        num += mu * sigma2;
        den += mu * mu;
    }
    let k = num / den;
    if !(k > 0.0) {
        return Err(Error::NonPositiveSlope { slope: k });
    }
    Ok(k)
}
