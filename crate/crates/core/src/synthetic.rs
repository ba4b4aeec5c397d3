//! Synthetic desk-scale inputs.
//!
//! Everything downstream — noise closed loops, denoiser training, the
//! demo CLI — needs image content and bias frames without any camera in
//! the loop. Scenes are smooth random fields (a few low-frequency cosine
//! waves with 1/f-weighted amplitudes plus a soft blob), which gives
//! photographs' large-scale structure: gradients, soft edges, a full
//! tonal sweep, and strong spatial correlation for a denoiser to exploit.
//! Bias frames carry a row-striped fixed pattern on top of per-pixel
//! noise, mimicking the streaky read structure of high-speed sensors.

use crate::bayer::BayerPattern;
use crate::bias_db::BiasFrameDB;
use crate::error::Result;
use crate::frame::{RawFrame, RgbImage8};
use crate::rng::Rng;

/// Smooth random field over a `width`×`height` grid, min-max normalized
/// to [0, 1].
pub fn smooth_field(width: usize, height: usize, rng: &mut Rng) -> Vec<f64> {
    let mut field = vec![0.0f64; width * height];
    let waves = 6;
    for _ in 0..waves {
        let fx = rng.uniform(0.3, 4.0);
        let fy = rng.uniform(0.3, 4.0);
        let freq = (fx * fx + fy * fy).sqrt();
        let amp = rng.uniform(0.5, 1.0) / (0.5 + freq);
        let phase = rng.uniform(0.0, std::f64::consts::TAU);
        for y in 0..height {
            for x in 0..width {
                let arg = std::f64::consts::TAU
                    * (fx * x as f64 / width as f64 + fy * y as f64 / height as f64)
                    + phase;
                field[y * width + x] += amp * arg.cos();
            }
        }
    }
    // One soft blob so scenes are not purely periodic.
    let cx = rng.uniform(0.2, 0.8) * width as f64;
    let cy = rng.uniform(0.2, 0.8) * height as f64;
    let sigma = rng.uniform(0.12, 0.3) * width.min(height) as f64;
    let amp = rng.uniform(0.4, 1.2);
    for y in 0..height {
        for x in 0..width {
            let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            field[y * width + x] += amp * (-d2 / (2.0 * sigma * sigma)).exp();
        }
    }
    let lo = field.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = field.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-12 {
        return vec![0.5; width * height];
    }
    for v in field.iter_mut() {
        *v = (*v - lo) / (hi - lo);
    }
    field
}

/// 8-bit RGB scene with channel values in [32, 240].
///
/// The floor matters: below ~25/255 a cube-law tone curve packs several
/// 8-bit codes into a single 12-bit raw count, so raw-domain round trips
/// cannot resolve them. 32 keeps a margin over that limit while still
/// covering deep shadows to near-white.
pub fn smooth_rgb8(width: usize, height: usize, rng: &mut Rng) -> Result<RgbImage8> {
    let fields = [
        smooth_field(width, height, rng),
        smooth_field(width, height, rng),
        smooth_field(width, height, rng),
    ];
    let mut data = Vec::with_capacity(width * height * 3);
    for i in 0..width * height {
        for f in &fields {
            data.push((32.0 + f[i] * 208.0).round() as u8);
        }
    }
    RgbImage8::new(width, height, data)
}

/// Mosaicked raw scene: three smooth color fields sampled through the
/// CFA, with counts spanning 5–95% of the usable range above the black
/// level. Both greens sample one field, as on a real sensor.
pub fn smooth_scene_raw(
    width: usize,
    height: usize,
    pattern: BayerPattern,
    black_level: u16,
    white_level: u16,
    shutter_s: Option<f64>,
    rng: &mut Rng,
) -> Result<RawFrame> {
    let fields = [
        smooth_field(width, height, rng), // red
        smooth_field(width, height, rng), // green
        smooth_field(width, height, rng), // blue
    ];
    let black = f64::from(black_level);
    let range = f64::from(white_level) - black;
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let c = pattern.channel_at(y, x).rgb_index();
            let f = fields[c][y * width + x];
            data.push((black + (0.05 + 0.9 * f) * range).round() as u16);
        }
    }
    RawFrame::new(width, height, data, pattern, black_level, white_level, shutter_s)
}

/// Bias frame: pedestal plus a per-row offset (the streaky fixed/banded
/// component) plus per-pixel noise, clamped to the valid count range.
pub fn striped_bias(
    width: usize,
    height: usize,
    pattern: BayerPattern,
    black_level: u16,
    white_level: u16,
    shutter_s: Option<f64>,
    row_sigma: f64,
    pixel_sigma: f64,
    rng: &mut Rng,
) -> Result<RawFrame> {
    let black = f64::from(black_level);
    let white = f64::from(white_level);
    let mut data = Vec::with_capacity(width * height);
    for _ in 0..height {
        let row_offset = row_sigma * rng.normal();
        for _ in 0..width {
            let v = black + row_offset + pixel_sigma * rng.normal();
            data.push(v.clamp(0.0, white).round() as u16);
        }
    }
    RawFrame::new(width, height, data, pattern, black_level, white_level, shutter_s)
}

/// Bias library with one bucket at `shutter_s` holding `frames` striped
/// bias frames.
#[allow(clippy::too_many_arguments)]
pub fn striped_bias_db(
    width: usize,
    height: usize,
    pattern: BayerPattern,
    black_level: u16,
    white_level: u16,
    shutter_s: f64,
    frames: usize,
    row_sigma: f64,
    pixel_sigma: f64,
    rng: &mut Rng,
) -> Result<BiasFrameDB> {
    let mut db = BiasFrameDB::new("synthetic", "striped row-noise bias frames");
    for _ in 0..frames {
        let f = striped_bias(
            width,
            height,
            pattern,
            black_level,
            white_level,
            Some(shutter_s),
            row_sigma,
            pixel_sigma,
            rng,
        )?;
        db.insert(shutter_s, f)?;
    }
    Ok(db)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_are_normalized_and_seeded() {
        let mut rng = Rng::new(31);
        let f = smooth_field(32, 24, &mut rng);
        let lo = f.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo >= 0.0 && lo < 1e-9);
        assert!(hi <= 1.0 && hi > 1.0 - 1e-9);
        let g = smooth_field(32, 24, &mut Rng::new(31));
        assert_eq!(f, g);
    }

    #[test]
    fn rgb_scene_respects_value_floor_and_ceiling() {
        let img = smooth_rgb8(48, 48, &mut Rng::new(5)).unwrap();
        assert!(img.data.iter().all(|&v| (32..=240).contains(&v)));
        // A smooth field should still sweep most of that span.
        let min = *img.data.iter().min().unwrap();
        let max = *img.data.iter().max().unwrap();
        assert!(max - min > 150, "span only {}", max - min);
    }

    #[test]
    fn raw_scene_counts_stay_in_band() {
        let f = smooth_scene_raw(64, 64, BayerPattern::Rggb, 129, 4095, Some(1.0 / 120.0), &mut Rng::new(6))
            .unwrap();
        let lo = 129.0 + 0.05 * 3966.0 - 1.0;
        let hi = 129.0 + 0.95 * 3966.0 + 1.0;
        assert!(f
            .data
            .iter()
            .all(|&v| (f64::from(v) >= lo) && (f64::from(v) <= hi)));
    }

    #[test]
    fn bias_rows_are_correlated() {
        let f = striped_bias(
            128,
            128,
            BayerPattern::Rggb,
            129,
            4095,
            Some(1e-3),
            8.0,
            2.0,
            &mut Rng::new(7),
        )
        .unwrap();
        // Row means should scatter far more than sqrt(pixel variance / width)
        // alone would allow, showing the stripe component survives rounding.
        let row_means: Vec<f64> = (0..128)
            .map(|y| (0..128).map(|x| f64::from(f.get(x, y))).sum::<f64>() / 128.0)
            .collect();
        let mean = row_means.iter().sum::<f64>() / 128.0;
        let var = row_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / 128.0;
        assert!(var > 30.0, "row-mean variance {var} too small for sigma 8");
        assert!((mean - 129.0).abs() < 3.0);
    }

    #[test]
    fn bias_db_has_single_bucket() {
        let db = striped_bias_db(
            32,
            32,
            BayerPattern::Rggb,
            129,
            4095,
            1.0 / 960.0,
            4,
            6.0,
            2.0,
            &mut Rng::new(8),
        )
        .unwrap();
        assert_eq!(db.shutters().len(), 1);
        assert_eq!(db.bucket(1.0 / 960.0).unwrap().frames.len(), 4);
    }
}
