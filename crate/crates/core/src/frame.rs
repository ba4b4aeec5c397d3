//! Image containers shared by the whole pipeline.
//!
//! `RawFrame` is the mosaicked sensor image (16-bit container for 12-bit
//! values), `LinearImage` the floating-point linear-light working
//! representation, and `RgbImage8` the 8-bit display format.

use crate::bayer::BayerPattern;
use crate::error::{Error, Result};

/// Single-channel mosaicked sensor image.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFrame {
    pub width: usize,
    pub height: usize,
    /// Row-major raw samples, one per sensor site.
    pub data: Vec<u16>,
    pub pattern: BayerPattern,
    /// Pedestal the sensor reports at zero light.
    pub black_level: u16,
    /// Saturation ceiling in raw counts.
    pub white_level: u16,
    /// Exposure time in seconds, when known.
    pub shutter_s: Option<f64>,
}

impl RawFrame {
    pub fn new(
        width: usize,
        height: usize,
        data: Vec<u16>,
        pattern: BayerPattern,
        black_level: u16,
        white_level: u16,
        shutter_s: Option<f64>,
    ) -> Result<Self> {
        if width % 2 != 0 || height % 2 != 0 || width == 0 || height == 0 {
            return Err(Error::OddDimensions { width, height });
        }
        if data.len() != width * height {
            return Err(Error::InvariantViolation(format!(
                "raw data length {} != {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if black_level >= white_level {
            return Err(Error::InvariantViolation(format!(
                "black level {black_level} >= white level {white_level}"
            )));
        }
        Ok(RawFrame {
            width,
            height,
            data,
            pattern,
            black_level,
            white_level,
            shutter_s,
        })
    }

    /// Constant-valued frame, mostly used by tests and simulations.
    pub fn filled(
        width: usize,
        height: usize,
        value: u16,
        pattern: BayerPattern,
        black_level: u16,
        white_level: u16,
        shutter_s: Option<f64>,
    ) -> Result<Self> {
        Self::new(
            width,
            height,
            vec![value; width * height],
            pattern,
            black_level,
            white_level,
            shutter_s,
        )
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u16) {
        self.data[y * self.width + x] = value;
    }

    /// Dynamic range above the pedestal, in counts.
    pub fn range(&self) -> f64 {
        f64::from(self.white_level) - f64::from(self.black_level)
    }

    /// Extract a sub-frame. The crop's Bayer pattern is phase-corrected for
    /// the origin, so odd origins stay valid.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<RawFrame> {
        if x + w > self.width || y + h > self.height || w == 0 || h == 0 {
            return Err(Error::CropOutOfBounds {
                x,
                y,
                w,
                h,
                frame_w: self.width,
                frame_h: self.height,
            });
        }
        let mut data = Vec::with_capacity(w * h);
        for row in y..y + h {
            let start = row * self.width + x;
            data.extend_from_slice(&self.data[start..start + w]);
        }
        RawFrame::new(
            w,
            h,
            data,
            self.pattern.at_offset(y, x),
            self.black_level,
            self.white_level,
            self.shutter_s,
        )
    }

    /// True when two frames can be combined sample-for-sample.
    pub fn same_geometry(&self, other: &RawFrame) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.pattern == other.pattern
            && self.black_level == other.black_level
    }
}

/// Three-channel linear-light image, row-major interleaved, nominal [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct LinearImage {
    pub width: usize,
    pub height: usize,
    /// Interleaved RGB, length `width * height * 3`.
    pub data: Vec<f64>,
}

impl LinearImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::InvariantViolation(format!(
                "linear data length {} != {}x{}x3",
                data.len(),
                width,
                height
            )));
        }
        Ok(LinearImage {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        LinearImage {
            width,
            height,
            data: vec![0.0; width * height * 3],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * 3 + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * 3 + c] = v;
    }

    /// Map every sample through `f`, keeping dimensions.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> LinearImage {
        LinearImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Check the no-NaN/Inf pipeline invariant.
    pub fn assert_finite(&self) -> Result<()> {
        if let Some(idx) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvariantViolation(format!(
                "non-finite value {} at sample {idx}",
                self.data[idx]
            )));
        }
        Ok(())
    }
}

/// 8-bit display RGB image, row-major interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage8 {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl RgbImage8 {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::InvariantViolation(format!(
                "rgb data length {} != {}x{}x3",
                data.len(),
                width,
                height
            )));
        }
        Ok(RgbImage8 {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * 3 + c]
    }

    /// Convert to linear-domain floats in [0, 1] by dividing by 255.
    ///
    /// This is the display-value scale used by metrics; dequantization for
    /// reconstruction lives in `inverse_isp` and divides by 256 instead.
    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&v| f64::from(v) / 255.0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_frame_rejects_odd_dims() {
        let err = RawFrame::new(3, 4, vec![0; 12], BayerPattern::Rggb, 0, 4095, None);
        assert!(matches!(err, Err(Error::OddDimensions { .. })));
    }

    #[test]
    fn raw_frame_rejects_black_at_or_above_white() {
        let err = RawFrame::new(2, 2, vec![0; 4], BayerPattern::Rggb, 4095, 4095, None);
        assert!(matches!(err, Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn raw_frame_rejects_wrong_length() {
        let err = RawFrame::new(4, 4, vec![0; 15], BayerPattern::Rggb, 0, 4095, None);
        assert!(matches!(err, Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn crop_shifts_bayer_phase() {
        let mut frame =
            RawFrame::filled(6, 6, 100, BayerPattern::Rggb, 0, 4095, Some(0.01)).unwrap();
        frame.set(1, 1, 777);
        let crop = frame.crop(1, 1, 4, 4).unwrap();
        assert_eq!(crop.pattern, BayerPattern::Bggr);
        assert_eq!(crop.get(0, 0), 777);
        assert_eq!(crop.shutter_s, Some(0.01));
    }

    #[test]
    fn crop_out_of_bounds() {
        let frame = RawFrame::filled(4, 4, 0, BayerPattern::Rggb, 0, 4095, None).unwrap();
        assert!(matches!(
            frame.crop(2, 2, 4, 2),
            Err(Error::CropOutOfBounds { .. })
        ));
    }

    #[test]
    fn full_crop_is_identity() {
        let frame = RawFrame::new(
            4,
            2,
            (0..8).collect(),
            BayerPattern::Grbg,
            10,
            4000,
            Some(0.001),
        )
        .unwrap();
        assert_eq!(frame.crop(0, 0, 4, 2).unwrap(), frame);
    }
}
