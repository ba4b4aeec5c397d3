//! Sensor description shared across the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat3::{Mat3, SINGULAR_EPS};

/// Closed interval of white-balance gains to sample from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainRange {
    pub lo: f64,
    pub hi: f64,
}

impl GainRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let r = GainRange { lo, hi };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.lo <= self.hi) {
            return Err(Error::InvariantViolation(format!(
                "gain range [{}, {}] must satisfy 0 < lo <= hi",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

/// Everything the pipeline needs to know about one camera: photon-transfer
/// gain, color matrix, white-balance sampling intervals and the raw value
/// range. Loaded from JSON by the command-line tools.
///
/// The defaults describe the target high-speed camera as far as it is
/// characterized: a 12-bit sensor with its pedestal at 129 counts. Its
/// color matrix is unknown, so the default CCM is identity, and the WB
/// ranges are placeholder guesses meant to be overridden per device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraProfile {
    /// System gain in raw counts per photoelectron.
    pub k: f64,
    pub ccm: Mat3,
    pub wb_red_range: GainRange,
    pub wb_blue_range: GainRange,
    pub digital_gain: f64,
    pub gamma: f64,
    pub black_level: u16,
    pub white_level: u16,
    pub bit_depth: u8,
}

impl Default for CameraProfile {
    fn default() -> Self {
        CameraProfile {
            k: 0.4,
            ccm: Mat3::IDENTITY,
            wb_red_range: GainRange { lo: 1.4, hi: 2.4 },
            wb_blue_range: GainRange { lo: 1.4, hi: 2.4 },
            digital_gain: 1.0,
            gamma: 3.0,
            black_level: 129,
            white_level: 4095,
            bit_depth: 12,
        }
    }
}

impl CameraProfile {
    pub fn validate(&self) -> Result<()> {
        if self.k <= 0.0 {
            return Err(Error::NonPositiveGain { value: self.k });
        }
        if self.digital_gain <= 0.0 {
            return Err(Error::NonPositiveGain {
                value: self.digital_gain,
            });
        }
        if self.gamma <= 0.0 {
            return Err(Error::NonPositiveGain { value: self.gamma });
        }
        if self.ccm.det().abs() <= SINGULAR_EPS {
            return Err(Error::SingularMatrix {
                det: self.ccm.det(),
            });
        }
        self.wb_red_range.validate()?;
        self.wb_blue_range.validate()?;
        if self.black_level >= self.white_level {
            return Err(Error::InvariantViolation(format!(
                "black_level {} must be below white_level {}",
                self.black_level, self.white_level
            )));
        }
        let ceiling = (1u32 << self.bit_depth) - 1;
        if u32::from(self.white_level) > ceiling {
            return Err(Error::InvariantViolation(format!(
                "white_level {} exceeds {}-bit ceiling {}",
                self.white_level, self.bit_depth, ceiling
            )));
        }
        Ok(())
    }

    /// Usable signal span in raw counts.
    pub fn range(&self) -> f64 {
        f64::from(self.white_level) - f64::from(self.black_level)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: CameraProfile = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        self.validate()?;
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
