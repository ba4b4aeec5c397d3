//! Scene pools the trainers draw from.

use crate::bias_db::BiasFrameDB;
use crate::error::{Error, Result};
use crate::frame::{RawFrame, RgbImage8};

/// One denoiser sample: a clean target and, when synthesis is off, a
/// pre-made noisy input of identical geometry.
#[derive(Debug, Clone)]
pub struct PairEntry {
    pub input: Option<RawFrame>,
    pub target: RawFrame,
}

/// Denoiser training pool. With `synthesize` set, entries carry only
/// clean targets and noisy inputs are generated per step from the noise
/// config and the bias library.
#[derive(Debug, Clone)]
pub struct PairedDataset {
    pub entries: Vec<PairEntry>,
    pub synthesize: bool,
    pub bias_db: Option<BiasFrameDB>,
}

impl PairedDataset {
    /// Pool of clean scenes for on-the-fly synthesis.
    pub fn from_clean_scenes(
        scenes: Vec<RawFrame>,
        bias_db: Option<BiasFrameDB>,
    ) -> Result<Self> {
        let ds = PairedDataset {
            entries: scenes
                .into_iter()
                .map(|target| PairEntry {
                    input: None,
                    target,
                })
                .collect(),
            synthesize: true,
            bias_db,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Pool of fixed (noisy, clean) pairs; no synthesis.
    pub fn from_pairs(pairs: Vec<(RawFrame, RawFrame)>) -> Result<Self> {
        let ds = PairedDataset {
            entries: pairs
                .into_iter()
                .map(|(input, target)| PairEntry {
                    input: Some(input),
                    target,
                })
                .collect(),
            synthesize: false,
            bias_db: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::EmptyInput("paired dataset"));
        }
        for (i, e) in self.entries.iter().enumerate() {
            match (&e.input, self.synthesize) {
                (None, false) => {
                    return Err(Error::InvariantViolation(format!(
                        "entry {i} has no input frame and synthesis is off"
                    )))
                }
                (Some(input), _) if !input.same_geometry(&e.target) => {
                    return Err(Error::DimensionMismatch(format!(
                        "entry {i}: input and target geometries differ"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Deterministic train/validation index split: the tail
    /// `round(frac·n)` entries (at least 1 when frac > 0 and n ≥ 2)
    /// are held out.
    pub fn split(&self, val_frac: f64) -> (Vec<usize>, Vec<usize>) {
        split_indices(self.len(), val_frac)
    }
}

pub(crate) fn split_indices(n: usize, val_frac: f64) -> (Vec<usize>, Vec<usize>) {
    let n_val = if val_frac > 0.0 && n >= 2 {
        ((n as f64 * val_frac).round() as usize).clamp(1, n - 1)
    } else {
        0
    };
    let cut = n - n_val;
    ((0..cut).collect(), (cut..n).collect())
}

/// One Mini-ISP sample: a raw frame, its rendered RGB target, and the
/// white-balance gains that accompany that frame.
#[derive(Debug, Clone)]
pub struct IspPair {
    pub raw: RawFrame,
    pub rgb: RgbImage8,
    pub g_red: f64,
    pub g_blue: f64,
}

#[derive(Debug, Clone)]
pub struct IspDataset {
    pub pairs: Vec<IspPair>,
}

impl IspDataset {
    pub fn new(pairs: Vec<IspPair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyInput("isp dataset"));
        }
        for (i, p) in pairs.iter().enumerate() {
            if p.raw.width != p.rgb.width || p.raw.height != p.rgb.height {
                return Err(Error::DimensionMismatch(format!(
                    "pair {i}: raw {}x{} vs rgb {}x{}",
                    p.raw.width, p.raw.height, p.rgb.width, p.rgb.height
                )));
            }
            if !(p.g_red > 0.0 && p.g_blue > 0.0) {
                return Err(Error::NonPositiveGain {
                    value: p.g_red.min(p.g_blue),
                });
            }
        }
        Ok(IspDataset { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn split(&self, val_frac: f64) -> (Vec<usize>, Vec<usize>) {
        split_indices(self.len(), val_frac)
    }
}
