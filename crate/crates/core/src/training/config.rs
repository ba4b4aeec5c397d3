//! Run configuration and the step log shared by both trainers.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::AdamState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    #[default]
    L1,
    L2,
}

impl LossKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::L1 => "l1",
            LossKind::L2 => "l2",
        }
    }
}

impl FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(LossKind::L1),
            "l2" => Ok(LossKind::L2),
            other => Err(Error::InvariantViolation(format!(
                "unknown loss '{other}', expected l1 or l2"
            ))),
        }
    }
}

/// Knobs for one training run. Serializable so a run can be driven by a
/// JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainConfig {
    /// Optimizer steps. Zero is allowed and returns the model untouched.
    pub steps: u64,
    pub lr0: f64,
    #[serde(default)]
    pub lr_min: f64,
    #[serde(default = "default_batch")]
    pub batch: usize,
    /// Square crop side in full-resolution pixels; must be even so crops
    /// stay quad-aligned.
    pub crop: usize,
    #[serde(default = "default_true")]
    pub flips: bool,
    pub seed: u64,
    /// Validation cadence in steps (0 = only after the final step).
    #[serde(default = "default_val_every")]
    pub val_every: u64,
    #[serde(default)]
    pub loss: LossKind,
    /// Fraction of the scene pool held out for validation.
    #[serde(default = "default_val_frac")]
    pub val_frac: f64,
}

fn default_batch() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_val_every() -> u64 {
    100
}

fn default_val_frac() -> f64 {
    0.15
}

impl TrainConfig {
    /// Denoiser defaults: 2,000 steps of L1 at lr 1e-3 on 64-pixel crops.
    pub fn denoiser_defaults(seed: u64) -> Self {
        TrainConfig {
            steps: 2000,
            lr0: 1e-3,
            lr_min: 0.0,
            batch: 1,
            crop: 64,
            flips: true,
            seed,
            val_every: 100,
            loss: LossKind::L1,
            val_frac: 0.15,
        }
    }

    /// Mini-ISP defaults: 5,000 steps of L2 at lr 3e-3, four 24-pixel
    /// crops per step. The small-crop/larger-batch shape matters: the
    /// regression target is (near-)pointwise in color space, so a step
    /// that averages four scene regions converges measurably farther
    /// than one large crop at the same pixel throughput.
    pub fn mini_isp_defaults(seed: u64) -> Self {
        TrainConfig {
            steps: 5000,
            lr0: 3e-3,
            lr_min: 0.0,
            batch: 4,
            crop: 24,
            flips: true,
            seed,
            val_every: 250,
            loss: LossKind::L2,
            val_frac: 0.15,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.crop < 2 || self.crop % 2 != 0 {
            return Err(Error::InvariantViolation(format!(
                "crop {} must be even and >= 2",
                self.crop
            )));
        }
        if self.batch < 1 {
            return Err(Error::InvariantViolation("batch must be >= 1".into()));
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(Error::InvariantViolation(format!(
                "lr0 {} must be positive and finite",
                self.lr0
            )));
        }
        if !(self.lr_min >= 0.0 && self.lr_min <= self.lr0) {
            return Err(Error::InvariantViolation(format!(
                "lr_min {} must lie in [0, lr0]",
                self.lr_min
            )));
        }
        if !(0.0..1.0).contains(&self.val_frac) {
            return Err(Error::InvariantViolation(format!(
                "val_frac {} must lie in [0, 1)",
                self.val_frac
            )));
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: TrainConfig = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One line of the training log. `val_psnr` appears only on validation
/// steps.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainLogEntry {
    pub step: u64,
    pub lr: f64,
    pub loss: f64,
    #[serde(rename = "val_psnr", skip_serializing_if = "Option::is_none", default)]
    pub val_psnr_db: Option<f64>,
}

/// Result of a training run. The optimizer state rides along so a run
/// can be resumed and reproduce the trajectory it would have had.
#[derive(Debug, Clone)]
pub struct TrainOutcome<M> {
    pub model: M,
    pub log: Vec<TrainLogEntry>,
    pub optimizer: AdamState,
    pub final_val_psnr_db: Option<f64>,
}

pub fn log_to_jsonl(log: &[TrainLogEntry]) -> String {
    let mut out = String::new();
    for entry in log {
        out.push_str(&serde_json::to_string(entry).expect("log entry serializes"));
        out.push('\n');
    }
    out
}

pub fn write_jsonl(path: &Path, log: &[TrainLogEntry]) -> Result<()> {
    fs::write(path, log_to_jsonl(log))?;
    Ok(())
}
