//! Model checkpoint container (.hsnn).
//!
//! Layout, all integers little-endian:
//!
//! | offset | field                                  |
//! |--------|----------------------------------------|
//! | 0      | magic `HSNN` (4 bytes)                 |
//! | 4      | format version, u8 (currently 1)       |
//! | 5      | architecture JSON length, u32          |
//! | 9      | architecture JSON bytes                |
//! | …      | weight count, u64                      |
//! | …      | weights, f32 each, flat packing order  |
//! | …      | training-manifest JSON length, u32     |
//! | …      | training-manifest JSON bytes           |
//!
//! Weights are stored bit-exactly (f32 bit patterns), so save → load →
//! forward reproduces outputs bitwise for f32 models. Trailing bytes
//! after the manifest are rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"HSNN";
pub const CHECKPOINT_VERSION: u8 = 1;

/// Shape summary a checkpoint carries so a reader can refuse weights
/// that do not fit the model it is restoring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchDescriptor {
    pub kind: String,
    pub layers: usize,
    pub width: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub residual: bool,
}

/// Provenance of a training run, stored alongside the weights.
/// `input_scaling` documents the range convention the network saw
/// (always "[0,1]" for the trainers in this crate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingManifest {
    pub seed: u64,
    pub steps: u64,
    pub lr0: f64,
    pub loss: String,
    pub input_scaling: String,
    #[serde(default)]
    pub final_val_psnr_db: Option<f64>,
}

impl TrainingManifest {
    pub fn new(seed: u64, steps: u64, lr0: f64, loss: &str) -> Self {
        TrainingManifest {
            seed,
            steps,
            lr0,
            loss: loss.to_string(),
            input_scaling: "[0,1]".to_string(),
            final_val_psnr_db: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub arch: ArchDescriptor,
    pub weights: Vec<f32>,
    pub manifest: TrainingManifest,
}

pub fn encode_checkpoint(
    arch: &ArchDescriptor,
    weights: &[f32],
    manifest: &TrainingManifest,
) -> Vec<u8> {
    let arch_json = serde_json::to_vec(arch).expect("arch serializes");
    let manifest_json = serde_json::to_vec(manifest).expect("manifest serializes");
    let mut out = Vec::with_capacity(9 + arch_json.len() + 8 + weights.len() * 4 + 4 + manifest_json.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.push(CHECKPOINT_VERSION);
    out.extend_from_slice(&(arch_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&arch_json);
    out.extend_from_slice(&(weights.len() as u64).to_le_bytes());
    for w in weights {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&(manifest_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&manifest_json);
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::MalformedCheckpoint(format!(
                "truncated while reading {what}: need {n} bytes at offset {}, have {}",
                self.pos,
                self.buf.len() - self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::MalformedCheckpoint(format!(
            "bad magic {magic:?}, expected {CHECKPOINT_MAGIC:?}"
        )));
    }
    let version = cur.take(1, "version")?[0];
    if version != CHECKPOINT_VERSION {
        return Err(Error::MalformedCheckpoint(format!(
            "unsupported version {version}, expected {CHECKPOINT_VERSION}"
        )));
    }
    let arch_len = cur.u32("arch length")? as usize;
    let arch_bytes = cur.take(arch_len, "arch JSON")?;
    let arch: ArchDescriptor = serde_json::from_slice(arch_bytes)
        .map_err(|e| Error::MalformedCheckpoint(format!("arch JSON: {e}")))?;
    let count = cur.u64("weight count")? as usize;
    let raw = cur.take(count * 4, "weight payload")?;
    let weights = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let manifest_len = cur.u32("manifest length")? as usize;
    let manifest_bytes = cur.take(manifest_len, "manifest JSON")?;
    let manifest: TrainingManifest = serde_json::from_slice(manifest_bytes)
        .map_err(|e| Error::MalformedCheckpoint(format!("manifest JSON: {e}")))?;
    if cur.pos != bytes.len() {
        return Err(Error::MalformedCheckpoint(format!(
            "{} trailing bytes after manifest",
            bytes.len() - cur.pos
        )));
    }
    Ok(Checkpoint {
        arch,
        weights,
        manifest,
    })
}

pub fn save_checkpoint(
    path: &Path,
    arch: &ArchDescriptor,
    weights: &[f32],
    manifest: &TrainingManifest,
) -> Result<()> {
    fs::write(path, encode_checkpoint(arch, weights, manifest))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    decode_checkpoint(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{MiniIspModel, Tensor4, TinyDenoiser};
    use crate::rng::Rng;

    fn arch() -> ArchDescriptor {
        ArchDescriptor {
            kind: "denoiser".into(),
            layers: 6,
            width: 32,
            in_channels: 4,
            out_channels: 4,
            residual: true,
        }
    }

    #[test]
    fn header_layout_is_pinned() {
        let bytes = encode_checkpoint(&arch(), &[1.0, -2.5], &TrainingManifest::new(9, 10, 1e-3, "l1"));
        assert_eq!(&bytes[0..4], b"HSNN");
        assert_eq!(bytes[4], 1);
        let arch_len = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
        let count_off = 9 + arch_len;
        let count = u64::from_le_bytes(bytes[count_off..count_off + 8].try_into().unwrap());
        assert_eq!(count, 2);
        let w0 = f32::from_le_bytes(bytes[count_off + 8..count_off + 12].try_into().unwrap());
        assert_eq!(w0, 1.0);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let weights = vec![0.0f32, -0.0, 1.5e-38, f32::MIN_POSITIVE, 3.14159, -1e30];
        let mut manifest = TrainingManifest::new(42, 2000, 2e-4, "l1");
        manifest.final_val_psnr_db = Some(31.25);
        let bytes = encode_checkpoint(&arch(), &weights, &manifest);
        let ck = decode_checkpoint(&bytes).unwrap();
        assert_eq!(ck.arch, arch());
        assert_eq!(ck.manifest, manifest);
        let got: Vec<u32> = ck.weights.iter().map(|w| w.to_bits()).collect();
        let want: Vec<u32> = weights.iter().map(|w| w.to_bits()).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn corrupted_magic_rejected() {
        let mut bytes = encode_checkpoint(&arch(), &[1.0], &TrainingManifest::new(1, 1, 1e-3, "l2"));
        bytes[0] = b'X';
        assert!(matches!(
            decode_checkpoint(&bytes),
            Err(Error::MalformedCheckpoint(_))
        ));
    }

    #[test]
    fn wrong_version_rejected() {
        let mut bytes = encode_checkpoint(&arch(), &[1.0], &TrainingManifest::new(1, 1, 1e-3, "l2"));
        bytes[4] = 7;
        assert!(matches!(
            decode_checkpoint(&bytes),
            Err(Error::MalformedCheckpoint(_))
        ));
    }

    #[test]
    fn truncation_and_trailing_bytes_rejected() {
        let bytes = encode_checkpoint(&arch(), &[1.0, 2.0], &TrainingManifest::new(1, 1, 1e-3, "l2"));
        for cut in [3, 8, 20, bytes.len() - 1] {
            assert!(
                matches!(
                    decode_checkpoint(&bytes[..cut]),
                    Err(Error::MalformedCheckpoint(_))
                ),
                "cut at {cut} should fail"
            );
        }
        let mut padded = bytes.clone();
        padded.push(0);
        assert!(matches!(
            decode_checkpoint(&padded),
            Err(Error::MalformedCheckpoint(_))
        ));
    }

    #[test]
    fn saved_model_forwards_identically_after_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.hsnn");
        let mut rng = Rng::new(11);
        let model = TinyDenoiser::<f32>::with_shape(4, 8, &mut rng).unwrap();
        let weights = model.gather_params();
        save_checkpoint(&path, &model.arch(), &weights, &TrainingManifest::new(11, 0, 2e-4, "l1"))
            .unwrap();

        let ck = load_checkpoint(&path).unwrap();
        let restored = TinyDenoiser::<f32>::from_checkpoint(&ck).unwrap();
        let x = {
            let data = (0..4 * 36).map(|_| rng.uniform(0.0, 1.0) as f32).collect();
            Tensor4::new(1, 4, 6, 6, data).unwrap()
        };
        let a = model.forward(&x).unwrap();
        let b = restored.forward(&x).unwrap();
        let bits = |t: &Tensor4<f32>| t.data.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn loading_into_wrong_architecture_fails() {
        let mut rng = Rng::new(12);
        let isp = MiniIspModel::<f32>::new(8, &mut rng).unwrap();
        let bytes = encode_checkpoint(
            &isp.arch(),
            &isp.gather_params(),
            &TrainingManifest::new(12, 0, 1e-2, "l2"),
        );
        let ck = decode_checkpoint(&bytes).unwrap();
        // A five-layer ISP payload cannot restore a six-layer denoiser.
        assert!(matches!(
            TinyDenoiser::<f32>::from_checkpoint(&ck),
            Err(Error::ArchMismatch(_))
        ));
        // Tampered weight counts are caught even when the kind matches.
        let mut short = ck.clone();
        short.weights.pop();
        assert!(matches!(
            MiniIspModel::<f32>::from_checkpoint(&short),
            Err(Error::ArchMismatch(_))
        ));
    }
}
