//! Library of dark-room bias frames, bucketed by shutter speed.
//!
//! On disk a database is a directory of `.hsrw` files plus a
//! `manifest.json` that groups filenames under their shutter seconds:
//!
//! ```json
//! {
//!   "device": "hsc-lab-01",
//!   "notes": "lens capped, 2024-11 collection",
//!   "buckets": { "0.004": ["bias_0004_000.hsrw", "bias_0004_001.hsrw"] }
//! }
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::RawFrame;
use crate::hsrw;

/// One shutter bucket: every frame shares geometry, pattern and black level.
#[derive(Debug, Clone)]
pub struct BiasBucket {
    pub shutter_s: f64,
    pub frames: Vec<RawFrame>,
}

#[derive(Debug, Clone, Default)]
pub struct BiasFrameDB {
    pub device: String,
    pub notes: String,
    buckets: Vec<BiasBucket>,
}

/// Shutter keys within this relative tolerance refer to the same bucket;
/// covers decimal round-trips of values like 1/500 s.
fn shutter_matches(key: f64, query: f64) -> bool {
    (key - query).abs() <= 1e-12 + 1e-6 * key.abs()
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    #[serde(default)]
    device: String,
    #[serde(default)]
    notes: String,
    buckets: BTreeMap<String, Vec<String>>,
}

impl BiasFrameDB {
    pub fn new(device: impl Into<String>, notes: impl Into<String>) -> Self {
        BiasFrameDB {
            device: device.into(),
            notes: notes.into(),
            buckets: Vec::new(),
        }
    }

    /// Add a frame to the bucket for `shutter_s`, creating the bucket on
    /// first use. Rejects frames whose geometry disagrees with the bucket.
    pub fn insert(&mut self, shutter_s: f64, frame: RawFrame) -> Result<()> {
        if !(shutter_s > 0.0 && shutter_s.is_finite()) {
            return Err(Error::InvariantViolation(format!(
                "shutter {shutter_s} must be positive and finite"
            )));
        }
        if let Some(bucket) = self
            .buckets
            .iter_mut()
            .find(|b| shutter_matches(b.shutter_s, shutter_s))
        {
            let first = &bucket.frames[0];
            if !first.same_geometry(&frame) {
                return Err(Error::DimensionMismatch(format!(
                    "bias frame {}x{} {:?} black={} does not match bucket {}x{} {:?} black={}",
                    frame.width,
                    frame.height,
                    frame.pattern,
                    frame.black_level,
                    first.width,
                    first.height,
                    first.pattern,
                    first.black_level,
                )));
            }
            bucket.frames.push(frame);
        } else {
            self.buckets.push(BiasBucket {
                shutter_s,
                frames: vec![frame],
            });
            self.buckets
                .sort_by(|a, b| a.shutter_s.total_cmp(&b.shutter_s));
        }
        Ok(())
    }

    pub fn bucket(&self, shutter_s: f64) -> Option<&BiasBucket> {
        self.buckets
            .iter()
            .find(|b| shutter_matches(b.shutter_s, shutter_s))
    }

    pub fn buckets(&self) -> &[BiasBucket] {
        &self.buckets
    }

    pub fn shutters(&self) -> Vec<f64> {
        self.buckets.iter().map(|b| b.shutter_s).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    /// Load a database directory (`manifest.json` + `.hsrw` files).
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join("manifest.json");
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&manifest_path)?)?;
        let mut db = BiasFrameDB::new(manifest.device, manifest.notes);
        for (key, files) in &manifest.buckets {
            let shutter_s: f64 = key.parse().map_err(|_| {
                Error::MalformedHeader(format!("manifest bucket key {key:?} is not a number"))
            })?;
            if files.is_empty() {
                return Err(Error::InvariantViolation(format!(
                    "manifest bucket {key} lists no frames"
                )));
            }
            for file in files {
                db.insert(shutter_s, hsrw::read_raw(&dir.join(file))?)?;
            }
        }
        Ok(db)
    }

    /// Write the database out as a fresh directory (created if missing).
    /// Filenames are regenerated deterministically from bucket order.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut manifest = Manifest {
            device: self.device.clone(),
            notes: self.notes.clone(),
            buckets: BTreeMap::new(),
        };
        for (bi, bucket) in self.buckets.iter().enumerate() {
            let mut files = Vec::with_capacity(bucket.frames.len());
            for (fi, frame) in bucket.frames.iter().enumerate() {
                let name = format!("bias_b{bi:02}_f{fi:04}.hsrw");
                hsrw::write_raw(frame, &dir.join(&name))?;
                files.push(name);
            }
            manifest.buckets.insert(format!("{}", bucket.shutter_s), files);
        }
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)?,
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayer::BayerPattern;

    fn bias_frame(fill: u16) -> RawFrame {
        RawFrame::filled(8, 6, fill, BayerPattern::Rggb, 129, 4095, Some(0.002)).unwrap()
    }

    #[test]
    fn insert_and_lookup_with_float_tolerance() {
        let mut db = BiasFrameDB::new("cam", "");
        db.insert(0.002, bias_frame(130)).unwrap();
        db.insert(0.002, bias_frame(131)).unwrap();
        db.insert(0.004, bias_frame(132)).unwrap();
        assert_eq!(db.buckets().len(), 2);
        assert_eq!(db.bucket(0.002).unwrap().frames.len(), 2);
        // 1/500 recomputed through a decimal string still matches.
        assert!(db.bucket(0.002000000001).is_some());
        assert!(db.bucket(0.003).is_none());
    }

    #[test]
    fn mismatched_geometry_rejected() {
        let mut db = BiasFrameDB::new("cam", "");
        db.insert(0.002, bias_frame(130)).unwrap();
        let other =
            RawFrame::filled(4, 4, 130, BayerPattern::Rggb, 129, 4095, Some(0.002)).unwrap();
        assert!(matches!(
            db.insert(0.002, other),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn save_load_round_trip() {
        let mut db = BiasFrameDB::new("hsc-lab-01", "capped lens");
        db.insert(0.002, bias_frame(130)).unwrap();
        db.insert(0.002, bias_frame(140)).unwrap();
        db.insert(0.01, bias_frame(135)).unwrap();

        let dir = tempfile::tempdir().unwrap();
        db.save(dir.path()).unwrap();
        let back = BiasFrameDB::load(dir.path()).unwrap();

        assert_eq!(back.device, "hsc-lab-01");
        assert_eq!(back.notes, "capped lens");
        assert_eq!(back.shutters(), vec![0.002, 0.01]);
        assert_eq!(back.bucket(0.002).unwrap().frames, db.bucket(0.002).unwrap().frames);
        assert_eq!(back.bucket(0.01).unwrap().frames, db.bucket(0.01).unwrap().frames);
    }

    #[test]
    fn rejects_nonpositive_shutter() {
        let mut db = BiasFrameDB::new("cam", "");
        assert!(db.insert(0.0, bias_frame(130)).is_err());
        assert!(db.insert(-1.0, bias_frame(130)).is_err());
    }
}
