//! The `.hsrw` raw-frame container.
//!
//! Layout (all multi-byte integers little-endian):
//!
//! ```text
//! offset  size  field
//!      0     4  magic "HSRW"
//!      4     1  version (1)
//!      5     1  Bayer pattern code (0=RGGB, 1=BGGR, 2=GRBG, 3=GBRG)
//!      6     2  reserved, zero
//!      8     4  width  (u32)
//!     12     4  height (u32)
//!     16     2  black_level (u16)
//!     18     2  white_level (u16)
//!     20     8  shutter seconds (f64; 0 = unknown)
//!     28     4  reserved, zero
//!     32     …  width×height samples (u16), row-major
//! ```

use std::fs;
use std::path::Path;

use crate::bayer::BayerPattern;
use crate::error::{Error, Result};
use crate::frame::RawFrame;

pub const MAGIC: [u8; 4] = *b"HSRW";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 32;

/// Serialize a frame to the container byte layout.
pub fn encode(frame: &RawFrame) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + frame.data.len() * 2);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(frame.pattern.code());
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&(frame.width as u32).to_le_bytes());
    out.extend_from_slice(&(frame.height as u32).to_le_bytes());
    out.extend_from_slice(&frame.black_level.to_le_bytes());
    out.extend_from_slice(&frame.white_level.to_le_bytes());
    out.extend_from_slice(&frame.shutter_s.unwrap_or(0.0).to_le_bytes());
    out.extend_from_slice(&[0, 0, 0, 0]);
    for &sample in &frame.data {
        out.extend_from_slice(&sample.to_le_bytes());
    }
    out
}

/// Parse container bytes back into a frame, validating the header and
/// payload length.
pub fn decode(bytes: &[u8]) -> Result<RawFrame> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedData {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    if bytes[0..4] != MAGIC {
        return Err(Error::MalformedHeader(format!(
            "bad magic {:?}",
            &bytes[0..4]
        )));
    }
    if bytes[4] != VERSION {
        return Err(Error::MalformedHeader(format!(
            "unsupported version {}",
            bytes[4]
        )));
    }
    let pattern = BayerPattern::from_code(bytes[5])?;
    let width = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let black_level = u16::from_le_bytes(bytes[16..18].try_into().unwrap());
    let white_level = u16::from_le_bytes(bytes[18..20].try_into().unwrap());
    let shutter_raw = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    let shutter_s = if shutter_raw == 0.0 {
        None
    } else {
        Some(shutter_raw)
    };

    let expected = HEADER_LEN + width * height * 2;
    if bytes.len() < expected {
        return Err(Error::TruncatedData {
            expected,
            actual: bytes.len(),
        });
    }
    let data: Vec<u16> = bytes[HEADER_LEN..expected]
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();

    RawFrame::new(width, height, data, pattern, black_level, white_level, shutter_s)
}

pub fn write_raw(frame: &RawFrame, path: &Path) -> Result<()> {
    fs::write(path, encode(frame))?;
    Ok(())
}

pub fn read_raw(path: &Path) -> Result<RawFrame> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_frame() -> RawFrame {
        let data: Vec<u16> = (0..16).map(|i| 129 + i * 100).collect();
        RawFrame::new(4, 4, data, BayerPattern::Rggb, 129, 4095, Some(0.004)).unwrap()
    }

    #[test]
    fn encode_layout_and_size() {
        let frame = sample_frame();
        let bytes = encode(&frame);
        assert_eq!(bytes.len(), 32 + 4 * 4 * 2);
        assert_eq!(&bytes[0..4], b"HSRW");
        assert_eq!(bytes[4], 1);
        assert_eq!(bytes[5], 0); // RGGB
        assert_eq!(&bytes[8..12], &4u32.to_le_bytes());
        assert_eq!(&bytes[16..18], &129u16.to_le_bytes());
        assert_eq!(&bytes[18..20], &4095u16.to_le_bytes());
    }

    #[test]
    fn round_trip_identity() {
        let frame = sample_frame();
        let back = decode(&encode(&frame)).unwrap();
        assert_eq!(frame, back);
    }

    #[test]
    fn unknown_shutter_encodes_as_zero() {
        let mut frame = sample_frame();
        frame.shutter_s = None;
        let bytes = encode(&frame);
        assert_eq!(&bytes[20..28], &0.0f64.to_le_bytes());
        assert_eq!(decode(&bytes).unwrap().shutter_s, None);
    }

    #[test]
    fn bad_magic_rejected() {
        let mut bytes = encode(&sample_frame());
        bytes[0..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode(&bytes), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn bad_version_rejected() {
        let mut bytes = encode(&sample_frame());
        bytes[4] = 9;
        assert!(matches!(decode(&bytes), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn truncated_payload_rejected() {
        let bytes = encode(&sample_frame());
        // 4×4 frame needs 32 payload bytes; drop one.
        let err = decode(&bytes[..bytes.len() - 1]).unwrap_err();
        match err {
            Error::TruncatedData { expected, actual } => {
                assert_eq!(expected, 64);
                assert_eq!(actual, 63);
            }
            other => panic!("expected TruncatedData, got {other:?}"),
        }
    }

    #[test]
    fn inconsistent_levels_rejected() {
        let mut bytes = encode(&sample_frame());
        bytes[16..18].copy_from_slice(&4095u16.to_le_bytes()); // black == white
        assert!(decode(&bytes).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.hsrw");
        let frame = sample_frame();
        write_raw(&frame, &path).unwrap();
        assert_eq!(read_raw(&path).unwrap(), frame);
        // Deterministic bytes: writing again produces an identical file.
        let first = fs::read(&path).unwrap();
        write_raw(&frame, &path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), first);
    }
}
