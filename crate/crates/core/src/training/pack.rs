//! Mosaic ↔ packed-tensor conversion.
//!
//! A raw frame packs into a half-resolution 4-channel tensor, one plane
//! per CFA quad position, normalized as (count − black)/(white − black).
//! Channel order is (R, G1, G2, B) where G1 is the green reached first
//! scanning the quad row-major; the denoiser therefore always sees
//! phase-aligned color planes regardless of the underlying pattern.

use crate::bayer::{BayerPattern, CfaChannel};
use crate::error::{Error, Result};
use crate::frame::RawFrame;
use crate::nn::{Scalar, Tensor4};

/// (row, col) offsets inside the 2×2 quad for packed channels
/// (R, G1, G2, B), in that order.
pub fn quad_offsets(pattern: BayerPattern) -> [(usize, usize); 4] {
    let quad = pattern.quad();
    let mut red = (0, 0);
    let mut blue = (0, 0);
    let mut greens = Vec::with_capacity(2);
    for (i, ch) in quad.iter().enumerate() {
        let pos = (i / 2, i % 2);
        match ch {
            CfaChannel::Red => red = pos,
            CfaChannel::Blue => blue = pos,
            CfaChannel::Green => greens.push(pos),
        }
    }
    [red, greens[0], greens[1], blue]
}

/// Frame → (1, 4, h/2, w/2) tensor of normalized values. Values below
/// the black level map to negative numbers; nothing is clamped, so
/// [`unpack_bayer`] can invert the packing bit-exactly.
pub fn pack_bayer<S: Scalar>(frame: &RawFrame) -> Result<Tensor4<S>> {
    if frame.width % 2 != 0 || frame.height % 2 != 0 {
        return Err(Error::OddDimensions {
            width: frame.width,
            height: frame.height,
        });
    }
    let (qh, qw) = (frame.height / 2, frame.width / 2);
    let offsets = quad_offsets(frame.pattern);
    let black = f64::from(frame.black_level);
    let range = frame.range();
    let mut t = Tensor4::zeros(1, 4, qh, qw);
    for (c, &(dy, dx)) in offsets.iter().enumerate() {
        for qy in 0..qh {
            for qx in 0..qw {
                let v = f64::from(frame.get(2 * qx + dx, 2 * qy + dy));
                t.set(0, c, qy, qx, S::from_f64((v - black) / range));
            }
        }
    }
    Ok(t)
}

/// Inverse of [`pack_bayer`]: (1, 4, qh, qw) tensor → full-resolution
/// frame with the given geometry. Values are denormalized, rounded half
/// away from zero and clamped to the u16 domain (not to the white
/// level, so out-of-range inputs survive a round trip).
pub fn unpack_bayer<S: Scalar>(
    t: &Tensor4<S>,
    pattern: BayerPattern,
    black_level: u16,
    white_level: u16,
    shutter_s: Option<f64>,
) -> Result<RawFrame> {
    if t.n != 1 || t.c != 4 {
        return Err(Error::ShapeMismatch(format!(
            "expected a (1, 4, h, w) packed tensor, got ({}, {}, {}, {})",
            t.n, t.c, t.h, t.w
        )));
    }
    let (height, width) = (t.h * 2, t.w * 2);
    let offsets = quad_offsets(pattern);
    let black = f64::from(black_level);
    let range = f64::from(white_level) - black;
    let mut data = vec![0u16; width * height];
    for (c, &(dy, dx)) in offsets.iter().enumerate() {
        for qy in 0..t.h {
            for qx in 0..t.w {
                let v = t.get(0, c, qy, qx).to_f64() * range + black;
                data[(2 * qy + dy) * width + 2 * qx + dx] =
                    v.round().clamp(0.0, f64::from(u16::MAX)) as u16;
            }
        }
    }
    RawFrame::new(width, height, data, pattern, black_level, white_level, shutter_s)
}

/// [`unpack_bayer`] borrowing its geometry from an existing frame.
pub fn unpack_bayer_like<S: Scalar>(t: &Tensor4<S>, like: &RawFrame) -> Result<RawFrame> {
    unpack_bayer(
        t,
        like.pattern,
        like.black_level,
        like.white_level,
        like.shutter_s,
    )
}
