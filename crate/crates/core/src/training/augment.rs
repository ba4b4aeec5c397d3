//! Tensor-level crop, flip and batch-stacking used by the trainers.

use crate::error::{Error, Result};
use crate::nn::{Scalar, Tensor4};

/// Spatial crop of every image in the batch: rows y0..y0+h, cols
/// x0..x0+w.
pub fn crop_tensor<S: Scalar>(
    t: &Tensor4<S>,
    x0: usize,
    y0: usize,
    w: usize,
    h: usize,
) -> Result<Tensor4<S>> {
    if x0 + w > t.w || y0 + h > t.h || w == 0 || h == 0 {
        return Err(Error::CropOutOfBounds {
            x: x0,
            y: y0,
            w,
            h,
            frame_w: t.w,
            frame_h: t.h,
        });
    }
    let mut out = Tensor4::zeros(t.n, t.c, h, w);
    for n in 0..t.n {
        for c in 0..t.c {
            for y in 0..h {
                let src = ((n * t.c + c) * t.h + y0 + y) * t.w + x0;
                let dst = ((n * t.c + c) * h + y) * w;
                out.data[dst..dst + w].copy_from_slice(&t.data[src..src + w]);
            }
        }
    }
    Ok(out)
}

/// Mirror left-right.
pub fn flip_h<S: Scalar>(t: &Tensor4<S>) -> Tensor4<S> {
    let mut out = t.clone();
    for n in 0..t.n {
        for c in 0..t.c {
            for y in 0..t.h {
                let base = ((n * t.c + c) * t.h + y) * t.w;
                out.data[base..base + t.w].reverse();
            }
        }
    }
    out
}

/// Mirror top-bottom.
pub fn flip_v<S: Scalar>(t: &Tensor4<S>) -> Tensor4<S> {
    let mut out = t.clone();
    for n in 0..t.n {
        for c in 0..t.c {
            for y in 0..t.h / 2 {
                let a = ((n * t.c + c) * t.h + y) * t.w;
                let b = ((n * t.c + c) * t.h + (t.h - 1 - y)) * t.w;
                for x in 0..t.w {
                    out.data.swap(a + x, b + x);
                }
            }
        }
    }
    out
}

/// Concatenate along the batch axis; all parts must agree in (c, h, w).
pub fn stack_batch<S: Scalar>(parts: &[Tensor4<S>]) -> Result<Tensor4<S>> {
    let first = parts.first().ok_or(Error::EmptyInput("batch parts"))?;
    let n_total: usize = parts.iter().map(|p| p.n).sum();
    let mut out = Tensor4::zeros(n_total, first.c, first.h, first.w);
    let mut off = 0;
    for p in parts {
        if (p.c, p.h, p.w) != (first.c, first.h, first.w) {
            return Err(Error::ShapeMismatch(
                "batch parts disagree in channel/spatial dims".into(),
            ));
        }
        out.data[off..off + p.data.len()].copy_from_slice(&p.data);
        off += p.data.len();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn numbered(n: usize, c: usize, h: usize, w: usize) -> Tensor4<f64> {
        Tensor4::new(n, c, h, w, (0..n * c * h * w).map(|v| v as f64).collect()).unwrap()
    }

    #[test]
    fn crop_matches_direct_indexing() {
        let t = numbered(2, 3, 6, 7);
        let c = crop_tensor(&t, 2, 1, 4, 3).unwrap();
        assert_eq!(c.dims(), (2, 3, 3, 4));
        for n in 0..2 {
            for ch in 0..3 {
                for y in 0..3 {
                    for x in 0..4 {
                        assert_eq!(c.get(n, ch, y, x), t.get(n, ch, y + 1, x + 2));
                    }
                }
            }
        }
        assert!(crop_tensor(&t, 4, 0, 4, 3).is_err());
    }

    #[test]
    fn flips_are_involutions_and_move_corners() {
        let mut rng = Rng::new(9);
        let t = Tensor4::new(
            1,
            2,
            4,
            5,
            (0..40).map(|_| rng.uniform(-1.0, 1.0)).collect(),
        )
        .unwrap();
        assert_eq!(flip_h(&flip_h(&t)).data, t.data);
        assert_eq!(flip_v(&flip_v(&t)).data, t.data);
        let fh = flip_h(&t);
        assert_eq!(fh.get(0, 0, 0, 0), t.get(0, 0, 0, 4));
        let fv = flip_v(&t);
        assert_eq!(fv.get(0, 1, 0, 2), t.get(0, 1, 3, 2));
    }

    #[test]
    fn stack_concatenates_in_order() {
        let a = numbered(1, 2, 2, 2);
        let b = a.clone();
        let s = stack_batch(&[a.clone(), b]).unwrap();
        assert_eq!(s.dims(), (2, 2, 2, 2));
        assert_eq!(s.data[0..8], a.data[..]);
        assert_eq!(s.data[8..16], a.data[..]);

        let odd = numbered(1, 2, 2, 3);
        assert!(stack_batch(&[a, odd]).is_err());
    }
}
