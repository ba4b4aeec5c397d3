//! Minimal 3×3 matrix arithmetic for color transforms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Determinants smaller than this are treated as singular.
pub const SINGULAR_EPS: f64 = 1e-9;

/// Row-major 3×3 matrix. Serializes as a plain nested array so profiles
/// stay hand-editable JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Adjugate-based inverse; fails when |det| ≤ 1e-9.
    pub fn inverse(&self) -> Result<Mat3> {
        let det = self.det();
        if det.abs() <= SINGULAR_EPS {
            return Err(Error::SingularMatrix { det });
        }
        let m = &self.0;
        let inv_det = 1.0 / det;
        let mut out = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                // Cofactor of (c, r) — note the transpose.
                let (r1, r2) = match c {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let (c1, c2) = match r {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let cof = m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
                let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
                out[r][c] = sign * cof * inv_det;
            }
        }
        Ok(Mat3(out))
    }

    #[inline]
    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn mul_mat(&self, other: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                out[r][c] = (0..3).map(|k| self.0[r][k] * other.0[k][c]).sum();
            }
        }
        Mat3(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_inverse_is_identity() {
        let inv = Mat3::IDENTITY.inverse().unwrap();
        assert_eq!(inv, Mat3::IDENTITY);
    }

    #[test]
    fn inverse_times_original_is_identity() {
        let m = Mat3([[0.9, 0.08, 0.02], [0.05, 0.9, 0.05], [0.03, 0.1, 0.87]]);
        let inv = m.inverse().unwrap();
        let prod = m.mul_mat(&inv);
        for r in 0..3 {
            for c in 0..3 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(prod.0[r][c], expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let m = Mat3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 0.0]]);
        assert!(matches!(m.inverse(), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn mul_vec_identity_passthrough() {
        let v = [0.2, 0.5, 0.8];
        assert_eq!(Mat3::IDENTITY.mul_vec(v), v);
    }
}
