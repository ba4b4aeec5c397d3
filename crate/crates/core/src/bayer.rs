//! Bayer color-filter-array layout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the three color filters in a Bayer mosaic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CfaChannel {
    Red,
    Green,
    Blue,
}

impl CfaChannel {
    /// Index into an interleaved RGB triple.
    pub fn rgb_index(self) -> usize {
        match self {
            CfaChannel::Red => 0,
            CfaChannel::Green => 1,
            CfaChannel::Blue => 2,
        }
    }
}

/// The 2x2 color-filter mosaic tiling the sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BayerPattern {
    Rggb,
    Bggr,
    Grbg,
    Gbrg,
}

impl BayerPattern {
    /// Color filter at sensor site `(row, col)`. Pure in `(row % 2, col % 2)`.
    pub fn channel_at(self, row: usize, col: usize) -> CfaChannel {
        let quad = self.quad();
        quad[(row % 2) * 2 + col % 2]
    }

    /// The 2x2 tile in row-major order.
    pub fn quad(self) -> [CfaChannel; 4] {
        use CfaChannel::{Blue as B, Green as G, Red as R};
        match self {
            BayerPattern::Rggb => [R, G, G, B],
            BayerPattern::Bggr => [B, G, G, R],
            BayerPattern::Grbg => [G, R, B, G],
            BayerPattern::Gbrg => [G, B, R, G],
        }
    }

    /// Pattern seen by a subframe whose origin sits at `(row, col)` of this one.
    ///
    /// Odd offsets shift the mosaic phase; crops use this so their metadata
    /// stays truthful.
    pub fn at_offset(self, row: usize, col: usize) -> BayerPattern {
        let c00 = self.channel_at(row, col);
        let c01 = self.channel_at(row, col + 1);
        use CfaChannel::{Blue, Green, Red};
        match (c00, c01) {
            (Red, _) => BayerPattern::Rggb,
            (Blue, _) => BayerPattern::Bggr,
            (Green, Red) => BayerPattern::Grbg,
            (Green, Blue) => BayerPattern::Gbrg,
            (Green, Green) => unreachable!("no Bayer pattern has adjacent greens"),
        }
    }

    /// Wire code used by the HSRW container.
    pub fn code(self) -> u8 {
        match self {
            BayerPattern::Rggb => 0,
            BayerPattern::Bggr => 1,
            BayerPattern::Grbg => 2,
            BayerPattern::Gbrg => 3,
        }
    }

    pub fn from_code(code: u8) -> Result<BayerPattern> {
        match code {
            0 => Ok(BayerPattern::Rggb),
            1 => Ok(BayerPattern::Bggr),
            2 => Ok(BayerPattern::Grbg),
            3 => Ok(BayerPattern::Gbrg),
            other => Err(Error::MalformedHeader(format!(
                "unknown Bayer pattern code {other}"
            ))),
        }
    }

    pub const ALL: [BayerPattern; 4] = [
        BayerPattern::Rggb,
        BayerPattern::Bggr,
        BayerPattern::Grbg,
        BayerPattern::Gbrg,
    ];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_quad_has_one_red_one_blue_two_greens() {
        for pattern in BayerPattern::ALL {
            let quad = pattern.quad();
            let count = |c| quad.iter().filter(|&&q| q == c).count();
            assert_eq!(count(CfaChannel::Red), 1, "{pattern:?}");
            assert_eq!(count(CfaChannel::Green), 2, "{pattern:?}");
            assert_eq!(count(CfaChannel::Blue), 1, "{pattern:?}");
        }
    }

    #[test]
    fn channel_at_is_periodic() {
        for pattern in BayerPattern::ALL {
            for row in 0..6 {
                for col in 0..6 {
                    assert_eq!(
                        pattern.channel_at(row, col),
                        pattern.channel_at(row % 2, col % 2)
                    );
                }
            }
        }
    }

    #[test]
    fn offset_pattern_matches_shifted_lookup() {
        for pattern in BayerPattern::ALL {
            for dy in 0..4 {
                for dx in 0..4 {
                    let shifted = pattern.at_offset(dy, dx);
                    for row in 0..4 {
                        for col in 0..4 {
                            assert_eq!(
                                shifted.channel_at(row, col),
                                pattern.channel_at(row + dy, col + dx)
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn codes_round_trip() {
        for pattern in BayerPattern::ALL {
            assert_eq!(BayerPattern::from_code(pattern.code()).unwrap(), pattern);
        }
        assert!(BayerPattern::from_code(4).is_err());
    }
}
