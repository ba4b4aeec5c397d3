//! Deterministic counter-based random number generation.
//!
//! Every sampling step in the pipeline (white-balance gains, bias-frame
//! picks, shot noise, weight init, crop positions) draws from this
//! generator so a run is replayable from the seed recorded in its
//! manifest. The core is splitmix64: the state is a counter advanced by a
//! fixed odd increment and the output is an integer-only mix of it, which
//! makes streams identical on every platform.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded deterministic generator. Single-owner: clone it or derive
/// sub-streams instead of sharing one across tasks.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: mix(seed) }
    }

    /// Independent sub-stream for `(seed, stream)` pairs, e.g. per image or
    /// per training step. Parallel work ordered by stream index reproduces
    /// regardless of scheduling.
    pub fn derive(seed: u64, stream: u64) -> Self {
        Rng {
            state: mix(mix(seed) ^ stream.wrapping_mul(GOLDEN_GAMMA)),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`; the degenerate interval returns `lo`
    /// without consuming state.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo <= hi, "uniform bounds inverted: [{lo}, {hi})");
        if lo == hi {
            return lo;
        }
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform index in `[0, n)`. Uses rejection sampling so the
    /// distribution is exactly uniform.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index() over empty range");
        let n = n as u64;
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }

    /// Standard normal deviate via Box-Muller (one value per call).
    pub fn normal(&mut self) -> f64 {
        // u1 in (0, 1] keeps the log finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
