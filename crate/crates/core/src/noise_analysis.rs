//! Temporal noise statistics and the signal-dependent/independent energy
//! split.
//!
//! Given a stack of frames of the same scene at the same shutter, the
//! per-pixel temporal mean X̄ and energy E (population variance over the
//! stack) describe the noise without needing ground truth. Binning E by
//! X̄ gives the energy curve f(X̄); the flat part of that curve is the
//! signal-independent floor, measured directly from dark bias stacks, and
//! whatever sits above it is attributed to the signal-dependent (shot)
//! component. Weighting both parts by the scene's intensity distribution
//! produces per-shutter expected energies and the SI share of the total.
//!
//! All statistics use raw counts with the pedestal left in, and the
//! energy uses the 1/T normalizer — both deliberate, so the numbers are
//! comparable with the definitions the analysis is built around. Keep the
//! 1/T bias in mind when comparing against true variances at small T; the
//! gain fit in the noise model uses the unbiased form instead.

use crate::bias_db::BiasFrameDB;
use crate::error::{Error, Result};
use crate::frame::RawFrame;

/// T ≥ 2 frames of identical geometry and shutter.
#[derive(Debug, Clone)]
pub struct FrameStack {
    frames: Vec<RawFrame>,
}

impl FrameStack {
    pub fn new(frames: Vec<RawFrame>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::TooFewFrames {
                needed: 2,
                got: frames.len(),
            });
        }
        let first = &frames[0];
        for (i, f) in frames.iter().enumerate().skip(1) {
            if !f.same_geometry(first) || f.shutter_s != first.shutter_s {
                return Err(Error::DimensionMismatch(format!(
                    "stack frame {i} disagrees with frame 0 in geometry or shutter"
                )));
            }
        }
        Ok(FrameStack { frames })
    }

    pub fn frames(&self) -> &[RawFrame] {
        &self.frames
    }

    pub fn t(&self) -> usize {
        self.frames.len()
    }

    /// Reference frame for geometry and levels.
    pub fn first(&self) -> &RawFrame {
        &self.frames[0]
    }
}

/// Equal-width binning over a raw-count interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Binning {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

pub const DEFAULT_BINS: usize = 64;

impl Binning {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || n == 0 {
            return Err(Error::InvariantViolation(format!(
                "binning [{lo}, {hi}] with {n} bins is degenerate"
            )));
        }
        Ok(Binning { lo, hi, n })
    }

    /// The conventional layout: bins spanning the sensor's usable range.
    pub fn over_levels(black_level: u16, white_level: u16, n: usize) -> Self {
        Binning {
            lo: f64::from(black_level),
            hi: f64::from(white_level),
            n,
        }
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / self.n as f64)
            .collect()
    }

    /// Bin index for a value; out-of-range values land in the end bins.
    pub fn index(&self, x: f64) -> usize {
        let t = (x - self.lo) / (self.hi - self.lo);
        ((t * self.n as f64) as isize).clamp(0, self.n as isize - 1) as usize
    }
}

/// Noise energy as a function of mean raw value. Empty bins carry a NaN
/// energy and a zero count; consumers must skip them.
#[derive(Debug, Clone)]
pub struct NoiseEnergyCurve {
    pub bin_edges: Vec<f64>,
    pub mean_energy: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct EnergyDecomposition {
    pub bin_edges: Vec<f64>,
    /// Signal-independent floor applied to every bin.
    pub e_si_const: f64,
    /// Signal-dependent remainder, floored at zero (NaN in empty bins).
    pub f_sd: Vec<f64>,
    /// Pre-floor remainder kept for diagnostics; sampling noise can push
    /// bins slightly below the bias floor.
    pub f_sd_raw: Vec<f64>,
    /// The constant SI curve, bin-aligned with `f_sd`.
    pub f_si: Vec<f64>,
}

/// Normalized distribution of mean raw values.
#[derive(Debug, Clone)]
pub struct IntensityHistogram {
    pub bin_edges: Vec<f64>,
    pub mass: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Per-pixel temporal mean and noise energy:
/// X̄ = (1/T)Σ X_t, E = (1/T)Σ (X_t − X̄)².
pub fn temporal_stats(stack: &FrameStack) -> (Vec<f64>, Vec<f64>) {
    let t = stack.t() as f64;
    let pixels = stack.first().data.len();
    let mut mean = vec![0.0f64; pixels];
    let mut energy = vec![0.0f64; pixels];
    for f in stack.frames() {
        for (m, &v) in mean.iter_mut().zip(&f.data) {
            *m += f64::from(v);
        }
    }
    for m in mean.iter_mut() {
        *m /= t;
    }
    for f in stack.frames() {
        for ((e, m), &v) in energy.iter_mut().zip(&mean).zip(&f.data) {
            let d = f64::from(v) - m;
            *e += d * d;
        }
    }
    for e in energy.iter_mut() {
        *e /= t;
    }
    (mean, energy)
}

/// Pool every pixel of every stack and average its energy within
/// equal-width bins of the temporal mean.
pub fn noise_energy_function(stacks: &[FrameStack], binning: Binning) -> Result<NoiseEnergyCurve> {
    if stacks.is_empty() {
        return Err(Error::EmptyInput("noise_energy_function needs >= 1 stack"));
    }
    let mut sums = vec![0.0f64; binning.n];
    let mut counts = vec![0u64; binning.n];
    for stack in stacks {
        let (mean, energy) = temporal_stats(stack);
        for (m, e) in mean.iter().zip(&energy) {
            let b = binning.index(*m);
            sums[b] += e;
            counts[b] += 1;
        }
    }
    let mean_energy = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
        .collect();
    Ok(NoiseEnergyCurve {
        bin_edges: binning.edges(),
        mean_energy,
        counts,
    })
}

/// Signal-independent energy: spatial mean of the temporal energy map of
/// the bias bucket at `shutter_s`.
pub fn bias_energy(db: &BiasFrameDB, shutter_s: f64) -> Result<f64> {
    let bucket = db
        .bucket(shutter_s)
        .ok_or(Error::UnknownShutter { shutter_s })?;
    let stack = FrameStack::new(bucket.frames.clone())?;
    let (_, energy) = temporal_stats(&stack);
    Ok(energy.iter().sum::<f64>() / energy.len() as f64)
}

/// Split the measured curve into a constant SI floor and the SD remainder.
pub fn decompose(curve: &NoiseEnergyCurve, e_si_const: f64) -> EnergyDecomposition {
    let n = curve.mean_energy.len();
    let mut f_sd = Vec::with_capacity(n);
    let mut f_sd_raw = Vec::with_capacity(n);
    for (e, &c) in curve.mean_energy.iter().zip(&curve.counts) {
        if c == 0 {
            f_sd.push(f64::NAN);
            f_sd_raw.push(f64::NAN);
        } else {
            f_sd_raw.push(e - e_si_const);
            f_sd.push((e - e_si_const).max(0.0));
        }
    }
    EnergyDecomposition {
        bin_edges: curve.bin_edges.clone(),
        e_si_const,
        f_sd,
        f_sd_raw,
        f_si: vec![e_si_const; n],
    }
}

/// Normalized histogram of per-pixel temporal means.
pub fn intensity_histogram(stacks: &[FrameStack], binning: Binning) -> Result<IntensityHistogram> {
    if stacks.is_empty() {
        return Err(Error::EmptyInput("intensity_histogram needs >= 1 stack"));
    }
    let mut counts = vec![0u64; binning.n];
    let mut total = 0u64;
    for stack in stacks {
        let (mean, _) = temporal_stats(stack);
        for m in &mean {
            counts[binning.index(*m)] += 1;
            total += 1;
        }
    }
    let mass = counts
        .iter()
        .map(|&c| c as f64 / total as f64)
        .collect();
    Ok(IntensityHistogram {
        bin_edges: binning.edges(),
        mass,
        counts,
    })
}

/// Expected per-shutter energies: the decomposed curves weighted by the
/// intensity distribution. Bins the curve never saw contribute zero.
pub fn expected_energies(
    p: &IntensityHistogram,
    decomp: &EnergyDecomposition,
) -> Result<(f64, f64)> {
    if p.bin_edges != decomp.bin_edges {
        return Err(Error::BinMismatch(format!(
            "histogram has {} bins, decomposition {}",
            p.bin_edges.len().saturating_sub(1),
            decomp.bin_edges.len().saturating_sub(1)
        )));
    }
    let mut e_sd = 0.0;
    let mut e_si = 0.0;
    for b in 0..decomp.f_sd.len() {
        if p.mass[b] == 0.0 || decomp.f_sd[b].is_nan() {
            continue;
        }
        e_sd += p.mass[b] * decomp.f_sd[b];
        e_si += p.mass[b] * decomp.f_si[b];
    }
    Ok((e_sd, e_si))
}

/// Share of the total noise energy attributed to the signal-independent
/// component.
pub fn si_ratio(e_sd: f64, e_si: f64) -> Result<f64> {
    let total = e_sd + e_si;
    if !(total > 0.0) {
        return Err(Error::ZeroTotalEnergy);
    }
    Ok(e_si / total)
}
