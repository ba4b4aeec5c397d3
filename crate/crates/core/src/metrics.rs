//! PSNR and SSIM, plus the paired-directory evaluation report.
//!
//! Raw-space comparisons run on black-subtracted counts with the sensor's
//! usable range as the peak, so scores are comparable across bit depths.
//! RGB-space comparisons run on 8-bit values with peak 255. SSIM uses the
//! standard Gaussian-window formulation (11×11, σ 1.5, k1 0.01, k2 0.03),
//! sliding over fully-interior windows only.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{LinearImage, RgbImage8};
use crate::frame::RawFrame;
use crate::hsrw;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Dynamic range of the compared values.
    pub peak: f64,
    pub ssim_window: usize,
    pub ssim_sigma: f64,
    pub k1: f64,
    pub k2: f64,
    /// Score reported for a perfect match, where PSNR diverges.
    pub psnr_cap: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            peak: 1.0,
            ssim_window: 11,
            ssim_sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            psnr_cap: 100.0,
        }
    }
}

impl MetricConfig {
    pub fn with_peak(peak: f64) -> Self {
        MetricConfig {
            peak,
            ..MetricConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak > 0.0) {
            return Err(Error::InvariantViolation(format!(
                "metric peak {} must be positive",
                self.peak
            )));
        }
        if self.ssim_window < 3 || self.ssim_window % 2 == 0 {
            return Err(Error::InvariantViolation(format!(
                "SSIM window {} must be odd and >= 3",
                self.ssim_window
            )));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0) {
            return Err(Error::InvariantViolation(
                "SSIM stabilizers k1, k2 must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Channel-planar float view the metrics operate on. Conversions exist
/// from every image type in the pipeline; raw frames become one
/// black-subtracted plane.
#[derive(Debug, Clone)]
pub struct Planes {
    pub width: usize,
    pub height: usize,
    pub planes: Vec<Vec<f64>>,
}

impl Planes {
    pub fn from_linear(img: &LinearImage) -> Planes {
        let mut planes = vec![Vec::with_capacity(img.width * img.height); 3];
        for px in img.data.chunks_exact(3) {
            for (c, &v) in px.iter().enumerate() {
                planes[c].push(v);
            }
        }
        Planes {
            width: img.width,
            height: img.height,
            planes,
        }
    }

    pub fn from_rgb8(img: &RgbImage8) -> Planes {
        let mut planes = vec![Vec::with_capacity(img.width * img.height); 3];
        for px in img.data.chunks_exact(3) {
            for (c, &v) in px.iter().enumerate() {
                planes[c].push(f64::from(v));
            }
        }
        Planes {
            width: img.width,
            height: img.height,
            planes,
        }
    }

    pub fn from_raw(frame: &RawFrame) -> Planes {
        let black = f64::from(frame.black_level);
        Planes {
            width: frame.width,
            height: frame.height,
            planes: vec![frame.data.iter().map(|&v| f64::from(v) - black).collect()],
        }
    }

    fn check_compatible(&self, other: &Planes) -> Result<()> {
        if self.width != other.width
            || self.height != other.height
            || self.planes.len() != other.planes.len()
        {
            return Err(Error::DimensionMismatch(format!(
                "{}x{}x{} vs {}x{}x{}",
                self.width,
                self.height,
                self.planes.len(),
                other.width,
                other.height,
                other.planes.len()
            )));
        }
        Ok(())
    }
}

pub fn psnr(a: &Planes, b: &Planes, cfg: &MetricConfig) -> Result<f64> {
    cfg.validate()?;
    a.check_compatible(b)?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (pa, pb) in a.planes.iter().zip(&b.planes) {
        for (&x, &y) in pa.iter().zip(pb) {
            let d = x - y;
            sum += d * d;
            n += 1;
        }
    }
    let mse = sum / n as f64;
    if mse == 0.0 {
        return Ok(cfg.psnr_cap);
    }
    Ok(10.0 * (cfg.peak * cfg.peak / mse).log10())
}

/// Normalized 1-D Gaussian tap weights; the 2-D window is their outer
/// product.
pub fn gaussian_window(n: usize, sigma: f64) -> Vec<f64> {
    let half = (n / 2) as f64;
    let mut k: Vec<f64> = (0..n)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    for v in k.iter_mut() {
        *v /= sum;
    }
    k
}

/// Valid-mode separable filtering: horizontal pass then vertical.
fn filter_valid(plane: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let ow = w - n + 1;
    let oh = h - n + 1;
    let mut tmp = vec![0.0f64; ow * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            let mut s = 0.0;
            for (i, &kv) in k.iter().enumerate() {
                s += row[x + i] * kv;
            }
            tmp[y * ow + x] = s;
        }
    }
    let mut out = vec![0.0f64; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut s = 0.0;
            for (i, &kv) in k.iter().enumerate() {
                s += tmp[(y + i) * ow + x] * kv;
            }
            out[y * ow + x] = s;
        }
    }
    out
}

fn ssim_plane(a: &[f64], b: &[f64], w: usize, h: usize, cfg: &MetricConfig) -> f64 {
    let k = gaussian_window(cfg.ssim_window, cfg.ssim_sigma);
    let c1 = (cfg.k1 * cfg.peak) * (cfg.k1 * cfg.peak);
    let c2 = (cfg.k2 * cfg.peak) * (cfg.k2 * cfg.peak);

    let a2: Vec<f64> = a.iter().map(|&v| v * v).collect();
    let b2: Vec<f64> = b.iter().map(|&v| v * v).collect();
    let ab: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| x * y).collect();

    let mu_a = filter_valid(a, w, h, &k);
    let mu_b = filter_valid(b, w, h, &k);
    let e_a2 = filter_valid(&a2, w, h, &k);
    let e_b2 = filter_valid(&b2, w, h, &k);
    let e_ab = filter_valid(&ab, w, h, &k);

    let mut sum = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = e_a2[i] - ma * ma;
        let vb = e_b2[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
            / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    sum / mu_a.len() as f64
}

pub fn ssim(a: &Planes, b: &Planes, cfg: &MetricConfig) -> Result<f64> {
    cfg.validate()?;
    a.check_compatible(b)?;
    if a.width < cfg.ssim_window || a.height < cfg.ssim_window {
        return Err(Error::ImageTooSmall {
            width: a.width,
            height: a.height,
            window: cfg.ssim_window,
        });
    }
    let mut sum = 0.0;
    for (pa, pb) in a.planes.iter().zip(&b.planes) {
        sum += ssim_plane(pa, pb, a.width, a.height, cfg);
    }
    Ok(sum / a.planes.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricSpace {
    /// `.hsrw` pairs scored on black-subtracted counts.
    Raw,
    /// `.png` pairs scored on 8-bit values.
    Rgb,
}

impl std::str::FromStr for MetricSpace {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(MetricSpace::Raw),
            "rgb" => Ok(MetricSpace::Rgb),
            other => Err(Error::InvariantViolation(format!(
                "metric space must be raw or rgb, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairScore {
    pub name: String,
    pub psnr_db: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub space: String,
    pub per_image: Vec<PairScore>,
    pub mean_psnr_db: f64,
    pub mean_ssim: f64,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,psnr_db,ssim\n");
        for s in &self.per_image {
            out.push_str(&format!("{},{},{}\n", s.name, s.psnr_db, s.ssim));
        }
        out.push_str(&format!("mean,{},{}\n", self.mean_psnr_db, self.mean_ssim));
        out
    }
}

fn sorted_files_with_ext(dir: &Path, ext: &str) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(ext) {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

fn load_png(path: &Path) -> Result<RgbImage8> {
    let img = image::open(path)
        .map_err(|e| Error::ImageDecode(format!("{}: {e}", path.display())))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    RgbImage8::new(w, h, img.into_raw())
}

/// Score every ground-truth file against its same-named prediction.
/// `cfg` supplies the SSIM/cap knobs; the peak is forced per space
/// (usable raw range, or 255).
pub fn eval_report(
    pred_dir: &Path,
    gt_dir: &Path,
    space: MetricSpace,
    cfg: &MetricConfig,
) -> Result<EvalReport> {
    let ext = match space {
        MetricSpace::Raw => ".hsrw",
        MetricSpace::Rgb => ".png",
    };
    let gt_names = sorted_files_with_ext(gt_dir, ext)?;
    let pred_names = sorted_files_with_ext(pred_dir, ext)?;
    if gt_names.is_empty() {
        return Err(Error::EmptyInput("no ground-truth images to score"));
    }
    for name in &pred_names {
        if !gt_names.contains(name) {
            return Err(Error::MissingPair(format!("{name} has no ground truth")));
        }
    }

    let mut per_image = Vec::with_capacity(gt_names.len());
    for name in &gt_names {
        let pred_path = pred_dir.join(name);
        if !pred_path.exists() {
            return Err(Error::MissingPair(format!("{name} has no prediction")));
        }
        let (a, b, peak) = match space {
            MetricSpace::Raw => {
                let gt = hsrw::read_raw(&gt_dir.join(name))?;
                let pred = hsrw::read_raw(&pred_path)?;
                let peak = gt.range();
                (Planes::from_raw(&pred), Planes::from_raw(&gt), peak)
            }
            MetricSpace::Rgb => {
                let gt = load_png(&gt_dir.join(name))?;
                let pred = load_png(&pred_path)?;
                (Planes::from_rgb8(&pred), Planes::from_rgb8(&gt), 255.0)
            }
        };
        let cfg = MetricConfig { peak, ..cfg.clone() };
        per_image.push(PairScore {
            name: name.clone(),
            psnr_db: psnr(&a, &b, &cfg)?,
            ssim: ssim(&a, &b, &cfg)?,
        });
    }
    let n = per_image.len() as f64;
    let mean_psnr_db = per_image.iter().map(|s| s.psnr_db).sum::<f64>() / n;
    let mean_ssim = per_image.iter().map(|s| s.ssim).sum::<f64>() / n;
    Ok(EvalReport {
        space: match space {
            MetricSpace::Raw => "raw".into(),
            MetricSpace::Rgb => "rgb".into(),
        },
        per_image,
        mean_psnr_db,
        mean_ssim,
    })
}
