//! `hsraw reconstruct` — 8-bit RGB images to linear raw frames.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use hsraw::inverse_isp::{reconstruct_long_exposure, ReconstructionConfig};
use hsraw::{hsrw, Rng};

use crate::io;

#[derive(Parser)]
pub struct Args {
    /// Directory of .png/.jpg source images.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory for .hsrw frames and .json sidecars.
    #[arg(long)]
    pub out: PathBuf,
    /// Camera profile JSON; defaults to the built-in profile.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Display gamma to invert; defaults to the profile's gamma.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Run seed; image i uses the (seed, i) stream, so order and
    /// parallelism cannot change results.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use deterministic quantization-cell midpoints instead of dither.
    #[arg(long)]
    pub no_dither: bool,
}

pub fn run(args: &Args) -> Result<()> {
    let profile = io::load_profile(args.profile.as_deref())?;
    let mut cfg = ReconstructionConfig::new(profile, args.seed);
    if let Some(g) = args.gamma {
        cfg.gamma = g;
    }
    cfg.dither = !args.no_dither;

    let sources = io::sorted_images(&args.input)?;
    io::ensure_dir(&args.out)?;
    for (i, src) in sources.iter().enumerate() {
        let img = io::load_rgb8(src)?;
        let mut rng = Rng::derive(args.seed, i as u64);
        let (frame, mut meta) = reconstruct_long_exposure(&img, &cfg, &mut rng)
            .with_context(|| format!("reconstructing {}", src.display()))?;
        meta.source_id = src
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let stem = io::stem(src);
        hsrw::write_raw(&frame, &args.out.join(format!("{stem}.hsrw")))?;
        meta.save(&args.out.join(format!("{stem}.json")))?;
        println!(
            "{} -> {stem}.hsrw ({}x{}, g_red {:.4}, g_blue {:.4})",
            meta.source_id, frame.width, frame.height, meta.g_red, meta.g_blue
        );
    }
    println!("reconstructed {} frames into {}", sources.len(), args.out.display());
    Ok(())
}
