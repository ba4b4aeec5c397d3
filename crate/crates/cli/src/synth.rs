//! `hsraw synth` — clean raws to simulated short exposures.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Parser;
use hsraw::noise_model::{synthesize_noisy, SynthesisConfig};
use hsraw::{hsrw, BiasFrameDB, Rng};

use crate::io;

#[derive(Parser)]
pub struct Args {
    /// Directory of clean .hsrw frames.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory for noisy .hsrw frames and .json sidecars.
    #[arg(long)]
    pub out: PathBuf,
    /// Bias frame database directory (manifest.json + .hsrw). Required
    /// unless --no-si.
    #[arg(long)]
    pub bias_db: Option<PathBuf>,
    /// Exposure ratio R >= 1 between the clean capture and the simulated one.
    #[arg(long)]
    pub ratio: f64,
    /// System gain in counts per photoelectron.
    #[arg(long, default_value_t = 0.4)]
    pub k: f64,
    /// Run seed; image i uses the (seed, i) stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Disable signal-dependent (shot) noise.
    #[arg(long)]
    pub no_sd: bool,
    /// Disable signal-independent (bias playback) noise.
    #[arg(long)]
    pub no_si: bool,
    /// Bias bucket shutter in seconds. Without it the bucket is resolved
    /// from each clean frame's shutter divided by R.
    #[arg(long)]
    pub shutter: Option<f64>,
}

pub fn run(args: &Args) -> Result<()> {
    let db = match (&args.bias_db, args.no_si) {
        (Some(dir), _) => BiasFrameDB::load(dir)
            .with_context(|| format!("loading bias database {}", dir.display()))?,
        (None, true) => BiasFrameDB::new("none", ""),
        (None, false) => bail!("--bias-db is required unless --no-si is set"),
    };
    let cfg = SynthesisConfig {
        ratio_r: args.ratio,
        k: args.k,
        enable_sd: !args.no_sd,
        enable_si: !args.no_si,
        seed: args.seed,
        shutter_s: args.shutter,
    };
    cfg.validate()?;

    let sources = io::sorted_files(&args.input, ".hsrw")?;
    io::ensure_dir(&args.out)?;
    for (i, src) in sources.iter().enumerate() {
        let clean = hsrw::read_raw(src)?;
        let mut rng = Rng::derive(args.seed, i as u64);
        let (noisy, meta) = synthesize_noisy(&clean, &cfg, &db, &mut rng)
            .with_context(|| format!("synthesizing from {}", src.display()))?;
        let stem = io::stem(src);
        hsrw::write_raw(&noisy, &args.out.join(format!("{stem}.hsrw")))?;
        meta.save(&args.out.join(format!("{stem}.json")))?;
    }
    println!(
        "synthesized {} frames at R={} into {}",
        sources.len(),
        args.ratio,
        args.out.display()
    );
    Ok(())
}
