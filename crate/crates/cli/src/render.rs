//! `hsraw render` — raw frames through trained checkpoints to PNG.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use hsraw::inverse_isp::ReconstructionMeta;
use hsraw::nn::{load_checkpoint, MiniIspModel, TinyDenoiser};
use hsraw::training::denoise_pipeline;
use hsraw::hsrw;

use crate::io;

#[derive(Parser)]
pub struct Args {
    /// Directory of .hsrw frames to render.
    #[arg(long)]
    pub input: PathBuf,
    /// Denoiser checkpoint (.hsnn).
    #[arg(long)]
    pub denoiser: PathBuf,
    /// Mini-ISP checkpoint (.hsnn).
    #[arg(long)]
    pub mini_isp: PathBuf,
    /// Output directory for .png renders.
    #[arg(long)]
    pub out: PathBuf,
    /// Red white-balance gain when a frame has no gain sidecar.
    #[arg(long, default_value_t = 1.0)]
    pub g_red: f64,
    /// Blue white-balance gain when a frame has no gain sidecar.
    #[arg(long, default_value_t = 1.0)]
    pub g_blue: f64,
}

pub fn run(args: &Args) -> Result<()> {
    let denoiser = TinyDenoiser::<f32>::from_checkpoint(
        &load_checkpoint(&args.denoiser)
            .with_context(|| format!("loading {}", args.denoiser.display()))?,
    )?;
    let mini_isp = MiniIspModel::<f32>::from_checkpoint(
        &load_checkpoint(&args.mini_isp)
            .with_context(|| format!("loading {}", args.mini_isp.display()))?,
    )?;

    let sources = io::sorted_files(&args.input, ".hsrw")?;
    io::ensure_dir(&args.out)?;
    for src in &sources {
        let frame = hsrw::read_raw(src)?;
        // Per-frame recorded gains win over the command-line fallback.
        let (g_red, g_blue) = match ReconstructionMeta::load(&src.with_extension("json")) {
            Ok(meta) => (meta.g_red, meta.g_blue),
            Err(_) => (args.g_red, args.g_blue),
        };
        let rendered = denoise_pipeline(&frame, &denoiser, &mini_isp, g_red, g_blue)
            .with_context(|| format!("rendering {}", src.display()))?;
        io::save_png(&rendered, &args.out.join(format!("{}.png", io::stem(src))))?;
    }
    println!("rendered {} frames into {}", sources.len(), args.out.display());
    Ok(())
}
