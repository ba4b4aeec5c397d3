//! `hsraw` — drive the imaging pipeline from the shell.
//!
//! Subcommands mirror the stages of the library: reconstruct linear raws
//! from 8-bit images, synthesize noisy short exposures, analyze noise
//! statistics from frame stacks, score predictions, train the two small
//! networks, and render raw frames back to RGB through trained
//! checkpoints. Every command is deterministic given its seed and
//! writes sidecar metadata sufficient to replay the run.

mod analyze;
mod eval;
mod io;
mod reconstruct;
mod render;
mod synth;
mod train;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "hsraw", version, about = "High-speed-camera raw pipeline tools")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reconstruct linear raw frames (.hsrw + JSON sidecar) from 8-bit
    /// RGB images.
    Reconstruct(reconstruct::Args),
    /// Degrade clean raw frames into simulated short exposures.
    Synth(synth::Args),
    /// Temporal noise statistics and SI/SD energy split of frame stacks.
    Analyze(analyze::Args),
    /// PSNR/SSIM of predictions against ground truth.
    Eval(eval::Args),
    /// Train the raw-domain denoiser from a JSON run config.
    TrainDenoise(train::DenoiseArgs),
    /// Train the compact learned ISP from a JSON run config.
    TrainIsp(train::IspArgs),
    /// Run raw frames through trained denoiser + ISP checkpoints to PNG.
    Render(render::Args),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Reconstruct(args) => reconstruct::run(&args),
        Cmd::Synth(args) => synth::run(&args),
        Cmd::Analyze(args) => analyze::run(&args),
        Cmd::Eval(args) => eval::run(&args),
        Cmd::TrainDenoise(args) => train::run_denoise(&args),
        Cmd::TrainIsp(args) => train::run_isp(&args),
        Cmd::Render(args) => render::run(&args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
