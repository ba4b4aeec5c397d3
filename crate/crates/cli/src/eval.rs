//! `hsraw eval` — PSNR/SSIM over prediction/ground-truth directories.

use std::fs;
use std::path::PathBuf;

use anyhow::Result;
use clap::Parser;
use hsraw::metrics::{eval_report, MetricConfig, MetricSpace};

#[derive(Parser)]
pub struct Args {
    /// Directory of predictions (.hsrw for raw space, .png for rgb).
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory of ground truth with matching filenames.
    #[arg(long)]
    pub gt: PathBuf,
    /// Comparison space: raw (black-subtracted, range-normalized counts)
    /// or rgb (8-bit).
    #[arg(long)]
    pub space: MetricSpace,
    /// Report JSON path.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional per-image CSV path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

pub fn run(args: &Args) -> Result<()> {
    let report = eval_report(&args.pred, &args.gt, args.space, &MetricConfig::default())?;
    fs::write(&args.out, report.to_json())?;
    if let Some(csv) = &args.csv {
        fs::write(csv, report.to_csv())?;
    }
    println!(
        "{} pairs in {} space: mean PSNR {:.3} dB, mean SSIM {:.5}",
        report.per_image.len(),
        report.space,
        report.mean_psnr_db,
        report.mean_ssim
    );
    println!("report written to {}", args.out.display());
    Ok(())
}
