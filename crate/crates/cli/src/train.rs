//! `hsraw train-denoise` / `hsraw train-isp` — run-config driven training.
//!
//! Both commands read one JSON run config, train from scratch, and leave
//! three artifacts in the output directory: the checkpoint, the step log
//! as JSONL, and the fully-defaulted config actually used.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Parser;
use hsraw::inverse_isp::ReconstructionMeta;
use hsraw::nn::{save_checkpoint, MiniIspModel, TinyDenoiser, TrainingManifest};
use hsraw::noise_model::SynthesisConfig;
use hsraw::training::{
    train_denoiser, train_mini_isp, write_jsonl, IspDataset, IspPair, PairedDataset, TrainConfig,
    TrainLogEntry,
};
use hsraw::{hsrw, BiasFrameDB, Rng};
use serde::{Deserialize, Serialize};

use crate::io;

#[derive(Parser)]
pub struct DenoiseArgs {
    /// JSON run config: {"train": {...}, "synthesis": {...}}.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory of clean .hsrw scenes.
    #[arg(long)]
    pub scenes: PathBuf,
    /// Bias frame database; required when synthesis enables the
    /// signal-independent component.
    #[arg(long)]
    pub bias_db: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Network depth (conv layers); default matches the stock denoiser.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Hidden width in channels; default matches the stock denoiser.
    #[arg(long)]
    pub width: Option<usize>,
}

#[derive(Parser)]
pub struct IspArgs {
    /// JSON run config: {"train": {...}}.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory of .hsrw frames with .json gain sidecars.
    #[arg(long)]
    pub scenes: PathBuf,
    /// Directory of target RGB images named like the sidecar source_id
    /// (or the frame stem).
    #[arg(long)]
    pub targets: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Hidden width in channels.
    #[arg(long, default_value_t = 32)]
    pub width: usize,
}

#[derive(Serialize, Deserialize)]
struct DenoiseRunConfig {
    train: TrainConfig,
    synthesis: SynthesisConfig,
}

#[derive(Serialize, Deserialize)]
struct IspRunConfig {
    train: TrainConfig,
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

fn finish(
    out_dir: &Path,
    checkpoint_name: &str,
    config_json: String,
    log: &[TrainLogEntry],
    arch: &hsraw::nn::ArchDescriptor,
    weights: &[f32],
    manifest: &TrainingManifest,
) -> Result<()> {
    io::ensure_dir(out_dir)?;
    save_checkpoint(&out_dir.join(checkpoint_name), arch, weights, manifest)?;
    write_jsonl(&out_dir.join("train_log.jsonl"), log)?;
    fs::write(out_dir.join("run_config.json"), config_json)?;
    Ok(())
}

pub fn run_denoise(args: &DenoiseArgs) -> Result<()> {
    let cfg: DenoiseRunConfig = read_config(&args.config)?;
    cfg.train.validate()?;
    cfg.synthesis.validate()?;

    let scenes = io::sorted_files(&args.scenes, ".hsrw")?
        .iter()
        .map(|p| Ok(hsrw::read_raw(p)?))
        .collect::<Result<Vec<_>>>()?;
    let db = args
        .bias_db
        .as_ref()
        .map(|dir| BiasFrameDB::load(dir))
        .transpose()
        .context("loading bias database")?;
    let dataset = PairedDataset::from_clean_scenes(scenes, db)?;

    let mut init_rng = Rng::new(cfg.train.seed);
    let model = TinyDenoiser::<f32>::with_shape(
        args.depth.unwrap_or(TinyDenoiser::<f32>::DEFAULT_DEPTH),
        args.width.unwrap_or(TinyDenoiser::<f32>::DEFAULT_WIDTH),
        &mut init_rng,
    )?;

    let outcome = train_denoiser(&dataset, &cfg.synthesis, model, &cfg.train)?;
    let mut manifest = TrainingManifest::new(
        cfg.train.seed,
        cfg.train.steps,
        cfg.train.lr0,
        cfg.train.loss.as_str(),
    );
    manifest.final_val_psnr_db = outcome.final_val_psnr_db;
    finish(
        &args.out,
        "denoiser.hsnn",
        serde_json::to_string_pretty(&cfg)?,
        &outcome.log,
        &outcome.model.arch(),
        &outcome.model.gather_params(),
        &manifest,
    )?;
    match outcome.final_val_psnr_db {
        Some(v) => println!(
            "trained denoiser for {} steps: validation PSNR {v:.3} dB",
            cfg.train.steps
        ),
        None => println!("trained denoiser for {} steps (no validation split)", cfg.train.steps),
    }
    println!("artifacts in {}", args.out.display());
    Ok(())
}

/// Target image for one reconstructed frame: the sidecar's recorded
/// source file when present, else `<stem>.png`.
fn target_for(targets: &Path, meta: &ReconstructionMeta, stem: &str) -> PathBuf {
    if !meta.source_id.is_empty() {
        let candidate = targets.join(&meta.source_id);
        if candidate.exists() {
            return candidate;
        }
    }
    targets.join(format!("{stem}.png"))
}

pub fn run_isp(args: &IspArgs) -> Result<()> {
    let cfg: IspRunConfig = read_config(&args.config)?;
    cfg.train.validate()?;

    let mut pairs = Vec::new();
    for path in io::sorted_files(&args.scenes, ".hsrw")? {
        let stem = io::stem(&path);
        let raw = hsrw::read_raw(&path)?;
        let meta_path = path.with_extension("json");
        let meta = ReconstructionMeta::load(&meta_path)
            .with_context(|| format!("reading gain sidecar {}", meta_path.display()))?;
        let rgb = io::load_rgb8(&target_for(&args.targets, &meta, &stem))?;
        pairs.push(IspPair {
            raw,
            rgb,
            g_red: meta.g_red,
            g_blue: meta.g_blue,
        });
    }
    let dataset = IspDataset::new(pairs)?;

    let model = MiniIspModel::<f32>::new(args.width, &mut Rng::new(cfg.train.seed))?;
    let outcome = train_mini_isp(&dataset, model, &cfg.train)?;
    let mut manifest = TrainingManifest::new(
        cfg.train.seed,
        cfg.train.steps,
        cfg.train.lr0,
        cfg.train.loss.as_str(),
    );
    manifest.final_val_psnr_db = outcome.final_val_psnr_db;
    finish(
        &args.out,
        "mini_isp.hsnn",
        serde_json::to_string_pretty(&cfg)?,
        &outcome.log,
        &outcome.model.arch(),
        &outcome.model.gather_params(),
        &manifest,
    )?;
    match outcome.final_val_psnr_db {
        Some(v) => println!(
            "trained mini-isp for {} steps: validation PSNR {v:.3} dB",
            cfg.train.steps
        ),
        None => println!("trained mini-isp for {} steps (no validation split)", cfg.train.steps),
    }
    println!("artifacts in {}", args.out.display());
    Ok(())
}
