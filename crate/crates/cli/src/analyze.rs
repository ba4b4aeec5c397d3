//! `hsraw analyze` — noise statistics report from frame stacks.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Parser;
use hsraw::noise_analysis::{
    bias_energy, decompose, expected_energies, intensity_histogram, noise_energy_function,
    si_ratio, Binning, FrameStack, DEFAULT_BINS,
};
use hsraw::{hsrw, BiasFrameDB};
use serde::Serialize;

use crate::io;

#[derive(Parser)]
pub struct Args {
    /// Stack directory: either subdirectories of .hsrw frames (one stack
    /// each) or a flat directory forming a single stack.
    #[arg(long)]
    pub stacks: PathBuf,
    /// Bias frame database; enables the SI/SD decomposition and ratio.
    #[arg(long)]
    pub bias_db: Option<PathBuf>,
    /// Number of equal-width intensity bins.
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    /// Report JSON path.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional per-bin CSV dump for plotting.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Shutter of the analyzed stacks in seconds, for the bias-bucket
    /// lookup; defaults to the shutter recorded in the frames.
    #[arg(long)]
    pub shutter: Option<f64>,
}

/// JSON-friendly view of the analysis. Empty bins are `null` rather
/// than NaN so the report parses everywhere.
#[derive(Serialize)]
struct Report {
    stacks: usize,
    frames_per_stack: Vec<usize>,
    bins: usize,
    bin_edges: Vec<f64>,
    curve: CurveOut,
    histogram: HistOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    decomposition: Option<DecompOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratios: Option<RatioOut>,
}

#[derive(Serialize)]
struct CurveOut {
    mean_energy: Vec<Option<f64>>,
    counts: Vec<u64>,
}

#[derive(Serialize)]
struct HistOut {
    mass: Vec<f64>,
    counts: Vec<u64>,
}

#[derive(Serialize)]
struct DecompOut {
    e_si_const: f64,
    f_sd: Vec<Option<f64>>,
    f_sd_raw: Vec<Option<f64>>,
    f_si: Vec<f64>,
}

#[derive(Serialize)]
struct RatioOut {
    e_sd: f64,
    e_si: f64,
    si_ratio: f64,
}

fn finite(v: &[f64]) -> Vec<Option<f64>> {
    v.iter().map(|&x| x.is_finite().then_some(x)).collect()
}

/// One stack per subdirectory containing .hsrw files; a flat directory
/// is a single stack.
fn read_stacks(dir: &Path) -> Result<Vec<FrameStack>> {
    let mut sub_dirs: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    sub_dirs.sort();

    let mut stacks = Vec::new();
    let dirs: Vec<PathBuf> = if sub_dirs.is_empty() {
        vec![dir.to_path_buf()]
    } else {
        sub_dirs
    };
    for d in dirs {
        let files = io::sorted_files(&d, ".hsrw")
            .with_context(|| format!("stack directory {}", d.display()))?;
        let frames = files
            .iter()
            .map(|f| Ok(hsrw::read_raw(f)?))
            .collect::<Result<Vec<_>>>()?;
        stacks.push(FrameStack::new(frames)?);
    }
    Ok(stacks)
}

pub fn run(args: &Args) -> Result<()> {
    let stacks = read_stacks(&args.stacks)?;
    let first = stacks[0].first();
    let binning = Binning::over_levels(first.black_level, first.white_level, args.bins);
    let curve = noise_energy_function(&stacks, binning)?;
    let hist = intensity_histogram(&stacks, binning)?;

    let mut decomposition = None;
    let mut ratios = None;
    if let Some(db_dir) = &args.bias_db {
        let db = BiasFrameDB::load(db_dir)
            .with_context(|| format!("loading bias database {}", db_dir.display()))?;
        let shutter = match args.shutter.or(first.shutter_s) {
            Some(s) => s,
            None => bail!("frames carry no shutter; pass --shutter for the bias lookup"),
        };
        let e_si = bias_energy(&db, shutter)?;
        let decomp = decompose(&curve, e_si);
        let (e_sd, e_si_weighted) = expected_energies(&hist, &decomp)?;
        ratios = Some(RatioOut {
            e_sd,
            e_si: e_si_weighted,
            si_ratio: si_ratio(e_sd, e_si_weighted)?,
        });
        decomposition = Some(DecompOut {
            e_si_const: decomp.e_si_const,
            f_sd: finite(&decomp.f_sd),
            f_sd_raw: finite(&decomp.f_sd_raw),
            f_si: decomp.f_si,
        });
    }

    if let Some(csv_path) = &args.csv {
        let mut csv = String::from("bin_lo,bin_hi,mean_energy,curve_count,hist_mass\n");
        for b in 0..args.bins {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                curve.bin_edges[b],
                curve.bin_edges[b + 1],
                if curve.mean_energy[b].is_finite() {
                    curve.mean_energy[b].to_string()
                } else {
                    String::new()
                },
                curve.counts[b],
                hist.mass[b],
            ));
        }
        fs::write(csv_path, csv)?;
    }

    let report = Report {
        stacks: stacks.len(),
        frames_per_stack: stacks.iter().map(|s| s.t()).collect(),
        bins: args.bins,
        bin_edges: curve.bin_edges.clone(),
        curve: CurveOut {
            mean_energy: finite(&curve.mean_energy),
            counts: curve.counts.clone(),
        },
        histogram: HistOut {
            mass: hist.mass.clone(),
            counts: hist.counts.clone(),
        },
        decomposition,
        ratios,
    };
    fs::write(&args.out, serde_json::to_string_pretty(&report)?)?;
    if let Some(r) = &report.ratios {
        println!(
            "analyzed {} stacks: E_SD {:.4}, E_SI {:.4}, SI share {:.4}",
            report.stacks, r.e_sd, r.e_si, r.si_ratio
        );
    } else {
        println!("analyzed {} stacks (no bias database: curve + histogram only)", report.stacks);
    }
    println!("report written to {}", args.out.display());
    Ok(())
}
