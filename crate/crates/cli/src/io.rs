//! Directory and image plumbing shared by the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hsraw::{CameraProfile, RgbImage8};

/// Files in `dir` whose name ends with `ext`, sorted by name so runs are
/// order-independent of the filesystem.
pub fn sorted_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let entries =
        fs::read_dir(dir).with_context(|| format!("reading directory {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        if path
            .file_name()
            .is_some_and(|n| n.to_string_lossy().ends_with(ext))
        {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        bail!("no {ext} files in {}", dir.display());
    }
    Ok(out)
}

pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "frame".to_string())
}

/// 8-bit RGB images (.png/.jpg/.jpeg) in `dir`, sorted by name.
pub fn sorted_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let entries =
        fs::read_dir(dir).with_context(|| format!("reading directory {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        let lower = path.file_name().map(|n| n.to_string_lossy().to_lowercase());
        if lower.is_some_and(|n| {
            n.ends_with(".png") || n.ends_with(".jpg") || n.ends_with(".jpeg")
        }) {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        bail!("no .png/.jpg images in {}", dir.display());
    }
    Ok(out)
}

pub fn load_rgb8(path: &Path) -> Result<RgbImage8> {
    let img = image::open(path)
        .with_context(|| format!("decoding {}", path.display()))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(RgbImage8::new(w, h, img.into_raw())?)
}

pub fn save_png(img: &RgbImage8, path: &Path) -> Result<()> {
    let buf = image::RgbImage::from_raw(img.width as u32, img.height as u32, img.data.clone())
        .context("assembling PNG buffer")?;
    buf.save(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Camera description: the built-in default, or a JSON file. Missing
/// fields in the file fall back to the defaults.
pub fn load_profile(path: Option<&Path>) -> Result<CameraProfile> {
    let profile = match path {
        None => CameraProfile::default(),
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading profile {}", p.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing profile {}", p.display()))?
        }
    };
    profile.validate()?;
    Ok(profile)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}
