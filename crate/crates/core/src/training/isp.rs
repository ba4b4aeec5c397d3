//! Mini-ISP training: RGB regression from preprocessed linear raw.

use crate::error::{Error, Result};
use crate::frame::{LinearImage, RawFrame, RgbImage8};
use crate::inverse_isp::{apply_white_balance, demosaic_bilinear};
use crate::metrics::{psnr, MetricConfig, Planes};
use crate::nn::{l1_loss, l2_loss, AdamState, CosineSchedule, MiniIspModel, Scalar, Tensor4};
use crate::rng::Rng;

use super::augment::{crop_tensor, flip_h, flip_v, stack_batch};
use super::config::{LossKind, TrainConfig, TrainLogEntry, TrainOutcome};
use super::dataset::IspDataset;

/// Black/white normalization, bilinear demosaic, then white balance —
/// the linear 3-channel image the Mini-ISP consumes.
pub fn preprocess_for_isp(frame: &RawFrame, g_red: f64, g_blue: f64) -> Result<LinearImage> {
    apply_white_balance(&demosaic_bilinear(frame), g_red, g_blue)
}

/// Interleaved RGB image → (1, 3, h, w) tensor.
pub fn linear_to_tensor<S: Scalar>(img: &LinearImage) -> Tensor4<S> {
    let mut t = Tensor4::zeros(1, 3, img.height, img.width);
    for c in 0..3 {
        for y in 0..img.height {
            for x in 0..img.width {
                t.set(0, c, y, x, S::from_f64(img.get(x, y, c)));
            }
        }
    }
    t
}

/// 8-bit RGB target → (1, 3, h, w) tensor scaled to [0, 1].
pub fn rgb8_to_tensor<S: Scalar>(img: &RgbImage8) -> Tensor4<S> {
    let mut t = Tensor4::zeros(1, 3, img.height, img.width);
    for c in 0..3 {
        for y in 0..img.height {
            for x in 0..img.width {
                t.set(0, c, y, x, S::from_f64(f64::from(img.get(x, y, c)) / 255.0));
            }
        }
    }
    t
}

/// Network output → displayable 8-bit RGB: clamp to [0, 1], scale and
/// round.
pub fn tensor_to_rgb8(t: &Tensor4<f32>) -> Result<RgbImage8> {
    if t.n != 1 || t.c != 3 {
        return Err(Error::ShapeMismatch(format!(
            "expected a (1, 3, h, w) tensor, got ({}, {}, {}, {})",
            t.n, t.c, t.h, t.w
        )));
    }
    let mut data = Vec::with_capacity(t.h * t.w * 3);
    for y in 0..t.h {
        for x in 0..t.w {
            for c in 0..3 {
                let v = f64::from(t.get(0, c, y, x)).clamp(0.0, 1.0);
                data.push((v * 255.0).round() as u8);
            }
        }
    }
    RgbImage8::new(t.w, t.h, data)
}

/// Mean RGB-space PSNR of full-frame model renders against the 8-bit
/// targets, quantized exactly as the pipeline would emit them.
pub fn isp_val_psnr(
    model: &MiniIspModel<f32>,
    dataset: &IspDataset,
    indices: &[usize],
) -> Result<f64> {
    if indices.is_empty() {
        return Err(Error::EmptyInput("validation indices"));
    }
    let cfg = MetricConfig::with_peak(255.0);
    let mut total = 0.0;
    for &i in indices {
        let pair = &dataset.pairs[i];
        let input = linear_to_tensor::<f32>(&preprocess_for_isp(&pair.raw, pair.g_red, pair.g_blue)?);
        let out = model.forward(&input)?;
        let rendered = tensor_to_rgb8(&out)?;
        total += psnr(
            &Planes::from_rgb8(&rendered),
            &Planes::from_rgb8(&pair.rgb),
            &cfg,
        )?;
    }
    Ok(total / indices.len() as f64)
}

pub fn train_mini_isp(
    dataset: &IspDataset,
    model: MiniIspModel<f32>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<MiniIspModel<f32>>> {
    let mut optimizer = AdamState::new(model.param_count());
    // Short-horizon run: a faster-decaying second moment tracks the
    // per-layer gradient scale while the cosine schedule still has
    // room to exploit it. Resumed runs keep whatever the checkpoint
    // carries.
    optimizer.beta2 = 0.9;
    train_mini_isp_from(dataset, model, cfg, optimizer, 0)
}

/// Resume form; see the denoiser counterpart for the determinism
/// contract. Inputs are preprocessed once up front — the pairs are
/// fixed, so only crop/flip sampling happens per step.
pub fn train_mini_isp_from(
    dataset: &IspDataset,
    mut model: MiniIspModel<f32>,
    cfg: &TrainConfig,
    mut optimizer: AdamState,
    start_step: u64,
) -> Result<TrainOutcome<MiniIspModel<f32>>> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyInput("isp dataset"));
    }
    if optimizer.len() != model.param_count() {
        return Err(Error::ShapeMismatch(format!(
            "optimizer sized for {} params, model has {}",
            optimizer.len(),
            model.param_count()
        )));
    }
    let (train_idx, val_idx) = dataset.split(cfg.val_frac);
    if train_idx.is_empty() {
        return Err(Error::EmptyInput("training split"));
    }

    let mut inputs = Vec::with_capacity(dataset.len());
    let mut targets = Vec::with_capacity(dataset.len());
    for pair in &dataset.pairs {
        if pair.raw.width < cfg.crop || pair.raw.height < cfg.crop {
            return Err(Error::CropOutOfBounds {
                x: 0,
                y: 0,
                w: cfg.crop,
                h: cfg.crop,
                frame_w: pair.raw.width,
                frame_h: pair.raw.height,
            });
        }
        inputs.push(linear_to_tensor::<f32>(&preprocess_for_isp(
            &pair.raw, pair.g_red, pair.g_blue,
        )?));
        targets.push(rgb8_to_tensor::<f32>(&pair.rgb));
    }

    let schedule = CosineSchedule::new(cfg.lr0, cfg.lr_min, cfg.steps.max(1));
    let mut log = Vec::with_capacity((cfg.steps - start_step.min(cfg.steps)) as usize);
    let mut final_val = None;

    for t in start_step..cfg.steps {
        let lr = schedule.lr(t)?;
        let mut srng = Rng::derive(cfg.seed, t);

        let mut xs = Vec::with_capacity(cfg.batch);
        let mut ys = Vec::with_capacity(cfg.batch);
        for _ in 0..cfg.batch {
            let idx = train_idx[srng.index(train_idx.len())];
            let full_x = &inputs[idx];
            let full_y = &targets[idx];
            let cx = 2 * srng.index((full_x.w - cfg.crop) / 2 + 1);
            let cy = 2 * srng.index((full_x.h - cfg.crop) / 2 + 1);
            let mut x = crop_tensor(full_x, cx, cy, cfg.crop, cfg.crop)?;
            let mut y = crop_tensor(full_y, cx, cy, cfg.crop, cfg.crop)?;
            if cfg.flips {
                if srng.index(2) == 1 {
                    x = flip_h(&x);
                    y = flip_h(&y);
                }
                if srng.index(2) == 1 {
                    x = flip_v(&x);
                    y = flip_v(&y);
                }
            }
            xs.push(x);
            ys.push(y);
        }
        let x = stack_batch(&xs)?;
        let y = stack_batch(&ys)?;

        let (out, cache) = model.forward_cached(&x)?;
        let (loss, grad_out) = match cfg.loss {
            LossKind::L1 => l1_loss(&out, &y)?,
            LossKind::L2 => l2_loss(&out, &y)?,
        };
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { step: t, loss });
        }
        let (_, grad_p) = model.backward(&cache, &grad_out)?;
        let mut params = model.gather_params();
        optimizer.step(&mut params, &grad_p, lr)?;
        model.scatter_params(&params)?;

        let due = (cfg.val_every > 0 && (t + 1) % cfg.val_every == 0) || t + 1 == cfg.steps;
        let val = if due && !val_idx.is_empty() {
            let p = isp_val_psnr(&model, dataset, &val_idx)?;
            final_val = Some(p);
            Some(p)
        } else {
            None
        };
        log.push(TrainLogEntry {
            step: t,
            lr,
            loss,
            val_psnr_db: val,
        });
    }

    Ok(TrainOutcome {
        model,
        log,
        optimizer,
        final_val_psnr_db: final_val,
    })
}
