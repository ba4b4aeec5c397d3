//! Denoiser training loop: clean-raw regression from per-step synthesized
//! noisy inputs.
//!
//! All randomness for step `t` comes from a stream derived from
//! (run seed, t), in a fixed draw order per batch slot: scene pick,
//! noise synthesis, crop position, flip coin(s). Resuming at step `s`
//! therefore continues the exact trajectory the uninterrupted run would
//! have taken, and two runs with equal seeds are bit-identical.

use crate::bias_db::BiasFrameDB;
use crate::error::{Error, Result};
use crate::frame::RawFrame;
use crate::metrics::{psnr, MetricConfig, Planes};
use crate::nn::{l1_loss, l2_loss, AdamState, CosineSchedule, Tensor4, TinyDenoiser};
use crate::noise_model::{synthesize_noisy, SynthesisConfig};
use crate::rng::Rng;

use super::augment::{flip_h, flip_v, stack_batch};
use super::config::{LossKind, TrainConfig, TrainLogEntry, TrainOutcome};
use super::dataset::PairedDataset;
use super::pack::{pack_bayer, unpack_bayer_like};

/// Stream offset for validation-set synthesis, far above any step index
/// so training and validation randomness never collide.
const VAL_STREAM_BASE: u64 = 1 << 62;

/// The bias database to synthesize from, or an owned empty stand-in when
/// none is needed. Synthesis only reads the database when the
/// signal-independent component is enabled, so its absence is an error
/// exactly then.
fn resolve_db<'a>(
    dataset: &'a PairedDataset,
    noise_cfg: &SynthesisConfig,
) -> Result<std::borrow::Cow<'a, BiasFrameDB>> {
    match dataset.bias_db.as_ref() {
        Some(db) => Ok(std::borrow::Cow::Borrowed(db)),
        None if dataset.synthesize && noise_cfg.enable_si => Err(Error::EmptyInput(
            "bias frame database (signal-independent synthesis enabled)",
        )),
        None => Ok(std::borrow::Cow::Owned(BiasFrameDB::new("none", ""))),
    }
}

/// Fixed validation inputs for a run: one (noisy, clean) pair per
/// held-out scene, synthesized (or copied) deterministically from the
/// run seed. The trainer and any external evaluation build the same
/// pairs.
pub fn build_val_pairs(
    dataset: &PairedDataset,
    noise_cfg: &SynthesisConfig,
    cfg: &TrainConfig,
) -> Result<Vec<(RawFrame, RawFrame)>> {
    let (_, val_idx) = dataset.split(cfg.val_frac);
    let db = resolve_db(dataset, noise_cfg)?;
    let mut pairs = Vec::with_capacity(val_idx.len());
    for (i, &idx) in val_idx.iter().enumerate() {
        let entry = &dataset.entries[idx];
        let noisy = if dataset.synthesize {
            let mut vrng = Rng::derive(cfg.seed, VAL_STREAM_BASE + i as u64);
            synthesize_noisy(&entry.target, noise_cfg, &db, &mut vrng)?.0
        } else {
            entry.input.clone().expect("validated by dataset")
        };
        pairs.push((noisy, entry.target.clone()));
    }
    Ok(pairs)
}

/// Mean raw-space PSNR of the model's full-frame outputs against the
/// clean targets. Outputs are clamped to the white level before scoring,
/// since counts past saturation are not reachable by a real sensor.
pub fn denoiser_val_psnr(
    model: &TinyDenoiser<f32>,
    pairs: &[(RawFrame, RawFrame)],
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("validation pairs"));
    }
    let mut total = 0.0;
    for (noisy, clean) in pairs {
        let x = pack_bayer::<f32>(noisy)?;
        let y = model.forward(&x)?;
        let mut restored = unpack_bayer_like(&y, noisy)?;
        for v in restored.data.iter_mut() {
            *v = (*v).min(restored.white_level);
        }
        let cfg = MetricConfig::with_peak(clean.range());
        total += psnr(&Planes::from_raw(&restored), &Planes::from_raw(clean), &cfg)?;
    }
    Ok(total / pairs.len() as f64)
}

pub fn train_denoiser(
    dataset: &PairedDataset,
    noise_cfg: &SynthesisConfig,
    model: TinyDenoiser<f32>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<TinyDenoiser<f32>>> {
    let optimizer = AdamState::new(model.param_count());
    train_denoiser_from(dataset, noise_cfg, model, cfg, optimizer, 0)
}

/// Resume form: continues from `start_step` with an existing optimizer
/// state, reproducing the tail of the equivalent uninterrupted run.
pub fn train_denoiser_from(
    dataset: &PairedDataset,
    noise_cfg: &SynthesisConfig,
    mut model: TinyDenoiser<f32>,
    cfg: &TrainConfig,
    mut optimizer: AdamState,
    start_step: u64,
) -> Result<TrainOutcome<TinyDenoiser<f32>>> {
    cfg.validate()?;
    noise_cfg.validate()?;
    dataset.validate()?;
    if optimizer.len() != model.param_count() {
        return Err(Error::ShapeMismatch(format!(
            "optimizer sized for {} params, model has {}",
            optimizer.len(),
            model.param_count()
        )));
    }
    let db = resolve_db(dataset, noise_cfg)?;
    let (train_idx, _) = dataset.split(cfg.val_frac);
    if train_idx.is_empty() {
        return Err(Error::EmptyInput("training split"));
    }
    let val_pairs = build_val_pairs(dataset, noise_cfg, cfg)?;

    let schedule = CosineSchedule::new(cfg.lr0, cfg.lr_min, cfg.steps.max(1));
    let mut log = Vec::with_capacity((cfg.steps - start_step.min(cfg.steps)) as usize);
    let mut final_val = None;

    for t in start_step..cfg.steps {
        let lr = schedule.lr(t)?;
        let mut srng = Rng::derive(cfg.seed, t);

        let mut inputs = Vec::with_capacity(cfg.batch);
        let mut targets = Vec::with_capacity(cfg.batch);
        for _ in 0..cfg.batch {
            let idx = train_idx[srng.index(train_idx.len())];
            let entry = &dataset.entries[idx];
            let synthesized;
            let noisy: &RawFrame = if dataset.synthesize {
                synthesized = synthesize_noisy(&entry.target, noise_cfg, &db, &mut srng)?.0;
                &synthesized
            } else {
                entry.input.as_ref().expect("validated by dataset")
            };
            let (mut x, mut y) = sample_crop(noisy, &entry.target, cfg.crop, &mut srng)?;
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
            inputs.push(x);
            targets.push(y);
        }
        let x = stack_batch(&inputs)?;
        let y = stack_batch(&targets)?;

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
        let val = if due && !val_pairs.is_empty() {
            let p = denoiser_val_psnr(&model, &val_pairs)?;
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

/// Identical random crop of the noisy/clean pair, packed. Offsets are
/// even so crops keep quad alignment.
fn sample_crop(
    noisy: &RawFrame,
    clean: &RawFrame,
    crop: usize,
    rng: &mut Rng,
) -> Result<(Tensor4<f32>, Tensor4<f32>)> {
    if crop > noisy.width || crop > noisy.height {
        return Err(Error::CropOutOfBounds {
            x: 0,
            y: 0,
            w: crop,
            h: crop,
            frame_w: noisy.width,
            frame_h: noisy.height,
        });
    }
    let cx = 2 * rng.index((noisy.width - crop) / 2 + 1);
    let cy = 2 * rng.index((noisy.height - crop) / 2 + 1);
    let x = pack_bayer::<f32>(&noisy.crop(cx, cy, crop, crop)?)?;
    let y = pack_bayer::<f32>(&clean.crop(cx, cy, crop, crop)?)?;
    Ok((x, y))
}
