//! Randomized invariants over the data formats, the RNG, synthesis and
//! the metric/training helpers.

use proptest::prelude::*;

use hsraw::bayer::BayerPattern;
use hsraw::hsrw;
use hsraw::inverse_isp::demosaic_bilinear;
use hsraw::metrics::{psnr, ssim, MetricConfig, Planes};
use hsraw::nn::{
    decode_checkpoint, encode_checkpoint, ArchDescriptor, CosineSchedule, Tensor4,
    TrainingManifest,
};
use hsraw::noise_model::{poisson, synthesize_noisy, SynthesisConfig};
use hsraw::training::{flip_h, flip_v, gain_baseline, pack_bayer, unpack_bayer_like};
use hsraw::{BiasFrameDB, LinearImage, RawFrame, Rng};

fn raw_frame() -> impl Strategy<Value = RawFrame> {
    (
        1usize..=8,
        1usize..=8,
        0u8..4,
        0u16..1000,
        1u16..3000,
        prop::option::of(1e-6f64..1.0),
    )
        .prop_flat_map(|(hw, hh, pat, black, span, shutter)| {
            let (w, h) = (2 * hw, 2 * hh);
            (
                prop::collection::vec(any::<u16>(), w * h),
                Just((w, h, pat, black, span, shutter)),
            )
        })
        .prop_map(|(data, (w, h, pat, black, span, shutter))| {
            RawFrame::new(
                w,
                h,
                data,
                BayerPattern::from_code(pat).unwrap(),
                black,
                black + span,
                shutter,
            )
            .unwrap()
        })
}

/// Like `raw_frame` but with every sample inside [black, white], the
/// regime synthesis expects.
fn exposed_frame() -> impl Strategy<Value = RawFrame> {
    (1usize..=8, 1usize..=8, 0u8..4, 0u16..1000, 1u16..3000)
        .prop_flat_map(|(hw, hh, pat, black, span)| {
            let (w, h) = (2 * hw, 2 * hh);
            (
                prop::collection::vec(0u16..=span, w * h),
                Just((w, h, pat, black, span)),
            )
        })
        .prop_map(|(data, (w, h, pat, black, span))| {
            let shifted = data.into_iter().map(|v| v + black).collect();
            RawFrame::new(
                w,
                h,
                shifted,
                BayerPattern::from_code(pat).unwrap(),
                black,
                black + span,
                Some(0.01),
            )
            .unwrap()
        })
}

fn small_planes() -> impl Strategy<Value = (Planes, Planes)> {
    prop::collection::vec(0.0f64..1.0, 2 * 16 * 16 * 3).prop_map(|data| {
        let a = LinearImage::new(16, 16, data[..16 * 16 * 3].to_vec()).unwrap();
        let b = LinearImage::new(16, 16, data[16 * 16 * 3..].to_vec()).unwrap();
        (Planes::from_linear(&a), Planes::from_linear(&b))
    })
}

proptest! {
    #[test]
    fn hsrw_round_trip_is_lossless(frame in raw_frame()) {
        let bytes = hsrw::encode(&frame);
        let back = hsrw::decode(&bytes).unwrap();
        prop_assert_eq!(&back, &frame);
        prop_assert_eq!(hsrw::encode(&back), bytes);
    }

    #[test]
    fn pack_unpack_restores_counts(frame in raw_frame()) {
        let t = pack_bayer::<f32>(&frame).unwrap();
        let back = unpack_bayer_like(&t, &frame).unwrap();
        prop_assert_eq!(back.data, frame.data.clone());
        prop_assert_eq!(back.pattern, frame.pattern);
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact(
        bits in prop::collection::vec(any::<u32>(), 0..300),
        layers in 1usize..6,
        width in 1usize..16,
        residual in any::<bool>(),
    ) {
        let weights: Vec<f32> = bits.into_iter().map(f32::from_bits).collect();
        let arch = ArchDescriptor {
            kind: "denoiser".into(),
            layers,
            width,
            in_channels: 4,
            out_channels: 4,
            residual,
        };
        let manifest = TrainingManifest::new(1, 2, 3.0e-4, "l1");
        let bytes = encode_checkpoint(&arch, &weights, &manifest);
        let back = decode_checkpoint(&bytes).unwrap();
        prop_assert_eq!(back.weights.len(), weights.len());
        prop_assert!(back
            .weights
            .iter()
            .zip(&weights)
            .all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(encode_checkpoint(&back.arch, &back.weights, &back.manifest), bytes);
    }

    #[test]
    fn poisson_draws_are_nonnegative_integers(lambda in 0.0f64..100.0, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let v = poisson(lambda, &mut rng);
        prop_assert!(v >= 0.0);
        prop_assert_eq!(v.fract(), 0.0);
    }

    #[test]
    fn rng_uniform_and_index_stay_in_bounds(
        lo in -100.0f64..100.0,
        span in 1e-3f64..100.0,
        n in 1usize..10_000,
        seed in any::<u64>(),
    ) {
        let mut rng = Rng::new(seed);
        let v = rng.uniform(lo, lo + span);
        prop_assert!(v >= lo && v <= lo + span);
        prop_assert!(rng.index(n) < n);
    }

    #[test]
    fn metrics_are_symmetric((a, b) in small_planes()) {
        let cfg = MetricConfig::default();
        prop_assert_eq!(psnr(&a, &b, &cfg).unwrap(), psnr(&b, &a, &cfg).unwrap());
        let s_ab = ssim(&a, &b, &cfg).unwrap();
        let s_ba = ssim(&b, &a, &cfg).unwrap();
        prop_assert_eq!(s_ab, s_ba);
        prop_assert!((-1.0..=1.0).contains(&s_ab));
        prop_assert_eq!(psnr(&a, &a, &cfg).unwrap(), cfg.psnr_cap);
        prop_assert_eq!(ssim(&a, &a, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn synthesis_identity_and_bounds(frame in exposed_frame(), ratio in 1.0f64..32.0) {
        let db = BiasFrameDB::new("none", "");
        let identity = SynthesisConfig {
            ratio_r: 1.0,
            k: 0.4,
            enable_sd: false,
            enable_si: false,
            seed: 0,
            shutter_s: None,
        };
        let (out, _) = synthesize_noisy(&frame, &identity, &db, &mut Rng::new(1)).unwrap();
        prop_assert_eq!(out.data, frame.data.clone());

        let scaled = SynthesisConfig { ratio_r: ratio, enable_sd: true, ..identity };
        let (out, _) = synthesize_noisy(&frame, &scaled, &db, &mut Rng::new(2)).unwrap();
        prop_assert!(out.data.iter().all(|&v| v <= frame.white_level));
        prop_assert!(out.same_geometry(&frame));
    }

    #[test]
    fn gain_baseline_stays_in_count_range(frame in exposed_frame(), ratio in 1.0f64..64.0) {
        let out = gain_baseline(&frame, ratio);
        prop_assert!(out.data.iter().all(|&v| v <= frame.white_level));
        prop_assert!(out.same_geometry(&frame));
    }

    #[test]
    fn demosaic_keeps_native_sites(frame in raw_frame()) {
        let img = demosaic_bilinear(&frame);
        let black = f64::from(frame.black_level);
        let range = frame.range();
        for y in 0..frame.height {
            for x in 0..frame.width {
                let c = frame.pattern.channel_at(y, x).rgb_index();
                let expect = ((f64::from(frame.get(x, y)) - black) / range).max(0.0);
                prop_assert_eq!(img.get(x, y, c), expect);
            }
        }
    }

    #[test]
    fn cosine_schedule_descends_between_its_endpoints(
        lr0 in 1e-6f64..1.0,
        frac in 0.0f64..1.0,
        total in 1u64..500,
    ) {
        let lr_min = lr0 * frac;
        let s = CosineSchedule::new(lr0, lr_min, total);
        let mut prev = f64::INFINITY;
        for t in 0..=total {
            let lr = s.lr(t).unwrap();
            prop_assert!(lr <= prev + 1e-15);
            prop_assert!(lr <= lr0 + 1e-15 && lr >= lr_min - 1e-15);
            prev = lr;
        }
        prop_assert!((s.lr(0).unwrap() - lr0).abs() < 1e-12);
        prop_assert!((s.lr(total).unwrap() - lr_min).abs() < 1e-12);
    }

    #[test]
    fn tensor_flips_are_involutions(
        data in prop::collection::vec(-10.0f32..10.0, 2 * 3 * 4 * 6),
    ) {
        let t = Tensor4::new(2, 3, 4, 6, data).unwrap();
        prop_assert_eq!(flip_h(&flip_h(&t)).data, t.data.clone());
        prop_assert_eq!(flip_v(&flip_v(&t)).data, t.data.clone());
        let hv = flip_v(&flip_h(&t));
        let vh = flip_h(&flip_v(&t));
        prop_assert_eq!(hv.data, vh.data);
    }
}
