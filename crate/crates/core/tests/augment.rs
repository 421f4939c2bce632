mod common;

use catchwise::augment::{
    contrast_adjust, dedup, dedup_report, mse, motion_blur, motion_blur_field, patch_distance, scatter_noise, ssd,
    ssim, synthetic_corpus, AugmentPlan, BlurKernel, CorpusSpec, DedupConfig, ImageBuffer,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_pair() -> impl Strategy<Value = (ImageBuffer, ImageBuffer)> {
    (1usize..20, 1usize..20, prop::sample::select(vec![1usize, 3])).prop_flat_map(|(w, h, ch)| {
        let n = w * h * ch;
        (
            prop::collection::vec(any::<u8>(), n),
            prop::collection::vec(any::<u8>(), n),
        )
            .prop_map(move |(a, b)| (ImageBuffer::new(w, h, ch, a).unwrap(), ImageBuffer::new(w, h, ch, b).unwrap()))
    })
}

proptest! {
    #[test]
    fn ssd_is_a_symmetric_oracle_match((a, b) in arb_pair()) {
        let ab = ssd(&a, &b).unwrap();
        prop_assert_eq!(ab, ssd(&b, &a).unwrap());
        prop_assert_eq!(ab, common::ssd_oracle(&a, &b));
        prop_assert_eq!(ssd(&a, &a).unwrap(), 0.0);
        prop_assert!((mse(&a, &b).unwrap() - ab / a.data().len() as f64).abs() < 1e-9);
    }

    #[test]
    fn ssim_of_self_is_one((a, b) in arb_pair()) {
        let window = a.width().min(a.height()).min(8);
        prop_assert!((ssim(&a, &a, window).unwrap() - 1.0).abs() < 1e-12);
        let s = ssim(&a, &b, window).unwrap();
        prop_assert!((s - ssim(&b, &a, window).unwrap()).abs() < 1e-12);
        prop_assert!((s - common::ssim_oracle(&a, &b, window)).abs() < 1e-12);
        prop_assert!(s <= 1.0 + 1e-12);
    }

    #[test]
    fn patch_distance_matches_oracle((a, b) in arb_pair(), patch in 1usize..9) {
        let got = patch_distance(&a, &b, patch).unwrap();
        let want = common::patch_distance_oracle(&a, &b, patch);
        prop_assert!((got - want).abs() <= 1e-9 * want.max(1.0));
    }

    #[test]
    fn constant_images_stay_constant_under_blur(v in any::<u8>(), len in 1usize..12, dir in 0.0f64..6.3) {
        let img = ImageBuffer::filled(13, 9, 3, v);
        let k = BlurKernel::box_kernel(len, dir).unwrap();
        prop_assert!(motion_blur_field(&img, &k).iter().all(|x| (x - v as f64).abs() < 1e-9));
        prop_assert_eq!(motion_blur(&img, &k), img);
    }

    #[test]
    fn contrast_zero_flattens_to_channel_mean((a, _) in arb_pair()) {
        let flat = contrast_adjust(&a, 0.0).unwrap();
        for c in 0..a.channels() {
            let m = a.channel_mean(c).round() as u8;
            for y in 0..a.height() {
                for x in 0..a.width() {
                    prop_assert_eq!(flat.get(x, y, c), m);
                }
            }
        }
    }

    #[test]
    fn noise_is_deterministic_per_seed((a, _) in arb_pair(), seed in any::<u64>()) {
        prop_assert_eq!(scatter_noise(&a, 4.0, seed).unwrap(), scatter_noise(&a, 4.0, seed).unwrap());
        prop_assert_eq!(scatter_noise(&a, 0.0, seed).unwrap(), a);
    }
}

fn small_corpus(seed: u64) -> Vec<ImageBuffer> {
    synthetic_corpus(&CorpusSpec { uniques: 5, variants: 4, size: 32, seed })
}

#[test]
fn dedup_keeps_a_subset_led_by_the_first_image() {
    for seed in 0..4 {
        let corpus = small_corpus(seed);
        let kept = dedup(&corpus, &DedupConfig::default()).unwrap();
        assert_eq!(kept[0], 0);
        assert!(kept.windows(2).all(|w| w[0] < w[1]));
        assert!(kept.iter().all(|&i| i < corpus.len()));
        // Kept images are pairwise non-duplicates, so a second pass is a no-op.
        let again: Vec<ImageBuffer> = kept.iter().map(|&i| corpus[i].clone()).collect();
        assert_eq!(dedup(&again, &DedupConfig::default()).unwrap().len(), kept.len());
    }
}

#[test]
fn stricter_thresholds_never_keep_fewer() {
    let corpus = small_corpus(9);
    let mut prev = 0;
    for (ssd_t, ssim_t) in [(400.0, 0.6), (150.0, 0.9), (40.0, 0.97), (0.0, 1.0)] {
        let cfg = DedupConfig { ssd_threshold: ssd_t, ssim_threshold: ssim_t, ..DedupConfig::default() };
        let n = dedup(&corpus, &cfg).unwrap().len();
        assert!(n >= prev, "{n} kept at ({ssd_t}, {ssim_t}) after {prev}");
        prev = n;
    }
}

#[test]
fn report_names_the_original_for_every_drop() {
    let corpus = small_corpus(3);
    for d in dedup_report(&corpus, &DedupConfig::default()).unwrap() {
        if !d.kept {
            let near = d.nearest.expect("dropped images cite a kept one");
            assert!(near.kept_index < d.index);
        }
    }
}

#[test]
fn plan_is_reproducible() {
    let plan = AugmentPlan::default();
    let img = common::random_image(&mut ChaCha8Rng::seed_from_u64(1), 24, 24, 3);
    assert_eq!(plan.apply(&img, 5).unwrap(), plan.apply(&img, 5).unwrap());
}
