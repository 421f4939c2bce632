//! Synthetic stand-in for a scraped image corpus: a set of distinct scenes,
//! each followed by lightly perturbed near-copies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::transforms::{contrast_adjust, scatter_noise};
use super::ImageBuffer;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSpec {
    pub uniques: usize,
    /// Images per unique scene, including the original.
    pub variants: usize,
    pub size: usize,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            uniques: 20,
            variants: 7,
            size: 128,
            seed: 0,
        }
    }
}

/// One random RGB scene: a two-color vertical gradient with a few ellipses.
pub fn random_scene(size: usize, rng: &mut impl Rng) -> ImageBuffer {
    let top: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.0..255.0));
    let bottom: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.0..255.0));
    let blobs: Vec<([f64; 4], [u8; 3])> = (0..rng.gen_range(3..=6))
        .map(|_| {
            let s = size as f64;
            (
                [
                    rng.gen_range(0.0..s),
                    rng.gen_range(0.0..s),
                    rng.gen_range(s * 0.08..s * 0.35),
                    rng.gen_range(s * 0.05..s * 0.25),
                ],
                std::array::from_fn(|_| rng.gen()),
            )
        })
        .collect();
    ImageBuffer::from_fn(size, size, 3, |x, y, c| {
        let (fx, fy) = (x as f64, y as f64);
        for ([cx, cy, rx, ry], color) in blobs.iter().rev() {
            if ((fx - cx) / rx).powi(2) + ((fy - cy) / ry).powi(2) <= 1.0 {
                return color[c];
            }
        }
        let t = fy / (size - 1).max(1) as f64;
        (top[c] * (1.0 - t) + bottom[c] * t).round() as u8
    })
}

/// `uniques * variants` images in scene-major order.
pub fn synthetic_corpus(spec: &CorpusSpec) -> Vec<ImageBuffer> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.uniques * spec.variants);
    for _ in 0..spec.uniques {
        let base = random_scene(spec.size, &mut rng);
        for _ in 1..spec.variants {
            let factor = rng.gen_range(0.92..=1.0);
            let sigma = rng.gen_range(2.0..=8.0);
            let noise_seed = rng.gen();
            let copy = contrast_adjust(&base, factor).expect("factor in range");
            out.push(scatter_noise(&copy, sigma, noise_seed).expect("sigma in range"));
        }
        let insert_at = out.len() + 1 - spec.variants;
        out.insert(insert_at, base);
    }
    out
}
