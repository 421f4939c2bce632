//! Applies each capture augmentation to one scene and reports how far it
//! moves the image. Pass a directory to also write the PNGs.

use std::error::Error;
use std::path::PathBuf;

use catchwise::augment::{
    contrast_adjust, fisheye_transform, motion_blur, random_scene, scatter_noise, ssim, AugmentPlan, BlurKernel,
    BlurSpec, FisheyeParams, ImageBuffer, Range,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn variants() -> Result<Vec<(&'static str, ImageBuffer)>, Box<dyn Error>> {
    let base = random_scene(96, &mut ChaCha8Rng::seed_from_u64(5));
    let plan = AugmentPlan {
        fisheye_focal_px: Some(60.0),
        contrast: Range { lo: 0.6, hi: 0.9 },
        noise_sigma: 6.0,
        blur: Some(BlurSpec { length: 5, angle: 0.3 }),
        seed: 9,
    };
    Ok(vec![
        ("fisheye", fisheye_transform(&base, &FisheyeParams::centered(&base, 60.0))?),
        ("contrast", contrast_adjust(&base, 0.5)?),
        ("noise", scatter_noise(&base, 12.0, 1)?),
        ("blur", motion_blur(&base, &BlurKernel::box_kernel(9, 0.0)?)),
        ("chain", plan.apply(&base, 0)?),
        ("original", base),
    ])
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let images = variants()?;
    let base = &images.last().unwrap().1;
    for (name, img) in &images {
        println!("{name:9} mean {:6.2}  ssim {:.3}", img.mean(), ssim(base, img, 8)?);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()?;
    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        std::fs::create_dir_all(&dir)?;
        for (name, img) in variants()? {
            img.save_png(&dir.join(format!("{name}.png")))?;
        }
    }
    Ok(())
}
