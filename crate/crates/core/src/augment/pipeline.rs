use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::transforms::{contrast_adjust, fisheye_transform, motion_blur, scatter_noise};
use super::{AugmentError, BlurKernel, FisheyeParams, ImageBuffer};

/// Closed interval parsed from `LO:HI`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
        let lo: f64 = lo.trim().parse().map_err(|e| format!("bad LO in {s:?}: {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("bad HI in {s:?}: {e}"))?;
        if !(lo <= hi) {
            return Err(format!("LO must not exceed HI in {s:?}"));
        }
        Ok(Range { lo, hi })
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// Box blur parsed from `LEN:ANGLE` (angle in radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlurSpec {
    pub length: usize,
    pub angle: f64,
}

impl FromStr for BlurSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (len, angle) = s
            .split_once(':')
            .ok_or_else(|| format!("expected LEN:ANGLE, got {s:?}"))?;
        let length: usize = len.trim().parse().map_err(|e| format!("bad LEN in {s:?}: {e}"))?;
        let angle: f64 = angle.trim().parse().map_err(|e| format!("bad ANGLE in {s:?}: {e}"))?;
        if length == 0 {
            return Err("blur length must be >= 1".into());
        }
        Ok(BlurSpec { length, angle })
    }
}

/// Fixed chain applied per image: fisheye, contrast, noise, blur.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentPlan {
    pub fisheye_focal_px: Option<f64>,
    /// Contrast factor drawn uniformly per image.
    pub contrast: Range,
    pub noise_sigma: f64,
    pub blur: Option<BlurSpec>,
    pub seed: u64,
}

impl Default for AugmentPlan {
    fn default() -> Self {
        Self {
            fisheye_focal_px: None,
            contrast: Range { lo: 1.0, hi: 1.0 },
            noise_sigma: 0.0,
            blur: None,
            seed: 0,
        }
    }
}

impl AugmentPlan {
    /// Augments the `index`-th image; the RNG stream depends only on
    /// `(seed, index)`, so output does not depend on processing order.
    pub fn apply(&self, img: &ImageBuffer, index: u64) -> Result<ImageBuffer, AugmentError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let mut out = match self.fisheye_focal_px {
            Some(f) => fisheye_transform(img, &FisheyeParams::centered(img, f))?,
            None => img.clone(),
        };
        let factor = if self.contrast.lo == self.contrast.hi {
            self.contrast.lo
        } else {
            rng.gen_range(self.contrast.lo..=self.contrast.hi)
        };
        out = contrast_adjust(&out, factor)?;
        let noise_seed: u64 = rng.gen();
        out = scatter_noise(&out, self.noise_sigma, noise_seed)?;
        if let Some(b) = self.blur {
            out = motion_blur(&out, &BlurKernel::box_kernel(b.length, b.angle)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_specs() {
        assert_eq!("0.5:1.2".parse::<Range>().unwrap(), Range { lo: 0.5, hi: 1.2 });
        assert!("2:1".parse::<Range>().is_err());
        assert!("x".parse::<Range>().is_err());
        assert_eq!(
            "7:0.785".parse::<BlurSpec>().unwrap(),
            BlurSpec { length: 7, angle: 0.785 }
        );
        assert!("0:1".parse::<BlurSpec>().is_err());
    }

    #[test]
    fn default_plan_is_identity_and_seeded_plan_is_stable() {
        let img = ImageBuffer::from_fn(16, 16, 3, |x, y, c| (x * 9 + y * 4 + c) as u8);
        assert_eq!(AugmentPlan::default().apply(&img, 3).unwrap(), img);
        let plan = AugmentPlan {
            fisheye_focal_px: Some(20.0),
            contrast: Range { lo: 0.6, hi: 0.9 },
            noise_sigma: 4.0,
            blur: Some(BlurSpec { length: 3, angle: 0.3 }),
            seed: 11,
        };
        assert_eq!(plan.apply(&img, 2).unwrap(), plan.apply(&img, 2).unwrap());
        assert_ne!(plan.apply(&img, 2).unwrap(), plan.apply(&img, 3).unwrap());
    }
}
