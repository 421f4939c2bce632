//! Capture-condition augmentations: lens distortion, contrast loss,
//! turbidity noise and motion blur.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{AugmentError, ImageBuffer};

#[inline]
fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Equidistant fisheye parameters, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisheyeParams {
    pub focal_px: f64,
    pub cx: f64,
    pub cy: f64,
}

impl FisheyeParams {
    /// Centered on the middle pixel (rounded down for even sizes).
    pub fn centered(img: &ImageBuffer, focal_px: f64) -> Self {
        Self {
            focal_px,
            cx: ((img.width() - 1) / 2) as f64,
            cy: ((img.height() - 1) / 2) as f64,
        }
    }

    pub fn validate(&self, img: &ImageBuffer) -> Result<(), AugmentError> {
        if !(self.focal_px > 0.0) || !self.focal_px.is_finite() {
            return Err(AugmentError::InvalidConfig("focal_px must be > 0".into()));
        }
        let inside = (0.0..=(img.width() - 1) as f64).contains(&self.cx)
            && (0.0..=(img.height() - 1) as f64).contains(&self.cy);
        if !inside {
            return Err(AugmentError::InvalidConfig(format!(
                "fisheye center ({}, {}) outside {}",
                self.cx,
                self.cy,
                img.shape()
            )));
        }
        Ok(())
    }

    /// Source coordinate sampled by output pixel `(x, y)`, or `None` when the
    /// ray lies at or beyond 90 degrees off-axis.
    pub fn source_of(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let dx = x - self.cx;
        let dy = y - self.cy;
        let r_out = dx.hypot(dy);
        if r_out == 0.0 {
            return Some((x, y));
        }
        let theta = r_out / self.focal_px;
        if theta >= std::f64::consts::FRAC_PI_2 {
            return None;
        }
        let scale = self.focal_px * theta.tan() / r_out;
        Some((self.cx + dx * scale, self.cy + dy * scale))
    }
}

/// Remaps a rectilinear image onto the equidistant fisheye projection.
/// Samples falling outside the source image are black.
pub fn fisheye_transform(img: &ImageBuffer, p: &FisheyeParams) -> Result<ImageBuffer, AugmentError> {
    p.validate(img)?;
    let ch = img.channels();
    let mut out = ImageBuffer::filled(img.width(), img.height(), ch, 0);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let Some((sx, sy)) = p.source_of(x as f64, y as f64) else {
                continue;
            };
            for c in 0..ch {
                if let Some(v) = img.sample_bilinear(sx, sy, c) {
                    out.set(x, y, c, to_u8(v));
                }
            }
        }
    }
    Ok(out)
}

/// Scales each channel's deviation from its mean by `factor`.
pub fn contrast_adjust(img: &ImageBuffer, factor: f64) -> Result<ImageBuffer, AugmentError> {
    if !(factor >= 0.0) || !factor.is_finite() {
        return Err(AugmentError::InvalidConfig(format!(
            "contrast factor must be >= 0, got {factor}"
        )));
    }
    let ch = img.channels();
    let means: Vec<f64> = (0..ch).map(|c| img.channel_mean(c)).collect();
    let data = img
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let m = means[i % ch];
            to_u8(m + factor * (v as f64 - m))
        })
        .collect();
    ImageBuffer::new(img.width(), img.height(), ch, data)
}

/// Additive zero-mean Gaussian noise with standard deviation `intensity`
/// (8-bit levels). Deterministic in `seed`.
pub fn scatter_noise(img: &ImageBuffer, intensity: f64, seed: u64) -> Result<ImageBuffer, AugmentError> {
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return Err(AugmentError::InvalidConfig(format!(
            "noise intensity must be >= 0, got {intensity}"
        )));
    }
    if intensity == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(0.0, intensity).expect("finite positive sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = img
        .data()
        .iter()
        .map(|&v| to_u8(v as f64 + normal.sample(&mut rng)))
        .collect();
    ImageBuffer::new(img.width(), img.height(), img.channels(), data)
}

/// Discrete 1-D blur kernel applied along `direction` (radians from +x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlurKernel {
    direction: f64,
    weights: Vec<f64>,
}

impl BlurKernel {
    pub fn new(direction: f64, weights: Vec<f64>) -> Result<Self, AugmentError> {
        if weights.is_empty() {
            return Err(AugmentError::InvalidConfig("blur kernel needs >= 1 tap".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(AugmentError::InvalidConfig(format!(
                "blur weights sum to {sum}, expected 1"
            )));
        }
        if !direction.is_finite() {
            return Err(AugmentError::InvalidConfig("blur direction must be finite".into()));
        }
        Ok(Self { direction, weights })
    }

    /// Uniform weights over `length` taps.
    pub fn box_kernel(length: usize, direction: f64) -> Result<Self, AugmentError> {
        if length == 0 {
            return Err(AugmentError::InvalidConfig("blur kernel needs >= 1 tap".into()));
        }
        Self::new(direction, vec![1.0 / length as f64; length])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn direction(&self) -> f64 {
        self.direction
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Tap offsets along the blur direction, centered on zero.
    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        let half = (self.weights.len() - 1) as f64 / 2.0;
        (0..self.weights.len()).map(move |u| u as f64 - half)
    }
}

/// `out(x) = sum_u w(u) * in(x - u * d)`, bilinear between pixels, with
/// coordinates clamped to the image edge. Values are left unrounded, in
/// the same layout as [`ImageBuffer::data`].
pub fn motion_blur_field(img: &ImageBuffer, k: &BlurKernel) -> Vec<f64> {
    let (dx, dy) = (k.direction.cos(), k.direction.sin());
    // Snap axis-aligned directions so integer taps stay on the pixel lattice.
    let snap = |v: f64| if v.abs() < 1e-12 { 0.0 } else if (v.abs() - 1.0).abs() < 1e-12 { v.signum() } else { v };
    let (dx, dy) = (snap(dx), snap(dy));
    let taps: Vec<(f64, f64, f64)> = k
        .offsets()
        .zip(k.weights())
        .map(|(u, &w)| (-u * dx, -u * dy, w))
        .collect();
    let ch = img.channels();
    let mut out = Vec::with_capacity(img.data().len());
    for y in 0..img.height() {
        for x in 0..img.width() {
            for c in 0..ch {
                out.push(
                    taps.iter()
                        .map(|&(ox, oy, w)| w * img.sample_clamped(x as f64 + ox, y as f64 + oy, c))
                        .sum(),
                );
            }
        }
    }
    out
}

/// [`motion_blur_field`] rounded back to 8 bits.
pub fn motion_blur(img: &ImageBuffer, k: &BlurKernel) -> ImageBuffer {
    if k.len() == 1 {
        return img.clone();
    }
    let data = motion_blur_field(img, k).into_iter().map(to_u8).collect();
    ImageBuffer::new(img.width(), img.height(), img.channels(), data).expect("same shape as the input")
}
