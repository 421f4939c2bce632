//! Pixel-difference and structural similarity metrics.
//!
//! Color images are treated as one flat sample set: every metric sums over
//! all channels jointly, so thresholds mean the same thing for gray and RGB.

use serde::{Deserialize, Serialize};

use super::{AugmentError, ImageBuffer};

/// Stabilizing constants and window for SSIM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub c1: f64,
    pub c2: f64,
    pub window: usize,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            c1: (0.01 * 255.0f64).powi(2),
            c2: (0.03 * 255.0f64).powi(2),
            window: 8,
        }
    }
}

fn check_shapes(a: &ImageBuffer, b: &ImageBuffer) -> Result<(), AugmentError> {
    if a.shape() != b.shape() {
        return Err(AugmentError::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

/// Sum of squared differences over every pixel and channel.
pub fn ssd(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64, AugmentError> {
    check_shapes(a, b)?;
    let total: u64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&p, &q)| {
            let d = p as i64 - q as i64;
            (d * d) as u64
        })
        .sum();
    Ok(total as f64)
}

/// `ssd` divided by the number of samples.
pub fn mse(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64, AugmentError> {
    Ok(ssd(a, b)? / a.data().len() as f64)
}

/// Mean SSIM over non-overlapping `window x window` tiles with the default
/// constants. Only whole tiles contribute.
pub fn ssim(a: &ImageBuffer, b: &ImageBuffer, window: usize) -> Result<f64, AugmentError> {
    ssim_with(
        a,
        b,
        SsimParams {
            window,
            ..SsimParams::default()
        },
    )
}

pub fn ssim_with(a: &ImageBuffer, b: &ImageBuffer, params: SsimParams) -> Result<f64, AugmentError> {
    check_shapes(a, b)?;
    let window = params.window;
    if window == 0 || window > a.width().min(a.height()) {
        return Err(AugmentError::WindowTooLarge {
            window,
            width: a.width(),
            height: a.height(),
        });
    }
    let tiles_x = a.width() / window;
    let tiles_y = a.height() / window;
    let mut total = 0.0;
    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            total += window_ssim(a, b, tx * window, ty * window, window, &params);
        }
    }
    Ok(total / (tiles_x * tiles_y) as f64)
}

fn window_ssim(
    a: &ImageBuffer,
    b: &ImageBuffer,
    x0: usize,
    y0: usize,
    window: usize,
    params: &SsimParams,
) -> f64 {
    let ch = a.channels();
    let row_len = window * ch;
    let n = (window * row_len) as f64;

    fn rows<'a>(
        img: &'a ImageBuffer,
        x0: usize,
        y0: usize,
        window: usize,
        row_len: usize,
    ) -> impl Iterator<Item = &'a [u8]> + 'a {
        (y0..y0 + window).map(move |y| {
            let start = img.index(x0, y, 0);
            &img.data()[start..start + row_len]
        })
    }

    let (mut sum_a, mut sum_b) = (0.0, 0.0);
    for (ra, rb) in rows(a, x0, y0, window, row_len).zip(rows(b, x0, y0, window, row_len)) {
        for (&p, &q) in ra.iter().zip(rb) {
            sum_a += p as f64;
            sum_b += q as f64;
        }
    }
    let mu_a = sum_a / n;
    let mu_b = sum_b / n;

    let (mut var_a, mut var_b, mut cov) = (0.0, 0.0, 0.0);
    for (ra, rb) in rows(a, x0, y0, window, row_len).zip(rows(b, x0, y0, window, row_len)) {
        for (&p, &q) in ra.iter().zip(rb) {
            let da = p as f64 - mu_a;
            let db = q as f64 - mu_b;
            var_a += da * da;
            var_b += db * db;
            cov += da * db;
        }
    }
    var_a /= n;
    var_b /= n;
    cov /= n;

    let num = (2.0 * mu_a * mu_b + params.c1) * (2.0 * cov + params.c2);
    let den = (mu_a * mu_a + mu_b * mu_b + params.c1) * (var_a + var_b + params.c2);
    num / den
}

/// Mean over a `patch_size` grid of per-patch MSE. Trailing partial patches
/// count as full grid cells, normalized by their own sample count.
pub fn patch_distance(
    a: &ImageBuffer,
    b: &ImageBuffer,
    patch_size: usize,
) -> Result<f64, AugmentError> {
    check_shapes(a, b)?;
    if patch_size == 0 {
        return Err(AugmentError::InvalidConfig("patch_size must be >= 1".into()));
    }
    let ch = a.channels();
    let (da, db) = (a.data(), b.data());
    let mut total = 0.0;
    let mut patches = 0usize;
    for y0 in (0..a.height()).step_by(patch_size) {
        let y1 = (y0 + patch_size).min(a.height());
        for x0 in (0..a.width()).step_by(patch_size) {
            let x1 = (x0 + patch_size).min(a.width());
            let mut sum = 0u64;
            for y in y0..y1 {
                let start = a.index(x0, y, 0);
                let end = start + (x1 - x0) * ch;
                for (&p, &q) in da[start..end].iter().zip(&db[start..end]) {
                    let d = p as i64 - q as i64;
                    sum += (d * d) as u64;
                }
            }
            let count = ((x1 - x0) * (y1 - y0) * ch) as f64;
            total += sum as f64 / count;
            patches += 1;
        }
    }
    Ok(total / patches as f64)
}
