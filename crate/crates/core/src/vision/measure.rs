//! Fish length from a bounding box, a depth map and the camera model.
//!
//! Image coordinates are continuous with pixel `(i, j)` covering
//! `[i, i+1) x [j, j+1)`; box edges therefore sit at `x` and `x + w`, and the
//! optical center `(cx, cy)` is expressed in the same frame.

use super::{CameraIntrinsics, Detection, DepthMap, LengthEstimate, LensModel, VisionError};

/// Fraction of box pixels that must carry a valid depth.
pub const MIN_DEPTH_COVERAGE: f64 = 0.5;

/// Depth is worth computing only when something was detected.
pub fn depth_gate(detections: &[Detection]) -> bool {
    !detections.is_empty()
}

/// Median of the valid depths inside the box.
pub fn median_box_depth(det: &Detection, depth: &DepthMap) -> Result<f64, VisionError> {
    let b = det.bbox;
    if !b.within_frame(depth.width(), depth.height()) {
        return Err(VisionError::BoxOutOfBounds {
            bbox: b,
            width: depth.width(),
            height: depth.height(),
        });
    }
    let total = b.area() as usize;
    let mut valid: Vec<f64> = Vec::with_capacity(total);
    for y in b.y as usize..b.bottom() as usize {
        for x in b.x as usize..b.right() as usize {
            let d = depth.get(x, y);
            if DepthMap::is_valid(d) {
                valid.push(d);
            }
        }
    }
    let coverage = valid.len() as f64 / total as f64;
    if coverage < MIN_DEPTH_COVERAGE {
        return Err(VisionError::InsufficientDepth { coverage });
    }
    valid.sort_by(f64::total_cmp);
    let n = valid.len();
    Ok(if n % 2 == 1 {
        valid[n / 2]
    } else {
        (valid[n / 2 - 1] + valid[n / 2]) / 2.0
    })
}

fn view_direction(px: f64, py: f64, cam: &CameraIntrinsics) -> [f64; 3] {
    let dx = px - cam.cx;
    let dy = py - cam.cy;
    let r = dx.hypot(dy);
    if r == 0.0 {
        return [0.0, 0.0, 1.0];
    }
    let theta = r / cam.focal_px;
    let (s, c) = theta.sin_cos();
    [s * dx / r, s * dy / r, c]
}

pub fn estimate_length(
    det: &Detection,
    depth: &DepthMap,
    cam: &CameraIntrinsics,
) -> Result<LengthEstimate, VisionError> {
    let depth_m = median_box_depth(det, depth)?;
    let b = det.bbox;
    let length_cm = match cam.model {
        LensModel::Pinhole => 100.0 * b.major_axis() as f64 * depth_m / cam.focal_px,
        LensModel::EquidistantFisheye => {
            let (x, y, w, h) = (b.x as f64, b.y as f64, b.w as f64, b.h as f64);
            let (p1, p2) = if b.w >= b.h {
                ((x, y + h / 2.0), (x + w, y + h / 2.0))
            } else {
                ((x + w / 2.0, y), (x + w / 2.0, y + h))
            };
            let u1 = view_direction(p1.0, p1.1, cam);
            let u2 = view_direction(p2.0, p2.1, cam);
            let chord = u1
                .iter()
                .zip(&u2)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            100.0 * depth_m * chord
        }
    };
    Ok(LengthEstimate {
        length_cm,
        depth_used_m: depth_m,
        method: cam.model,
    })
}
