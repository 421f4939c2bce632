use serde::{Deserialize, Serialize};

use super::VisionError;

/// Axis-aligned pixel rectangle; `(x, y)` is the top-left pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BoundingBox {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Result<Self, VisionError> {
        if w == 0 || h == 0 {
            return Err(VisionError::EmptyBox);
        }
        Ok(Self { x, y, w, h })
    }

    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    pub fn major_axis(&self) -> u32 {
        self.w.max(self.h)
    }

    pub fn right(&self) -> u64 {
        self.x as u64 + self.w as u64
    }

    pub fn bottom(&self) -> u64 {
        self.y as u64 + self.h as u64
    }

    pub fn contains(&self, px: u32, py: u32) -> bool {
        px >= self.x && (px as u64) < self.right() && py >= self.y && (py as u64) < self.bottom()
    }

    pub fn intersects_frame(&self, width: usize, height: usize) -> bool {
        (self.x as usize) < width && (self.y as usize) < height
    }

    pub fn within_frame(&self, width: usize, height: usize) -> bool {
        self.right() <= width as u64 && self.bottom() <= height as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub species: String,
    pub confidence: f64,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
}

impl Detection {
    pub fn new(species: impl Into<String>, confidence: f64, bbox: BoundingBox) -> Result<Self, VisionError> {
        let species = species.into();
        if species.trim().is_empty() {
            return Err(VisionError::InvalidDetection("species must be non-empty".into()));
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(VisionError::InvalidDetection(format!(
                "confidence {confidence} outside [0, 1]"
            )));
        }
        if bbox.w == 0 || bbox.h == 0 {
            return Err(VisionError::EmptyBox);
        }
        Ok(Self {
            species,
            confidence,
            bbox,
        })
    }
}

/// Per-pixel metric depth; `0.0` marks an invalid pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    depth: Vec<f64>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, depth: Vec<f64>) -> Result<Self, VisionError> {
        if depth.len() != width * height {
            return Err(VisionError::DepthShape {
                expected: width * height,
                actual: depth.len(),
            });
        }
        if let Some(bad) = depth.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(VisionError::InvalidDepth(*bad));
        }
        Ok(Self {
            width,
            height,
            depth,
        })
    }

    pub fn uniform(width: usize, height: usize, depth_m: f64) -> Result<Self, VisionError> {
        Self::new(width, height, vec![depth_m; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.depth[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.depth[y * self.width + x] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.depth
    }

    pub fn is_valid(value: f64) -> bool {
        value > 0.0 && value.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LensModel {
    Pinhole,
    EquidistantFisheye,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub focal_px: f64,
    pub cx: f64,
    pub cy: f64,
    pub model: LensModel,
}

impl CameraIntrinsics {
    pub fn new(focal_px: f64, cx: f64, cy: f64, model: LensModel) -> Result<Self, VisionError> {
        if !(focal_px > 0.0 && focal_px.is_finite()) {
            return Err(VisionError::InvalidCamera(format!("focal_px must be > 0, got {focal_px}")));
        }
        Ok(Self {
            focal_px,
            cx,
            cy,
            model,
        })
    }

    pub fn pinhole(focal_px: f64, cx: f64, cy: f64) -> Result<Self, VisionError> {
        Self::new(focal_px, cx, cy, LensModel::Pinhole)
    }

    pub fn fisheye(focal_px: f64, cx: f64, cy: f64) -> Result<Self, VisionError> {
        Self::new(focal_px, cx, cy, LensModel::EquidistantFisheye)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthEstimate {
    pub length_cm: f64,
    pub depth_used_m: f64,
    pub method: LensModel,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_edges_are_half_open() {
        let b = BoundingBox::new(2, 3, 4, 5).unwrap();
        assert!(b.contains(2, 3) && b.contains(5, 7));
        assert!(!b.contains(6, 7) && !b.contains(5, 8));
        assert!(b.within_frame(6, 8));
        assert!(!b.within_frame(5, 8));
        assert_eq!((b.area(), b.major_axis()), (20, 5));
    }

    #[test]
    fn empty_boxes_are_rejected() {
        assert!(BoundingBox::new(0, 0, 0, 4).is_err());
        assert!(BoundingBox::new(0, 0, 4, 0).is_err());
    }

    #[test]
    fn detection_serializes_box_field() {
        let d = Detection::new("walleye", 0.5, BoundingBox::new(1, 2, 3, 4).unwrap()).unwrap();
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["box"]["w"], 3);
    }
}
