//! Detection and depth interfaces plus monocular length estimation.

mod detect;
mod measure;
mod scene;
mod types;

use thiserror::Error;

pub use self::detect::{Annotation, BlobDetector, Detector, SidecarDetector};
pub use self::measure::{depth_gate, estimate_length, median_box_depth, MIN_DEPTH_COVERAGE};
pub use self::scene::{render_depth, DepthProvider, SceneDepth, SceneObject, SceneSpec, UniformDepth};
pub use self::types::{BoundingBox, CameraIntrinsics, DepthMap, Detection, LengthEstimate, LensModel};

#[derive(Debug, Error)]
pub enum VisionError {
    #[error("bounding box must have positive width and height")]
    EmptyBox,
    #[error("invalid detection: {0}")]
    InvalidDetection(String),
    #[error("depth map has {actual} values, expected {expected}")]
    DepthShape { expected: usize, actual: usize },
    #[error("invalid depth value {0}")]
    InvalidDepth(f64),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("box {bbox:?} exceeds {width}x{height} depth map")]
    BoxOutOfBounds {
        bbox: BoundingBox,
        width: usize,
        height: usize,
    },
    #[error("only {:.1}% of box pixels have valid depth", coverage * 100.0)]
    InsufficientDepth { coverage: f64 },
    #[error("no annotation for frame {0}")]
    MissingAnnotation(u32),
    #[error("malformed vision input: {0}")]
    Format(String),
}
