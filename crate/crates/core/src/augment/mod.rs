//! Image similarity metrics, corpus deduplication and underwater-capture
//! augmentations.

mod corpus;
mod dedup;
mod image;
mod metrics;
mod pipeline;
mod transforms;

use std::path::PathBuf;

use thiserror::Error;

pub use self::corpus::{random_scene, synthetic_corpus, CorpusSpec};
pub use self::dedup::{dedup, dedup_report, DedupConfig, DedupDecision, PairScore};
pub use self::image::{ImageBuffer, Shape};
pub use self::metrics::{mse, patch_distance, ssd, ssim, ssim_with, SsimParams};
pub use self::pipeline::{AugmentPlan, BlurSpec, Range};
pub use self::transforms::{
    contrast_adjust, fisheye_transform, motion_blur, motion_blur_field, scatter_noise, BlurKernel, FisheyeParams,
};

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("image shapes differ: {left} vs {right}")]
    ShapeMismatch { left: Shape, right: Shape },
    #[error("SSIM window {window} exceeds image extent {width}x{height}")]
    WindowTooLarge {
        window: usize,
        width: usize,
        height: usize,
    },
    #[error("image must be at least 1x1")]
    EmptyImage,
    #[error("unsupported channel count {0} (expected 1 or 3)")]
    UnsupportedChannels(usize),
    #[error("pixel buffer has {actual} bytes, expected {expected}")]
    BadDataLength { expected: usize, actual: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("image codec: {0}")]
    Codec(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
