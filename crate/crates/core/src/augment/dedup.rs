use serde::{Deserialize, Serialize};

use super::metrics::{patch_distance, ssim_with, SsimParams};
use super::{AugmentError, ImageBuffer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DedupConfig {
    pub patch_size: usize,
    /// Per-sample normalized patch distance at or below which two images match.
    pub ssd_threshold: f64,
    /// SSIM at or above which two images match.
    pub ssim_threshold: f64,
    #[serde(default)]
    pub ssim: SsimParams,
}

impl Default for DedupConfig {
    fn default() -> Self {
        Self {
            patch_size: 16,
            ssd_threshold: 150.0,
            ssim_threshold: 0.9,
            ssim: SsimParams::default(),
        }
    }
}

impl DedupConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        if self.patch_size == 0 {
            return Err(AugmentError::InvalidConfig("patch_size must be >= 1".into()));
        }
        if !(self.ssd_threshold >= 0.0) {
            return Err(AugmentError::InvalidConfig("ssd_threshold must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.ssim_threshold) {
            return Err(AugmentError::InvalidConfig(
                "ssim_threshold must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Scores for one candidate against one kept image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub kept_index: usize,
    pub ssim: f64,
    pub patch_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupDecision {
    pub index: usize,
    pub kept: bool,
    /// The kept image that caused a drop, or the closest kept image otherwise.
    pub nearest: Option<PairScore>,
}

/// Greedy first-seen scan. Returns the kept indices in increasing order.
pub fn dedup(corpus: &[ImageBuffer], cfg: &DedupConfig) -> Result<Vec<usize>, AugmentError> {
    Ok(dedup_report(corpus, cfg)?
        .into_iter()
        .filter(|d| d.kept)
        .map(|d| d.index)
        .collect())
}

/// Same scan as [`dedup`], keeping the scores behind each decision.
pub fn dedup_report(
    corpus: &[ImageBuffer],
    cfg: &DedupConfig,
) -> Result<Vec<DedupDecision>, AugmentError> {
    cfg.validate()?;
    let first = corpus.first().ok_or(AugmentError::EmptyCorpus)?;
    for img in &corpus[1..] {
        if img.shape() != first.shape() {
            return Err(AugmentError::ShapeMismatch {
                left: first.shape(),
                right: img.shape(),
            });
        }
    }
    let ssim_params = SsimParams {
        window: cfg.ssim.window.min(first.width()).min(first.height()),
        ..cfg.ssim
    };

    let mut kept: Vec<usize> = Vec::new();
    let mut decisions = Vec::with_capacity(corpus.len());
    for (j, candidate) in corpus.iter().enumerate() {
        let mut nearest: Option<PairScore> = None;
        let mut duplicate = false;
        for &i in &kept {
            let score = PairScore {
                kept_index: i,
                ssim: ssim_with(&corpus[i], candidate, ssim_params)?,
                patch_distance: patch_distance(&corpus[i], candidate, cfg.patch_size)?,
            };
            if nearest.map_or(true, |n| score.patch_distance < n.patch_distance) {
                nearest = Some(score);
            }
            if score.ssim >= cfg.ssim_threshold || score.patch_distance <= cfg.ssd_threshold {
                nearest = Some(score);
                duplicate = true;
                break;
            }
        }
        if !duplicate {
            kept.push(j);
        }
        decisions.push(DedupDecision {
            index: j,
            kept: !duplicate,
            nearest,
        });
    }
    Ok(decisions)
}
