use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BoundingBox, Detection, VisionError};
use crate::augment::ImageBuffer;

/// Anything that turns a frame into detections.
pub trait Detector {
    fn detect(&self, frame_id: u32, frame: &ImageBuffer) -> Result<Vec<Detection>, VisionError>;
}

impl<D: Detector + ?Sized> Detector for Box<D> {
    fn detect(&self, frame_id: u32, frame: &ImageBuffer) -> Result<Vec<Detection>, VisionError> {
        (**self).detect(frame_id, frame)
    }
}

/// One entry of the sidecar annotation file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub species: String,
    pub confidence: f64,
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Annotation {
    fn to_detection(&self) -> Result<Detection, VisionError> {
        Detection::new(
            self.species.clone(),
            self.confidence,
            BoundingBox::new(self.x, self.y, self.w, self.h)?,
        )
    }
}

/// Replays ground-truth annotations keyed by frame id.
#[derive(Debug, Clone, Default)]
pub struct SidecarDetector {
    frames: BTreeMap<u32, Vec<Detection>>,
}

impl SidecarDetector {
    pub fn new(frames: BTreeMap<u32, Vec<Detection>>) -> Self {
        Self { frames }
    }

    pub fn from_json(text: &str) -> Result<Self, VisionError> {
        let raw: BTreeMap<String, Vec<Annotation>> =
            serde_json::from_str(text).map_err(|e| VisionError::Format(e.to_string()))?;
        let mut frames = BTreeMap::new();
        for (key, list) in raw {
            let id: u32 = key
                .parse()
                .map_err(|_| VisionError::Format(format!("frame id {key:?} is not an integer")))?;
            let dets = list
                .iter()
                .map(Annotation::to_detection)
                .collect::<Result<Vec<_>, _>>()?;
            frames.insert(id, dets);
        }
        Ok(Self { frames })
    }

    pub fn load(path: &Path) -> Result<Self, VisionError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| VisionError::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let raw: BTreeMap<String, Vec<Annotation>> = self
            .frames
            .iter()
            .map(|(id, dets)| {
                let list = dets
                    .iter()
                    .map(|d| Annotation {
                        species: d.species.clone(),
                        confidence: d.confidence,
                        x: d.bbox.x,
                        y: d.bbox.y,
                        w: d.bbox.w,
                        h: d.bbox.h,
                    })
                    .collect();
                (id.to_string(), list)
            })
            .collect();
        serde_json::to_string_pretty(&raw).expect("annotations serialize")
    }
}

impl Detector for SidecarDetector {
    fn detect(&self, frame_id: u32, _frame: &ImageBuffer) -> Result<Vec<Detection>, VisionError> {
        self.frames
            .get(&frame_id)
            .cloned()
            .ok_or(VisionError::MissingAnnotation(frame_id))
    }
}

/// Color-key blob detector: every 4-connected region of key-colored pixels
/// becomes one detection with confidence 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobDetector {
    pub key_color: [u8; 3],
    #[serde(default)]
    pub tolerance: u8,
    #[serde(default = "default_min_pixels")]
    pub min_pixels: usize,
    pub species: String,
}

fn default_min_pixels() -> usize {
    1
}

impl BlobDetector {
    pub const DEFAULT_KEY: [u8; 3] = [255, 0, 255];

    pub fn new(species: impl Into<String>) -> Self {
        Self {
            key_color: Self::DEFAULT_KEY,
            tolerance: 0,
            min_pixels: 1,
            species: species.into(),
        }
    }

    fn is_key(&self, frame: &ImageBuffer, x: usize, y: usize) -> bool {
        let tol = self.tolerance as i16;
        (0..3).all(|c| {
            let v = frame.get(x, y, c.min(frame.channels() - 1)) as i16;
            (v - self.key_color[c] as i16).abs() <= tol
        })
    }
}

impl Detector for BlobDetector {
    fn detect(&self, _frame_id: u32, frame: &ImageBuffer) -> Result<Vec<Detection>, VisionError> {
        let (w, h) = (frame.width(), frame.height());
        let mut seen = vec![false; w * h];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for y0 in 0..h {
            for x0 in 0..w {
                if seen[y0 * w + x0] || !self.is_key(frame, x0, y0) {
                    continue;
                }
                seen[y0 * w + x0] = true;
                queue.push_back((x0, y0));
                let (mut min_x, mut min_y, mut max_x, mut max_y) = (x0, y0, x0, y0);
                let mut count = 0usize;
                while let Some((x, y)) = queue.pop_front() {
                    count += 1;
                    min_x = min_x.min(x);
                    max_x = max_x.max(x);
                    min_y = min_y.min(y);
                    max_y = max_y.max(y);
                    let neighbors = [
                        (x.wrapping_sub(1), y),
                        (x + 1, y),
                        (x, y.wrapping_sub(1)),
                        (x, y + 1),
                    ];
                    for (nx, ny) in neighbors {
                        if nx < w && ny < h && !seen[ny * w + nx] && self.is_key(frame, nx, ny) {
                            seen[ny * w + nx] = true;
                            queue.push_back((nx, ny));
                        }
                    }
                }
                if count >= self.min_pixels {
                    let bbox = BoundingBox::new(
                        min_x as u32,
                        min_y as u32,
                        (max_x - min_x + 1) as u32,
                        (max_y - min_y + 1) as u32,
                    )?;
                    out.push(Detection::new(self.species.clone(), 1.0, bbox)?);
                }
            }
        }
        out.sort_by(|a, b| {
            b.bbox
                .area()
                .cmp(&a.bbox.area())
                .then(a.bbox.x.cmp(&b.bbox.x))
                .then(a.bbox.y.cmp(&b.bbox.y))
        });
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_with_rect(x0: usize, y0: usize, w: usize, h: usize) -> ImageBuffer {
        ImageBuffer::from_fn(320, 240, 3, |x, y, c| {
            if (x0..x0 + w).contains(&x) && (y0..y0 + h).contains(&y) {
                BlobDetector::DEFAULT_KEY[c]
            } else {
                0
            }
        })
    }

    #[test]
    fn black_frame_has_no_blobs() {
        let det = BlobDetector::new("perch");
        let frame = ImageBuffer::filled(64, 48, 3, 0);
        assert!(det.detect(0, &frame).unwrap().is_empty());
    }

    #[test]
    fn single_rectangle_recovered() {
        let det = BlobDetector::new("perch");
        let found = det.detect(0, &frame_with_rect(100, 50, 40, 10)).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].bbox, BoundingBox { x: 100, y: 50, w: 40, h: 10 });
        assert_eq!(found[0].confidence, 1.0);
        assert_eq!(found[0].species, "perch");
    }

    #[test]
    fn min_pixels_filters_specks() {
        let mut det = BlobDetector::new("perch");
        det.min_pixels = 5;
        let mut frame = frame_with_rect(10, 10, 20, 20);
        for c in 0..3 {
            frame.set(200, 200, c, BlobDetector::DEFAULT_KEY[c]);
        }
        assert_eq!(det.detect(0, &frame).unwrap().len(), 1);
        det.min_pixels = 1;
        let found = det.detect(0, &frame).unwrap();
        assert_eq!(found.len(), 2);
        assert_eq!(found[0].bbox.w, 20, "largest first");
    }

    #[test]
    fn sidecar_pass_through_and_missing() {
        let json = r#"{
            "7": [
                {"species": "striped_bass", "confidence": 0.91, "x": 10, "y": 20, "w": 120, "h": 40},
                {"species": "perch", "confidence": 0.55, "x": 200, "y": 30, "w": 60, "h": 20}
            ],
            "8": []
        }"#;
        let det = SidecarDetector::from_json(json).unwrap();
        let frame = ImageBuffer::filled(4, 4, 3, 0);
        let found = det.detect(7, &frame).unwrap();
        assert_eq!(found.len(), 2);
        assert_eq!(found[0].species, "striped_bass");
        assert_eq!(found[1].bbox, BoundingBox { x: 200, y: 30, w: 60, h: 20 });
        assert!(det.detect(8, &frame).unwrap().is_empty());
        assert!(matches!(det.detect(9, &frame), Err(VisionError::MissingAnnotation(9))));

        let again = SidecarDetector::from_json(&det.to_json()).unwrap();
        assert_eq!(again.detect(7, &frame).unwrap(), found);
    }

    #[test]
    fn sidecar_rejects_bad_entries() {
        assert!(SidecarDetector::from_json(r#"{"x": []}"#).is_err());
        assert!(SidecarDetector::from_json(
            r#"{"1": [{"species": "a", "confidence": 1.5, "x": 0, "y": 0, "w": 1, "h": 1}]}"#
        )
        .is_err());
        assert!(SidecarDetector::from_json(
            r#"{"1": [{"species": "a", "confidence": 0.5, "x": 0, "y": 0, "w": 0, "h": 1}]}"#
        )
        .is_err());
    }
}
