use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BlobDetector, BoundingBox, DepthMap, VisionError};
use crate::augment::ImageBuffer;

/// A planar object facing the camera at a fixed depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub species: String,
    pub depth_m: f64,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    /// Paint color in rendered frames; the blob key color when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<[u8; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub far_m: f64,
    #[serde(default)]
    pub objects: Vec<SceneObject>,
    #[serde(default = "default_background")]
    pub background: [u8; 3],
}

fn default_background() -> [u8; 3] {
    [16, 48, 64]
}

impl SceneSpec {
    pub fn empty(far_m: f64) -> Self {
        Self {
            far_m,
            objects: Vec::new(),
            background: default_background(),
        }
    }

    pub fn with_object(mut self, species: &str, depth_m: f64, bbox: BoundingBox) -> Self {
        self.objects.push(SceneObject {
            species: species.to_string(),
            depth_m,
            bbox,
            color: None,
        });
        self
    }

    pub fn validate(&self) -> Result<(), VisionError> {
        if !DepthMap::is_valid(self.far_m) {
            return Err(VisionError::InvalidDepth(self.far_m));
        }
        for obj in &self.objects {
            if !DepthMap::is_valid(obj.depth_m) {
                return Err(VisionError::InvalidDepth(obj.depth_m));
            }
            if obj.bbox.w == 0 || obj.bbox.h == 0 {
                return Err(VisionError::EmptyBox);
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, VisionError> {
        let scene: Self = serde_json::from_str(text).map_err(|e| VisionError::Format(e.to_string()))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Self, VisionError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| VisionError::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Objects ordered far to near, so painting in order leaves the nearest on top.
    fn painter_order(&self) -> Vec<&SceneObject> {
        let mut objs: Vec<_> = self.objects.iter().collect();
        objs.sort_by(|a, b| b.depth_m.total_cmp(&a.depth_m));
        objs
    }

    /// RGB frame with each object painted as a solid rectangle.
    pub fn render_frame(&self, width: usize, height: usize) -> ImageBuffer {
        let mut img = ImageBuffer::from_fn(width, height, 3, |_, _, c| self.background[c]);
        for obj in self.painter_order() {
            let color = obj.color.unwrap_or(BlobDetector::DEFAULT_KEY);
            for_each_pixel(&obj.bbox, width, height, |x, y| {
                for (c, &v) in color.iter().enumerate() {
                    img.set(x, y, c, v);
                }
            });
        }
        img
    }
}

fn for_each_pixel(b: &BoundingBox, width: usize, height: usize, mut f: impl FnMut(usize, usize)) {
    let x1 = (b.right() as usize).min(width);
    let y1 = (b.bottom() as usize).min(height);
    for y in (b.y as usize)..y1 {
        for x in (b.x as usize)..x1 {
            f(x, y);
        }
    }
}

/// Depth rendered from the scene: `far_m` everywhere except object boxes,
/// where the nearest covering object wins.
pub fn render_depth(width: usize, height: usize, scene: &SceneSpec) -> Result<DepthMap, VisionError> {
    scene.validate()?;
    let mut map = DepthMap::uniform(width, height, scene.far_m)?;
    for obj in &scene.objects {
        for_each_pixel(&obj.bbox, width, height, |x, y| {
            if obj.depth_m < map.get(x, y) {
                map.set(x, y, obj.depth_m);
            }
        });
    }
    Ok(map)
}

/// Source of depth maps for frames.
pub trait DepthProvider {
    fn depth_for(&self, frame_id: u32, frame: &ImageBuffer) -> Result<DepthMap, VisionError>;
}

impl<P: DepthProvider + ?Sized> DepthProvider for Box<P> {
    fn depth_for(&self, frame_id: u32, frame: &ImageBuffer) -> Result<DepthMap, VisionError> {
        (**self).depth_for(frame_id, frame)
    }
}

/// Same depth everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformDepth(pub f64);

impl DepthProvider for UniformDepth {
    fn depth_for(&self, _frame_id: u32, frame: &ImageBuffer) -> Result<DepthMap, VisionError> {
        DepthMap::uniform(frame.width(), frame.height(), self.0)
    }
}

/// Renders depth from known scenes, optionally per frame id.
#[derive(Debug, Clone)]
pub struct SceneDepth {
    pub default: SceneSpec,
    pub per_frame: BTreeMap<u32, SceneSpec>,
}

impl SceneDepth {
    pub fn new(default: SceneSpec) -> Self {
        Self {
            default,
            per_frame: BTreeMap::new(),
        }
    }
}

impl DepthProvider for SceneDepth {
    fn depth_for(&self, frame_id: u32, frame: &ImageBuffer) -> Result<DepthMap, VisionError> {
        let scene = self.per_frame.get(&frame_id).unwrap_or(&self.default);
        render_depth(frame.width(), frame.height(), scene)
    }
}
