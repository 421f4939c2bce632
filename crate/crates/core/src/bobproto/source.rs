use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::ProtoError;
use crate::augment::ImageBuffer;
use crate::vision::{BoundingBox, SceneSpec};

/// Supplies PNG-encoded frames to the simulator.
pub trait FrameSource {
    fn frame(&mut self, frame_id: u32) -> Result<Arc<[u8]>, ProtoError>;
}

impl<S: FrameSource + ?Sized> FrameSource for Box<S> {
    fn frame(&mut self, frame_id: u32) -> Result<Arc<[u8]>, ProtoError> {
        (**self).frame(frame_id)
    }
}

/// Cycles through the PNG files of a directory in name order.
#[derive(Debug, Clone)]
pub struct DirectorySource {
    frames: Vec<Arc<[u8]>>,
    names: Vec<PathBuf>,
}

impl DirectorySource {
    pub fn open(dir: &Path) -> Result<Self, ProtoError> {
        let io = |e: std::io::Error| ProtoError::Source(format!("{}: {e}", dir.display()));
        let mut names: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
            .collect();
        names.sort();
        if names.is_empty() {
            return Err(ProtoError::Source(format!("no PNG files in {}", dir.display())));
        }
        let frames = names
            .iter()
            .map(|p| std::fs::read(p).map(Arc::from).map_err(io))
            .collect::<Result<_, _>>()?;
        Ok(Self { frames, names })
    }

    pub fn names(&self) -> &[PathBuf] {
        &self.names
    }
}

impl FrameSource for DirectorySource {
    fn frame(&mut self, frame_id: u32) -> Result<Arc<[u8]>, ProtoError> {
        Ok(self.frames[frame_id as usize % self.frames.len()].clone())
    }
}

/// Scripted scenes, each shown for a number of frames; the script loops.
/// Each distinct scene is rendered and encoded once.
#[derive(Debug, Clone)]
pub struct SceneScript {
    pub width: usize,
    pub height: usize,
    segments: Vec<(u32, SceneSpec)>,
    cache: Vec<Option<Arc<[u8]>>>,
}

impl SceneScript {
    pub fn new(width: usize, height: usize, segments: Vec<(u32, SceneSpec)>) -> Result<Self, ProtoError> {
        if segments.is_empty() || segments.iter().all(|(n, _)| *n == 0) {
            return Err(ProtoError::Source("scene script has no frames".into()));
        }
        let cache = vec![None; segments.len()];
        Ok(Self {
            width,
            height,
            segments,
            cache,
        })
    }

    /// Two seconds of open water, then a 60 x 15 px fish for three seconds
    /// (at 24 fps).
    pub fn fish_pass(species: &str) -> Self {
        let empty = SceneSpec::empty(5.0);
        let fish = SceneSpec::empty(5.0).with_object(
            species,
            1.0,
            BoundingBox::new(50, 52, 60, 15).expect("non-empty box"),
        );
        Self::new(160, 120, vec![(48, empty), (72, fish)]).expect("non-empty script")
    }

    fn cycle_len(&self) -> u64 {
        self.segments.iter().map(|(n, _)| *n as u64).sum()
    }

    /// Scene shown at `frame_id`.
    pub fn scene_index(&self, frame_id: u32) -> usize {
        let mut pos = frame_id as u64 % self.cycle_len();
        for (i, (n, _)) in self.segments.iter().enumerate() {
            if pos < *n as u64 {
                return i;
            }
            pos -= *n as u64;
        }
        unreachable!("position is reduced modulo the cycle length")
    }

    pub fn scene_at(&self, frame_id: u32) -> &SceneSpec {
        &self.segments[self.scene_index(frame_id)].1
    }

    pub fn render(&self, frame_id: u32) -> ImageBuffer {
        self.scene_at(frame_id).render_frame(self.width, self.height)
    }
}

impl FrameSource for SceneScript {
    fn frame(&mut self, frame_id: u32) -> Result<Arc<[u8]>, ProtoError> {
        let i = self.scene_index(frame_id);
        if let Some(png) = &self.cache[i] {
            return Ok(png.clone());
        }
        let png: Arc<[u8]> = self.segments[i]
            .1
            .render_frame(self.width, self.height)
            .encode_png()
            .map_err(|e| ProtoError::Source(e.to_string()))?
            .into();
        self.cache[i] = Some(png.clone());
        Ok(png)
    }
}
