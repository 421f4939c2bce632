use std::fmt;
use std::path::Path;

use super::AugmentError;

/// 8-bit raster, row-major with interleaved channels.
#[derive(Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<u8>,
    ) -> Result<Self, AugmentError> {
        if width == 0 || height == 0 {
            return Err(AugmentError::EmptyImage);
        }
        if channels != 1 && channels != 3 {
            return Err(AugmentError::UnsupportedChannels(channels));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(AugmentError::BadDataLength {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image with every sample set to `value`.
    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Self {
        Self::new(width, height, channels, vec![value; width * height * channels])
            .expect("filled: invalid dimensions")
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, data).expect("from_fn: invalid dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn shape(&self) -> Shape {
        Shape {
            width: self.width,
            height: self.height,
            channels: self.channels,
        }
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[self.index(x, y, c)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, value: u8) {
        let i = self.index(x, y, c);
        self.data[i] = value;
    }

    /// Bilinear sample at continuous pixel coordinates; `None` outside the
    /// pixel-centre lattice `[0, w-1] x [0, h-1]`.
    pub fn sample_bilinear(&self, x: f64, y: f64, c: usize) -> Option<f64> {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        if !(0.0..=max_x).contains(&x) || !(0.0..=max_y).contains(&y) {
            return None;
        }
        Some(self.sample_clamped(x, y, c))
    }

    /// Bilinear sample with coordinates clamped to the image edge.
    pub fn sample_clamped(&self, x: f64, y: f64, c: usize) -> f64 {
        let x = x.clamp(0.0, (self.width - 1) as f64);
        let y = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let p00 = self.get(x0, y0, c) as f64;
        if fx == 0.0 && fy == 0.0 {
            return p00;
        }
        let p10 = self.get(x1, y0, c) as f64;
        let p01 = self.get(x0, y1, c) as f64;
        let p11 = self.get(x1, y1, c) as f64;
        let top = p00 + (p10 - p00) * fx;
        let bottom = p01 + (p11 - p01) * fx;
        top + (bottom - top) * fy
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    pub fn channel_mean(&self, c: usize) -> f64 {
        let sum: f64 = self
            .data
            .iter()
            .skip(c)
            .step_by(self.channels)
            .map(|&v| v as f64)
            .sum();
        sum / (self.width * self.height) as f64
    }

    pub fn to_dynamic(&self) -> image::DynamicImage {
        match self.channels {
            1 => image::DynamicImage::ImageLuma8(
                image::GrayImage::from_raw(self.width as u32, self.height as u32, self.data.clone())
                    .expect("buffer length checked at construction"),
            ),
            _ => image::DynamicImage::ImageRgb8(
                image::RgbImage::from_raw(self.width as u32, self.height as u32, self.data.clone())
                    .expect("buffer length checked at construction"),
            ),
        }
    }

    /// Grayscale and RGB images keep their layout; anything else becomes RGB.
    pub fn from_dynamic(img: &image::DynamicImage) -> Self {
        match img {
            image::DynamicImage::ImageLuma8(g) => Self::new(
                g.width() as usize,
                g.height() as usize,
                1,
                g.as_raw().clone(),
            )
            .expect("decoded image is non-empty"),
            other => {
                let rgb = other.to_rgb8();
                Self::new(
                    rgb.width() as usize,
                    rgb.height() as usize,
                    3,
                    rgb.into_raw(),
                )
                .expect("decoded image is non-empty")
            }
        }
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, AugmentError> {
        let mut out = std::io::Cursor::new(Vec::new());
        self.to_dynamic()
            .write_to(&mut out, image::ImageFormat::Png)
            .map_err(|e| AugmentError::Codec(e.to_string()))?;
        Ok(out.into_inner())
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Self, AugmentError> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
            .map_err(|e| AugmentError::Codec(e.to_string()))?;
        if img.width() == 0 || img.height() == 0 {
            return Err(AugmentError::EmptyImage);
        }
        Ok(Self::from_dynamic(&img))
    }

    pub fn load_png(path: &Path) -> Result<Self, AugmentError> {
        let bytes = std::fs::read(path).map_err(|source| AugmentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::decode_png(&bytes)
    }

    pub fn save_png(&self, path: &Path) -> Result<(), AugmentError> {
        let bytes = self.encode_png()?;
        std::fs::write(path, bytes).map_err(|source| AugmentError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

impl fmt::Debug for ImageBuffer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImageBuffer")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.width, self.height, self.channels)
    }
}
