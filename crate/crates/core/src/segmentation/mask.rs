use std::io::Cursor;
use std::path::Path;

use image::{GrayImage, ImageFormat, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary per-pixel labeling, foreground = 1, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationMask {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

/// One run of foreground pixels in row-major order: `[start, length]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run(pub usize, pub usize);

impl SegmentationMask {
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![0; (width * height) as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut m = Self::empty(width, height);
        for y in 0..height {
            for x in 0..width {
                m.data[(y * width + x) as usize] = f(x, y) as u8;
            }
        }
        m
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != (width * height) as usize {
            return Err(Error::InvalidArgument(format!(
                "{} mask values for a {width}x{height} image",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data: bits.into_iter().map(u8::from).collect(),
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[(y * self.width + x) as usize] != 0
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.data[(y * self.width + x) as usize] = value as u8;
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        self.data.iter().map(|&v| v != 0)
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| 1 - v).collect(),
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn to_rle(&self) -> Vec<Run> {
        let mut runs = Vec::new();
        let mut start = None;
        for (i, &v) in self.data.iter().enumerate() {
            match (v != 0, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push(Run(s, i - s));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push(Run(s, self.data.len() - s));
        }
        runs
    }

    pub fn from_rle(width: u32, height: u32, runs: &[Run]) -> Result<Self> {
        let mut m = Self::empty(width, height);
        for &Run(start, len) in runs {
            let end = start
                .checked_add(len)
                .filter(|&e| e <= m.data.len())
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("run [{start}, {len}] leaves the image"))
                })?;
            m.data[start..end].fill(1);
        }
        Ok(m)
    }

    pub fn to_gray_image(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| {
            Luma([if self.get(x, y) { 255 } else { 0 }])
        })
    }

    /// Any nonzero pixel is foreground.
    pub fn from_gray_image(img: &GrayImage) -> Self {
        Self::from_fn(img.width(), img.height(), |x, y| {
            img.get_pixel(x, y)[0] != 0
        })
    }

    pub fn to_png_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Cursor::new(Vec::new());
        self.to_gray_image().write_to(&mut out, ImageFormat::Png)?;
        Ok(out.into_inner())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_png_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::from_gray_image(&image::open(path)?.to_luma8()))
    }
}
