//! Dense float images (row-major, interleaved channels) and the `(T, V)`
//! multiview input grid.

use crate::camera::CameraPose;
use crate::error::{Error, Result};
use crate::math::Real;
use crate::plucker::plucker_embed;

#[derive(Debug, Clone, PartialEq)]
pub struct Image<T = f32> {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<T>,
}

impl<T: Real> Image<T> {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self::filled(width, height, channels, T::zero())
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: T) -> Self {
        Image {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        }
    }

    pub fn from_data(width: usize, height: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height * channels {
            return Err(Error::shape("image data", width * height * channels, data.len()));
        }
        Ok(Image {
            width,
            height,
            channels,
            data,
        })
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> T {
        self.data[self.idx(x, y, c)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: T) {
        let i = self.idx(x, y, c);
        self.data[i] = v;
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[T] {
        let i = self.idx(x, y, 0);
        &self.data[i..i + self.channels]
    }

    pub fn same_shape(&self, other: &Image<T>) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub fn check_same_shape(&self, other: &Image<T>) -> Result<()> {
        if self.width != other.width {
            return Err(Error::shape("image width", self.width, other.width));
        }
        if self.height != other.height {
            return Err(Error::shape("image height", self.height, other.height));
        }
        if self.channels != other.channels {
            return Err(Error::shape("image channels", self.channels, other.channels));
        }
        Ok(())
    }

    /// Extracts channels `[start, start + count)`.
    pub fn channels_range(&self, start: usize, count: usize) -> Image<T> {
        assert!(start + count <= self.channels);
        let mut out = Image::new(self.width, self.height, count);
        for (dst, src) in out
            .data
            .chunks_exact_mut(count)
            .zip(self.data.chunks_exact(self.channels))
        {
            dst.copy_from_slice(&src[start..start + count]);
        }
        out
    }

    /// Channel-wise concatenation of equally sized images.
    pub fn concat_channels(parts: &[&Image<T>]) -> Result<Image<T>> {
        let first = parts.first().ok_or_else(|| Error::invalid("no images to concatenate"))?;
        let (w, h) = (first.width, first.height);
        for p in parts {
            if p.width != w || p.height != h {
                return Err(Error::shape("image size", w * h, p.width * p.height));
            }
        }
        let channels: usize = parts.iter().map(|p| p.channels).sum();
        let mut data = Vec::with_capacity(w * h * channels);
        for px in 0..w * h {
            for p in parts {
                data.extend_from_slice(&p.data[px * p.channels..(px + 1) * p.channels]);
            }
        }
        Image::from_data(w, h, channels, data)
    }

    /// `a * self + b * other`, elementwise.
    pub fn blend(&self, a: T, other: &Image<T>, b: T) -> Result<Image<T>> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&x, &y)| a * x + b * y).collect();
        Ok(Image {
            data,
            ..*self
        })
    }

    /// Bilinear sample at continuous pixel coordinates (pixel centres at
    /// `i + 0.5`), clamping to the border.
    pub fn sample_bilinear(&self, x: T, y: T, c: usize) -> T {
        let half = T::of(0.5);
        let fx = (x - half).max(T::zero()).min(T::of((self.width - 1) as f64));
        let fy = (y - half).max(T::zero()).min(T::of((self.height - 1) as f64));
        let x0 = fx.floor().to_usize().unwrap_or(0).min(self.width - 1);
        let y0 = fy.floor().to_usize().unwrap_or(0).min(self.height - 1);
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let tx = fx - T::of(x0 as f64);
        let ty = fy - T::of(y0 as f64);
        let top = self.get(x0, y0, c) * (T::one() - tx) + self.get(x1, y0, c) * tx;
        let bot = self.get(x0, y1, c) * (T::one() - tx) + self.get(x1, y1, c) * tx;
        top * (T::one() - ty) + bot * ty
    }

    pub fn cast<U: Real>(&self) -> Image<U> {
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|v| U::of(v.f64())).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Channel layout of an [`ImageGrid`] cell: RGB, alpha, Plücker (d, m).
pub const GRID_CHANNELS: usize = 10;
/// Channels the reconstruction network consumes: RGB + Plücker.
pub const MODEL_INPUT_CHANNELS: usize = 9;

/// The `T x V` multiview input grid. Each cell carries RGB, alpha and the
/// 6-channel Plücker embedding of its pose.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    pub frames: usize,
    pub views: usize,
    pub width: usize,
    pub height: usize,
    /// `(T, V, H, W, 10)`, row-major.
    pub data: Vec<f32>,
    /// `(T, V)` poses, row-major.
    pub poses: Vec<CameraPose>,
}

impl ImageGrid {
    /// Builds a grid from per-cell RGBA images and poses (row-major `(T, V)`).
    pub fn from_cells(
        frames: usize,
        views: usize,
        rgba: &[Image],
        poses: &[CameraPose],
    ) -> Result<ImageGrid> {
        if rgba.len() != frames * views {
            return Err(Error::shape("grid cells", frames * views, rgba.len()));
        }
        if poses.len() != frames * views {
            return Err(Error::shape("grid poses", frames * views, poses.len()));
        }
        let first = rgba.first().ok_or_else(|| Error::invalid("empty grid"))?;
        let (w, h) = (first.width, first.height);
        let mut data = Vec::with_capacity(frames * views * w * h * GRID_CHANNELS);
        for (img, pose) in rgba.iter().zip(poses) {
            if img.channels != 4 {
                return Err(Error::shape("grid cell channels", 4, img.channels));
            }
            if img.width != w || img.height != h {
                return Err(Error::shape("grid cell size", w * h, img.width * img.height));
            }
            if pose.width != w || pose.height != h {
                return Err(Error::shape("grid pose resolution", w * h, pose.width * pose.height));
            }
            let plucker = plucker_embed::<f32>(pose);
            let cell = Image::concat_channels(&[img, &plucker])?;
            data.extend_from_slice(&cell.data);
        }
        Ok(ImageGrid {
            frames,
            views,
            width: w,
            height: h,
            data,
            poses: poses.to_vec(),
        })
    }

    pub fn cell_len(&self) -> usize {
        self.width * self.height * GRID_CHANNELS
    }

    pub fn cell(&self, t: usize, v: usize) -> &[f32] {
        let n = self.cell_len();
        let k = t * self.views + v;
        &self.data[k * n..(k + 1) * n]
    }

    pub fn cell_image(&self, t: usize, v: usize) -> Image {
        Image {
            width: self.width,
            height: self.height,
            channels: GRID_CHANNELS,
            data: self.cell(t, v).to_vec(),
        }
    }

    pub fn rgb(&self, t: usize, v: usize) -> Image {
        self.cell_image(t, v).channels_range(0, 3)
    }

    pub fn alpha(&self, t: usize, v: usize) -> Image {
        self.cell_image(t, v).channels_range(3, 1)
    }

    pub fn pose(&self, t: usize, v: usize) -> &CameraPose {
        &self.poses[t * self.views + v]
    }

    /// The network input for cell `(t, v)`: RGB + Plücker, `H x W x 9`.
    pub fn model_input(&self, t: usize, v: usize) -> Vec<f32> {
        let mut out = Vec::with_capacity(self.width * self.height * MODEL_INPUT_CHANNELS);
        for px in self.cell(t, v).chunks_exact(GRID_CHANNELS) {
            out.extend_from_slice(&px[0..3]);
            out.extend_from_slice(&px[4..10]);
        }
        out
    }
}
