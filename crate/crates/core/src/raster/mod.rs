//! Pixel buffers and the per-pixel operations the pipeline is built on.

mod io;
mod lab;
mod metrics;
mod resample;

use std::fmt::Debug;
use std::ops::{Add, Sub};

use crate::error::{Error, Result};

pub use io::{decode_ppm, encode_ppm, load_image, save_image};
pub use lab::{rgb_to_lab, srgb_to_lab, LabImage};
pub use metrics::{masked_mean_color, mean_color, mse};
pub use resample::{resize_bilinear, rotate_image};

/// Channel sample storage. Arithmetic always happens in `f64`; `from_f64`
/// is the single place where quantization occurs.
pub trait Sample: Copy + Default + Debug + PartialEq + Send + Sync + 'static {
    fn to_f64(self) -> f64;
    fn from_f64(v: f64) -> Self;
}

impl Sample for u8 {
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }

    #[inline]
    fn from_f64(v: f64) -> Self {
        // `as` saturates and maps NaN to 0.
        v.round().clamp(0.0, 255.0) as u8
    }
}

impl Sample for f64 {
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }

    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
}

/// Row-major, channel-interleaved RGB raster.
#[derive(Clone, PartialEq)]
pub struct Image<T = u8> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// 8-bit image as read from and written to disk.
pub type RgbImage = Image<u8>;
/// Unquantized working buffer used while compositing.
pub type FloatImage = Image<f64>;

impl<T: Sample> Image<T> {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, [T::default(); 3])
    }

    pub fn filled(width: usize, height: usize, color: [T; 3]) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&color);
        }
        Ok(Image {
            width,
            height,
            data,
        })
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height * 3 {
            return Err(Error::Dimension(format!(
                "{}x{} RGB image needs {} samples, got {}",
                width,
                height,
                width * height * 3,
                data.len()
            )));
        }
        Ok(Image {
            width,
            height,
            data,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [T; 3],
    ) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Ok(Image {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [T; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, px: [T; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&px);
    }

    pub fn as_raw(&self) -> &[T] {
        &self.data
    }

    pub fn as_raw_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_raw(self) -> Vec<T> {
        self.data
    }

    /// Sample-type conversion through `f64`.
    pub fn convert<U: Sample>(&self) -> Image<U> {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| U::from_f64(v.to_f64())).collect(),
        }
    }

    pub(crate) fn same_dims<U>(&self, other: &Image<U>) -> bool {
        self.width == other.width && self.height == other.height
    }
}

impl<T: Debug> Debug for Image<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

pub(crate) fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Dimension(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    Ok(())
}

/// Real-valued RGB triple. Not clamped: mean-matching color shifts may leave
/// `[0, 255]` until the final quantization.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Color3 {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Color3 {
    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Color3 { r, g, b }
    }

    pub fn from_array(c: [f64; 3]) -> Self {
        Color3::new(c[0], c[1], c[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    pub fn to_pixel<T: Sample>(self) -> [T; 3] {
        [T::from_f64(self.r), T::from_f64(self.g), T::from_f64(self.b)]
    }

    pub fn is_finite(self) -> bool {
        self.r.is_finite() && self.g.is_finite() && self.b.is_finite()
    }
}

impl Add for Color3 {
    type Output = Color3;

    fn add(self, rhs: Color3) -> Color3 {
        Color3::new(self.r + rhs.r, self.g + rhs.g, self.b + rhs.b)
    }
}

impl Sub for Color3 {
    type Output = Color3;

    fn sub(self, rhs: Color3) -> Color3 {
        Color3::new(self.r - rhs.r, self.g - rhs.g, self.b - rhs.b)
    }
}
