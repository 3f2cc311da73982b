use rayon::prelude::*;

use super::RgbImage;

// sRGB (D65) -> XYZ.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412453, 0.357580, 0.180423],
    [0.212671, 0.715160, 0.072169],
    [0.019334, 0.119193, 0.950227],
];
const D65_WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];
const LAB_EPSILON: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

/// CIELAB raster with the same geometry as its source image.
#[derive(Clone, Debug, PartialEq)]
pub struct LabImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl LabImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[[f64; 3]] {
        &self.data
    }
}

fn srgb_to_linear(c: u8) -> f64 {
    let v = c as f64 / 255.0;
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    if t > LAB_EPSILON {
        t.cbrt()
    } else {
        (LAB_KAPPA * t + 16.0) / 116.0
    }
}

/// Converts one 8-bit sRGB pixel to (L, a, b) under D65.
pub fn srgb_to_lab(px: [u8; 3]) -> [f64; 3] {
    let lin = px.map(srgb_to_linear);
    let mut f = [0.0; 3];
    for (i, row) in RGB_TO_XYZ.iter().enumerate() {
        let xyz = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
        f[i] = lab_f(xyz / D65_WHITE[i]);
    }
    let l = (116.0 * f[1] - 16.0).clamp(0.0, 100.0);
    [l, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])]
}

pub fn rgb_to_lab(img: &RgbImage) -> LabImage {
    let data = img
        .as_raw()
        .par_chunks_exact(3)
        .map(|px| srgb_to_lab([px[0], px[1], px[2]]))
        .collect();
    LabImage {
        width: img.width(),
        height: img.height(),
        data,
    }
}
