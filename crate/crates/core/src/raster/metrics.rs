use super::{Color3, Image, Sample};
use crate::error::{Error, Result};

/// Per-channel arithmetic mean over every pixel.
pub fn mean_color<T: Sample>(img: &Image<T>) -> Color3 {
    let mut sum = [0.0f64; 3];
    for px in img.as_raw().chunks_exact(3) {
        for c in 0..3 {
            sum[c] += px[c].to_f64();
        }
    }
    let n = img.pixel_count() as f64;
    Color3::new(sum[0] / n, sum[1] / n, sum[2] / n)
}

/// Per-channel mean over exactly the listed `(x, y)` pixels.
pub fn masked_mean_color<T: Sample>(img: &Image<T>, mask: &[(usize, usize)]) -> Result<Color3> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let mut sum = [0.0f64; 3];
    for &(x, y) in mask {
        if x >= img.width() || y >= img.height() {
            return Err(Error::Dimension(format!(
                "mask pixel ({x}, {y}) outside {}x{} image",
                img.width(),
                img.height()
            )));
        }
        let px = img.pixel(x, y);
        for c in 0..3 {
            sum[c] += px[c].to_f64();
        }
    }
    let n = mask.len() as f64;
    Ok(Color3::new(sum[0] / n, sum[1] / n, sum[2] / n))
}

/// Mean squared error over all pixels and channels, on the samples' own
/// (0-255) scale: `Σ (a - b)² / (W·H·3)`.
pub fn mse<T: Sample, U: Sample>(a: &Image<T>, b: &Image<U>) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::Dimension(format!(
            "cannot compare {}x{} with {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let sum: f64 = a
        .as_raw()
        .iter()
        .zip(b.as_raw())
        .map(|(&x, &y)| {
            let d = x.to_f64() - y.to_f64();
            d * d
        })
        .sum();
    Ok(sum / a.as_raw().len() as f64)
}
