use rayon::prelude::*;

use super::{check_dims, Color3, Image, Sample};
use crate::error::Result;

/// Horizontal or vertical interpolation tap: blend `lo` and `hi` by `frac`.
#[derive(Clone, Copy)]
struct Tap {
    lo: usize,
    hi: usize,
    frac: f64,
}

impl Tap {
    /// Edge-clamped tap for continuous source coordinate `s`.
    fn at(s: f64, len: usize) -> Tap {
        let max = (len - 1) as f64;
        let s = s.clamp(0.0, max);
        let lo = s.floor();
        let lo_i = lo as usize;
        Tap {
            lo: lo_i,
            hi: (lo_i + 1).min(len - 1),
            frac: s - lo,
        }
    }
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    // a + (b - a)·t reproduces constants exactly.
    a + (b - a) * t
}

#[inline]
fn bilinear<T: Sample>(img: &Image<T>, tx: Tap, ty: Tap) -> [f64; 3] {
    let w = img.width();
    let raw = img.as_raw();
    let i00 = (ty.lo * w + tx.lo) * 3;
    let i10 = (ty.lo * w + tx.hi) * 3;
    let i01 = (ty.hi * w + tx.lo) * 3;
    let i11 = (ty.hi * w + tx.hi) * 3;
    let mut out = [0.0; 3];
    for c in 0..3 {
        let top = lerp(raw[i00 + c].to_f64(), raw[i10 + c].to_f64(), tx.frac);
        let bottom = lerp(raw[i01 + c].to_f64(), raw[i11 + c].to_f64(), tx.frac);
        out[c] = lerp(top, bottom, ty.frac);
    }
    out
}

/// Bilinear resize with center-aligned sampling: destination pixel `d` reads
/// source coordinate `(d + 0.5)·(in/out) − 0.5`, clamped to the edge.
pub fn resize_bilinear<T: Sample>(img: &Image<T>, out_w: usize, out_h: usize) -> Result<Image<T>> {
    check_dims(out_w, out_h)?;
    let sx = img.width() as f64 / out_w as f64;
    let sy = img.height() as f64 / out_h as f64;
    let xtaps: Vec<Tap> = (0..out_w)
        .map(|d| Tap::at((d as f64 + 0.5) * sx - 0.5, img.width()))
        .collect();

    let mut data = vec![T::default(); out_w * out_h * 3];
    data.par_chunks_mut(out_w * 3)
        .enumerate()
        .for_each(|(y, row)| {
            let ty = Tap::at((y as f64 + 0.5) * sy - 0.5, img.height());
            for (x, tx) in xtaps.iter().enumerate() {
                let v = bilinear(img, *tx, ty);
                for c in 0..3 {
                    row[x * 3 + c] = T::from_f64(v[c]);
                }
            }
        });
    Image::from_raw(out_w, out_h, data)
}

/// Rotates `img` by `angle` radians about the output center (y axis points
/// down, positive angles turn +x toward +y) into an `out_w × out_h` canvas.
///
/// Each output pixel is inverse-mapped into the source and sampled
/// bilinearly; pixels that land more than half a pixel outside the source
/// take `fill`.
pub fn rotate_image<T: Sample>(
    img: &Image<T>,
    angle: f64,
    out_w: usize,
    out_h: usize,
    fill: Color3,
) -> Result<Image<T>> {
    check_dims(out_w, out_h)?;
    let (sin, cos) = angle.sin_cos();
    let (in_w, in_h) = (img.width() as f64, img.height() as f64);
    let icx = (in_w - 1.0) / 2.0;
    let icy = (in_h - 1.0) / 2.0;
    let ocx = (out_w as f64 - 1.0) / 2.0;
    let ocy = (out_h as f64 - 1.0) / 2.0;
    let fill = fill.to_pixel::<T>();

    let mut data = vec![T::default(); out_w * out_h * 3];
    data.par_chunks_mut(out_w * 3)
        .enumerate()
        .for_each(|(y, row)| {
            let dy = y as f64 - ocy;
            for x in 0..out_w {
                let dx = x as f64 - ocx;
                let sx = cos * dx + sin * dy + icx;
                let sy = -sin * dx + cos * dy + icy;
                let px = if sx < -0.5 || sy < -0.5 || sx > in_w - 0.5 || sy > in_h - 0.5 {
                    fill
                } else {
                    let v = bilinear(img, Tap::at(sx, img.width()), Tap::at(sy, img.height()));
                    v.map(T::from_f64)
                };
                row[x * 3..x * 3 + 3].copy_from_slice(&px);
            }
        });
    Image::from_raw(out_w, out_h, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::raster::{FloatImage, RgbImage};

    #[test]
    fn constant_image_resizes_to_constant() {
        let img = RgbImage::filled(10, 10, [12, 200, 77]).unwrap();
        for (w, h) in [(1, 1), (3, 17), (25, 4), (10, 10)] {
            let out = resize_bilinear(&img, w, h).unwrap();
            assert!(out.as_raw().chunks(3).all(|p| p == [12, 200, 77]));
        }
        let f: FloatImage = img.convert();
        let out = resize_bilinear(&f, 7, 13).unwrap();
        assert!(out.as_raw().chunks(3).all(|p| p == [12.0, 200.0, 77.0]));
    }

    #[test]
    fn same_size_resize_is_identity() {
        let img = RgbImage::from_fn(9, 5, |x, y| [(x * 29) as u8, (y * 51) as u8, (x ^ y) as u8])
            .unwrap();
        assert_eq!(resize_bilinear(&img, 9, 5).unwrap(), img);
    }

    #[test]
    fn upsample_two_pixels_to_four() {
        // Hand evaluation of s = (d + 0.5)·0.5 − 0.5 clamped to [0, 1]:
        // d=0 → 0 → 0; d=1 → 0.25 → 63.75; d=2 → 0.75 → 191.25; d=3 → 1 → 255.
        let img = FloatImage::from_raw(2, 1, vec![0.0, 0.0, 0.0, 255.0, 255.0, 255.0]).unwrap();
        let out = resize_bilinear(&img, 4, 1).unwrap();
        let reds: Vec<f64> = out.as_raw().chunks(3).map(|p| p[0]).collect();
        assert_eq!(reds, vec![0.0, 63.75, 191.25, 255.0]);

        let img8: RgbImage = img.convert();
        let out8 = resize_bilinear(&img8, 4, 1).unwrap();
        let reds8: Vec<u8> = out8.as_raw().chunks(3).map(|p| p[0]).collect();
        assert_eq!(reds8, vec![0, 64, 191, 255]);
    }

    #[test]
    fn zero_target_is_rejected() {
        let img = RgbImage::new(2, 2).unwrap();
        assert!(matches!(resize_bilinear(&img, 0, 2), Err(Error::Dimension(_))));
        assert!(matches!(
            rotate_image(&img, 0.3, 2, 0, Color3::default()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn zero_angle_is_identity() {
        let img = RgbImage::from_fn(7, 4, |x, y| [(x * 30) as u8, (y * 60) as u8, 9]).unwrap();
        assert_eq!(rotate_image(&img, 0.0, 7, 4, Color3::default()).unwrap(), img);
    }

    #[test]
    fn half_turn_of_symmetric_image() {
        // Point-symmetric pattern: p(x, y) = p(w-1-x, h-1-y).
        let (w, h) = (8usize, 6usize);
        let img = RgbImage::from_fn(w, h, |x, y| {
            let d = (x as i64 - (w - 1 - x) as i64).abs() + (y as i64 - (h - 1 - y) as i64).abs();
            [(d * 20) as u8, (d * 7) as u8, 100]
        })
        .unwrap();
        let out = rotate_image(&img, std::f64::consts::PI, w, h, Color3::default()).unwrap();
        for (a, b) in out.as_raw().iter().zip(img.as_raw()) {
            assert!((*a as i32 - *b as i32).abs() <= 1);
        }
    }

    #[test]
    fn quarter_turn_permutes_indices() {
        let img = RgbImage::from_fn(3, 3, |x, y| [(10 * (3 * y + x)) as u8, x as u8, y as u8])
            .unwrap();
        let out = rotate_image(&img, std::f64::consts::FRAC_PI_2, 3, 3, Color3::default())
            .unwrap();
        // Turning +x toward +y (clockwise on screen) by 90°: output (x, y)
        // reads source (y, 2 - x).
        for y in 0..3 {
            for x in 0..3 {
                let expect = img.pixel(y, 2 - x);
                let got = out.pixel(x, y);
                for c in 0..3 {
                    assert!((expect[c] as i32 - got[c] as i32).abs() <= 1, "({x},{y})");
                }
            }
        }
    }

    #[test]
    fn uncovered_pixels_take_fill() {
        let img = RgbImage::filled(2, 2, [0, 0, 0]).unwrap();
        let out = rotate_image(&img, 0.0, 6, 6, Color3::new(9.0, 8.0, 7.0)).unwrap();
        assert_eq!(out.pixel(0, 0), [9, 8, 7]);
        assert_eq!(out.pixel(2, 2), [0, 0, 0]);
    }
}
