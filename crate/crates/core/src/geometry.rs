//! Region moments, equivalent ellipses and their bounding boxes.
//!
//! Coordinates follow the raster: x to the right, y downward. Angles are
//! measured from +x toward +y.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::raster::{Color3, Image, RgbImage, Sample};
use crate::slic::LabelMap;

/// Smallest semi-axis, so every region covers at least its center pixel.
pub const MIN_SEMI_AXIS: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionStats {
    pub label: u32,
    pub area: usize,
    pub cx: f64,
    pub cy: f64,
    /// Second central moments divided by the area (pixel² units).
    pub mu20: f64,
    pub mu02: f64,
    pub mu11: f64,
    pub mean_color: Color3,
}

#[derive(Default, Clone, Copy)]
struct Accum {
    n: i128,
    sx: i128,
    sy: i128,
    sxx: i128,
    syy: i128,
    sxy: i128,
    color: [f64; 3],
}

/// Per-label area, centroid, normalized central moments and mean color.
///
/// Coordinate sums are accumulated as exact integers and the variances are
/// formed as `(n·Σx² − (Σx)²) / n²`, so the only rounding is the final
/// division.
pub fn region_stats<T: Sample>(labels: &LabelMap, img: &Image<T>) -> Result<Vec<RegionStats>> {
    if labels.width() != img.width() || labels.height() != img.height() {
        return Err(Error::Dimension(format!(
            "label map {}x{} vs image {}x{}",
            labels.width(),
            labels.height(),
            img.width(),
            img.height()
        )));
    }
    let w = labels.width();
    let mut acc = vec![Accum::default(); labels.region_count()];
    for (i, (&label, px)) in labels
        .labels()
        .iter()
        .zip(img.as_raw().chunks_exact(3))
        .enumerate()
    {
        let (x, y) = ((i % w) as i128, (i / w) as i128);
        let a = &mut acc[label as usize];
        a.n += 1;
        a.sx += x;
        a.sy += y;
        a.sxx += x * x;
        a.syy += y * y;
        a.sxy += x * y;
        for (sum, v) in a.color.iter_mut().zip(px) {
            *sum += v.to_f64();
        }
    }

    Ok(acc
        .iter()
        .enumerate()
        .map(|(label, a)| {
            let n = a.n as f64;
            let n2 = (a.n * a.n) as f64;
            RegionStats {
                label: label as u32,
                area: a.n as usize,
                cx: a.sx as f64 / n,
                cy: a.sy as f64 / n,
                mu20: (a.n * a.sxx - a.sx * a.sx) as f64 / n2,
                mu02: (a.n * a.syy - a.sy * a.sy) as f64 / n2,
                mu11: (a.n * a.sxy - a.sx * a.sy) as f64 / n2,
                mean_color: Color3::new(a.color[0] / n, a.color[1] / n, a.color[2] / n),
            }
        })
        .collect())
}

/// Eigenvalues `(λ1, λ2)`, `λ1 ≥ λ2 ≥ 0`, of `[[mu20, mu11], [mu11, mu02]]`.
pub fn covariance_eigenvalues(mu20: f64, mu02: f64, mu11: f64) -> (f64, f64) {
    let mean = 0.5 * (mu20 + mu02);
    let half_diff = 0.5 * (mu20 - mu02);
    let radius = half_diff.hypot(mu11);
    (mean + radius, (mean - radius).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    /// Semi-major axis.
    pub a: f64,
    /// Semi-minor axis.
    pub b: f64,
    /// Major-axis orientation in `(−π/2, π/2]`.
    pub theta: f64,
}

/// Equivalent ellipse: semi-axes `2√λ` of the moment matrix (clamped to
/// [`MIN_SEMI_AXIS`]), orientation `½·atan2(2·mu11, mu20 − mu02)`.
pub fn fit_ellipse(stats: &RegionStats) -> Ellipse {
    let (l1, l2) = covariance_eigenvalues(stats.mu20, stats.mu02, stats.mu11);
    let theta = if stats.mu11 == 0.0 && stats.mu20 == stats.mu02 {
        0.0
    } else {
        normalize_angle(0.5 * (2.0 * stats.mu11).atan2(stats.mu20 - stats.mu02))
    };
    Ellipse {
        cx: stats.cx,
        cy: stats.cy,
        a: (2.0 * l1.sqrt()).max(MIN_SEMI_AXIS),
        b: (2.0 * l2.sqrt()).max(MIN_SEMI_AXIS),
        theta,
    }
}

/// Maps an axis direction into `(−π/2, π/2]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % PI;
    if t <= -FRAC_PI_2 {
        t += PI;
    } else if t > FRAC_PI_2 {
        t -= PI;
    }
    t
}

/// Inclusive integer pixel box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    /// The full extent of a `width × height` raster.
    pub fn of_image(width: usize, height: usize) -> Self {
        Rect::new(0, 0, width as i64 - 1, height as i64 - 1)
    }

    pub fn width(&self) -> usize {
        (self.x1 - self.x0 + 1).max(0) as usize
    }

    pub fn height(&self) -> usize {
        (self.y1 - self.y0 + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.x1 < self.x0 || self.y1 < self.y0
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        (self.x0..=self.x1).contains(&x) && (self.y0..=self.y1).contains(&y)
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        Rect::new(
            self.x0.max(other.x0),
            self.y0.max(other.y0),
            self.x1.min(other.x1),
            self.y1.min(other.y1),
        )
    }
}

// Absorbs rounding in the half-extents so exact integer edges are not
// pushed outward by one pixel.
const SNAP: f64 = 1e-9;

impl Ellipse {
    pub fn half_extents(&self) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let (a2, b2) = (self.a * self.a, self.b * self.b);
        ((a2 * c * c + b2 * s * s).sqrt(), (a2 * s * s + b2 * c * c).sqrt())
    }

    /// Tight axis-aligned box of the rotated ellipse, intersected with
    /// `bounds`. An empty intersection collapses to the center pixel clamped
    /// into `bounds`.
    pub fn bbox(&self, bounds: &Rect) -> Rect {
        let (hw, hh) = self.half_extents();
        let raw = Rect::new(
            (self.cx - hw + SNAP).floor() as i64,
            (self.cy - hh + SNAP).floor() as i64,
            (self.cx + hw - SNAP).ceil() as i64,
            (self.cy + hh - SNAP).ceil() as i64,
        );
        let clipped = raw.intersect(bounds);
        if clipped.is_empty() {
            let (x, y) = self.clamped_center(bounds);
            Rect::new(x, y, x, y)
        } else {
            clipped
        }
    }

    pub fn clamped_center(&self, bounds: &Rect) -> (i64, i64) {
        (
            (self.cx.round() as i64).clamp(bounds.x0, bounds.x1),
            (self.cy.round() as i64).clamp(bounds.y0, bounds.y1),
        )
    }

    /// Whether integer pixel `(x, y)` lies inside or on the ellipse.
    pub fn contains(&self, x: i64, y: i64) -> bool {
        let (s, c) = self.theta.sin_cos();
        let dx = x as f64 - self.cx;
        let dy = y as f64 - self.cy;
        let u = (dx * c + dy * s) / self.a;
        let v = (-dx * s + dy * c) / self.b;
        u * u + v * v <= 1.0
    }

    /// Pixels of a `width × height` raster inside the ellipse, in raster
    /// order. Never empty: an ellipse that catches no pixel center yields its
    /// clamped center pixel.
    pub fn raster_mask(&self, width: usize, height: usize) -> Vec<(usize, usize)> {
        let bounds = Rect::of_image(width, height);
        let bb = self.bbox(&bounds);
        let mut mask = Vec::with_capacity(bb.width() * bb.height());
        for y in bb.y0..=bb.y1 {
            for x in bb.x0..=bb.x1 {
                if self.contains(x, y) {
                    mask.push((x as usize, y as usize));
                }
            }
        }
        if mask.is_empty() {
            let (x, y) = self.clamped_center(&bounds);
            mask.push((x as usize, y as usize));
        }
        mask
    }
}

pub fn ellipse_bbox(e: &Ellipse, bounds: &Rect) -> Rect {
    e.bbox(bounds)
}

pub fn point_in_ellipse(e: &Ellipse, x: i64, y: i64) -> bool {
    e.contains(x, y)
}

/// Draws the one-pixel outline of each ellipse over a copy of `img`: every
/// interior pixel with a 4-neighbor outside the ellipse.
pub fn draw_ellipse_outlines(img: &RgbImage, ellipses: &[Ellipse], color: [u8; 3]) -> RgbImage {
    let mut out = img.clone();
    for e in ellipses {
        for (x, y) in e.raster_mask(img.width(), img.height()) {
            let (xi, yi) = (x as i64, y as i64);
            let edge = !e.contains(xi - 1, yi)
                || !e.contains(xi + 1, yi)
                || !e.contains(xi, yi - 1)
                || !e.contains(xi, yi + 1);
            if edge {
                out.set_pixel(x, y, color);
            }
        }
    }
    out
}
