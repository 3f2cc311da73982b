//! SLIC superpixels: grid-seeded k-means over (L, a, b, x, y) with every
//! center restricted to a `2S × 2S` search window.

mod connectivity;
mod labels;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::LabImage;

pub use connectivity::enforce_connectivity;
pub use labels::LabelMap;

#[derive(Clone, Debug, PartialEq)]
pub struct SlicParams {
    /// Requested number of regions (`k`). The achieved count differs.
    pub target_regions: usize,
    /// Weight of spatial distance against color distance (`m`).
    pub compactness: f64,
    pub iterations: usize,
    /// Components smaller than `min_region_fraction · S²` pixels are merged
    /// into a neighbor.
    pub min_region_fraction: f64,
}

impl SlicParams {
    pub const DEFAULT_COMPACTNESS: f64 = 10.0;
    pub const DEFAULT_ITERATIONS: usize = 10;
    pub const DEFAULT_MIN_REGION_FRACTION: f64 = 0.25;

    pub fn new(target_regions: usize) -> Self {
        SlicParams {
            target_regions,
            compactness: Self::DEFAULT_COMPACTNESS,
            iterations: Self::DEFAULT_ITERATIONS,
            min_region_fraction: Self::DEFAULT_MIN_REGION_FRACTION,
        }
    }

    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        check_k(self.target_regions, width * height)?;
        if !(self.compactness.is_finite() && self.compactness > 0.0) {
            return Err(Error::Param(format!(
                "compactness must be positive, got {}",
                self.compactness
            )));
        }
        if self.iterations == 0 {
            return Err(Error::Param("iterations must be at least 1".into()));
        }
        if !(self.min_region_fraction > 0.0 && self.min_region_fraction < 1.0) {
            return Err(Error::Param(format!(
                "min_region_fraction must lie in (0, 1), got {}",
                self.min_region_fraction
            )));
        }
        Ok(())
    }

    /// Minimum component size kept by the connectivity pass.
    pub fn min_size(&self, width: usize, height: usize) -> usize {
        let s = grid_spacing(width, height, self.target_regions);
        ((self.min_region_fraction * s * s).round() as usize).max(1)
    }
}

fn check_k(k: usize, pixels: usize) -> Result<()> {
    if k == 0 || k > pixels {
        return Err(Error::Param(format!(
            "k must lie in [1, {pixels}], got {k}"
        )));
    }
    Ok(())
}

/// Seed spacing `S = √(W·H / k)`.
pub fn grid_spacing(width: usize, height: usize, k: usize) -> f64 {
    ((width * height) as f64 / k as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusterCenter {
    pub l: f64,
    pub a: f64,
    pub b: f64,
    pub x: f64,
    pub y: f64,
}

/// Grid cells per axis. The shorter axis gets `round(√(k·len/other))`
/// cells and the longer axis `round(k / that)`, which keeps the product
/// within `√k / 2` of `k`.
pub fn grid_shape(width: usize, height: usize, k: usize) -> (usize, usize) {
    let kf = k as f64;
    let short = |len: usize, other: usize| -> usize {
        ((kf * len as f64 / other as f64).sqrt().round() as usize).clamp(1, len)
    };
    if width >= height {
        let ny = short(height, width);
        let nx = ((kf / ny as f64).round() as usize).clamp(1, width);
        (nx, ny)
    } else {
        let nx = short(width, height);
        let ny = ((kf / nx as f64).round() as usize).clamp(1, height);
        (nx, ny)
    }
}

/// Places centers at the middle of each grid cell, then moves each one to
/// the lowest-gradient pixel of its 3×3 neighborhood. The grid position wins
/// ties, then raster order.
pub fn init_seeds(lab: &LabImage, k: usize) -> Result<Vec<ClusterCenter>> {
    let (w, h) = (lab.width(), lab.height());
    check_k(k, w * h)?;
    let (nx, ny) = grid_shape(w, h, k);
    let cell_w = w as f64 / nx as f64;
    let cell_h = h as f64 / ny as f64;

    let mut seeds = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let gx = (((i as f64 + 0.5) * cell_w) as usize).min(w - 1);
            let gy = (((j as f64 + 0.5) * cell_h) as usize).min(h - 1);
            let (mut bx, mut by) = (gx, gy);
            let mut best = gradient(lab, gx, gy);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let x = gx as i64 + dx;
                    let y = gy as i64 + dy;
                    if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
                        continue;
                    }
                    let g = gradient(lab, x as usize, y as usize);
                    if g < best {
                        best = g;
                        (bx, by) = (x as usize, y as usize);
                    }
                }
            }
            let [l, a, b] = lab.get(bx, by);
            seeds.push(ClusterCenter {
                l,
                a,
                b,
                x: bx as f64,
                y: by as f64,
            });
        }
    }
    Ok(seeds)
}

/// Squared Lab difference of the horizontal plus the vertical neighbor
/// pair, with edge clamping.
fn gradient(lab: &LabImage, x: usize, y: usize) -> f64 {
    let (w, h) = (lab.width(), lab.height());
    let dist2 = |p: [f64; 3], q: [f64; 3]| {
        (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)
    };
    let horizontal = dist2(lab.get((x + 1).min(w - 1), y), lab.get(x.saturating_sub(1), y));
    let vertical = dist2(lab.get(x, (y + 1).min(h - 1)), lab.get(x, y.saturating_sub(1)));
    horizontal + vertical
}

/// Full segmentation: seeding, `iterations` rounds of windowed assignment
/// and center update, then connectivity enforcement.
pub fn run_slic(lab: &LabImage, params: &SlicParams) -> Result<LabelMap> {
    let (w, h) = (lab.width(), lab.height());
    params.validate(w, h)?;
    let spacing = grid_spacing(w, h, params.target_regions);
    let mut centers = init_seeds(lab, params.target_regions)?;
    let mut labels = vec![u32::MAX; w * h];
    let mut dist = vec![f64::INFINITY; w * h];

    for _ in 0..params.iterations {
        assign(lab, &centers, spacing, params.compactness, &mut labels, &mut dist);
        update_centers(lab, &labels, &mut centers);
    }
    Ok(connectivity::enforce_raw(
        w,
        h,
        &labels,
        params.min_size(w, h),
    ))
}

/// Assignment step. Rows are independent, so the result does not depend on
/// how rayon splits them.
pub(crate) fn assign(
    lab: &LabImage,
    centers: &[ClusterCenter],
    spacing: f64,
    compactness: f64,
    labels: &mut [u32],
    dist: &mut [f64],
) {
    let w = lab.width();
    let spatial_weight = (compactness / spacing).powi(2);
    labels
        .par_chunks_mut(w)
        .zip(dist.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (label_row, dist_row))| {
            label_row.fill(u32::MAX);
            dist_row.fill(f64::INFINITY);
            let yf = y as f64;
            for (idx, c) in centers.iter().enumerate() {
                if (c.y - yf).abs() > spacing {
                    continue;
                }
                let x0 = (c.x - spacing).ceil().max(0.0) as usize;
                let x1 = ((c.x + spacing).floor() as usize).min(w - 1);
                for x in x0..=x1 {
                    let [l, a, b] = lab.get(x, y);
                    let dc = (l - c.l).powi(2) + (a - c.a).powi(2) + (b - c.b).powi(2);
                    let ds = (x as f64 - c.x).powi(2) + (yf - c.y).powi(2);
                    let d = dc + ds * spatial_weight;
                    // Strict comparison: lower center index wins ties.
                    if d < dist_row[x] {
                        dist_row[x] = d;
                        label_row[x] = idx as u32;
                    }
                }
            }
            // Pixels outside every window go to the spatially nearest center.
            for (x, label) in label_row.iter_mut().enumerate() {
                if *label == u32::MAX {
                    *label = nearest_center(centers, x as f64, yf);
                }
            }
        });
}

fn nearest_center(centers: &[ClusterCenter], x: f64, y: f64) -> u32 {
    let mut best = (f64::INFINITY, 0u32);
    for (idx, c) in centers.iter().enumerate() {
        let d = (c.x - x).powi(2) + (c.y - y).powi(2);
        if d < best.0 {
            best = (d, idx as u32);
        }
    }
    best.1
}

/// Moves every center to the mean of its members in all five dimensions.
/// Serial raster-order accumulation keeps the sums reproducible; centers
/// with no members stay put.
fn update_centers(lab: &LabImage, labels: &[u32], centers: &mut [ClusterCenter]) {
    let w = lab.width();
    let mut acc = vec![[0.0f64; 5]; centers.len()];
    let mut counts = vec![0usize; centers.len()];
    for (i, (&label, px)) in labels.iter().zip(lab.as_slice()).enumerate() {
        let s = &mut acc[label as usize];
        s[0] += px[0];
        s[1] += px[1];
        s[2] += px[2];
        s[3] += (i % w) as f64;
        s[4] += (i / w) as f64;
        counts[label as usize] += 1;
    }
    for ((c, s), &n) in centers.iter_mut().zip(&acc).zip(&counts) {
        if n == 0 {
            continue;
        }
        let n = n as f64;
        *c = ClusterCenter {
            l: s[0] / n,
            a: s[1] / n,
            b: s[2] / n,
            x: s[3] / n,
            y: s[4] / n,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{rgb_to_lab, RgbImage};

    fn constant_lab(w: usize, h: usize) -> LabImage {
        rgb_to_lab(&RgbImage::filled(w, h, [90, 120, 30]).unwrap())
    }

    #[test]
    fn single_seed_sits_in_the_middle() {
        let seeds = init_seeds(&constant_lab(100, 100), 1).unwrap();
        assert_eq!(seeds.len(), 1);
        assert_eq!((seeds[0].x, seeds[0].y), (50.0, 50.0));
    }

    #[test]
    fn four_seeds_on_constant_image_stay_on_grid() {
        assert_eq!(grid_spacing(100, 100, 4), 50.0);
        let seeds = init_seeds(&constant_lab(100, 100), 4).unwrap();
        let pos: Vec<_> = seeds.iter().map(|s| (s.x, s.y)).collect();
        assert_eq!(pos, vec![(25.0, 25.0), (75.0, 25.0), (25.0, 75.0), (75.0, 75.0)]);
    }

    #[test]
    fn seed_moves_off_an_edge() {
        // A vertical edge through the grid position pushes the seed sideways.
        let img = RgbImage::from_fn(100, 100, |x, _| if x < 50 { [0, 0, 0] } else { [255; 3] })
            .unwrap();
        let seeds = init_seeds(&rgb_to_lab(&img), 1).unwrap();
        assert_eq!((seeds[0].x, seeds[0].y), (51.0, 49.0));
    }

    #[test]
    fn seed_count_tracks_k() {
        for &(w, h) in &[(451usize, 300usize), (600, 400), (100, 100), (37, 91)] {
            for k in [1usize, 2, 7, 50, 200, 532, 1500] {
                if k > w * h {
                    continue;
                }
                let (nx, ny) = grid_shape(w, h, k);
                let n = (nx * ny) as f64;
                let slack = 2.0 * (k as f64).sqrt();
                assert!((n - k as f64).abs() <= slack, "{w}x{h} k={k}: {nx}x{ny}");
            }
        }
    }

    #[test]
    fn k_out_of_range() {
        let lab = constant_lab(4, 4);
        assert!(matches!(init_seeds(&lab, 0), Err(Error::Param(_))));
        assert!(matches!(init_seeds(&lab, 17), Err(Error::Param(_))));
        assert!(init_seeds(&lab, 16).is_ok());
    }

    #[test]
    fn invalid_params() {
        let lab = constant_lab(8, 8);
        let mut p = SlicParams::new(4);
        p.compactness = 0.0;
        assert!(matches!(run_slic(&lab, &p), Err(Error::Param(_))));
        let mut p = SlicParams::new(4);
        p.iterations = 0;
        assert!(matches!(run_slic(&lab, &p), Err(Error::Param(_))));
        let mut p = SlicParams::new(4);
        p.min_region_fraction = 1.0;
        assert!(matches!(run_slic(&lab, &p), Err(Error::Param(_))));
    }

    #[test]
    fn k_one_covers_everything() {
        let img = RgbImage::from_fn(30, 20, |x, y| [(x * 8) as u8, (y * 12) as u8, 0]).unwrap();
        let map = run_slic(&rgb_to_lab(&img), &SlicParams::new(1)).unwrap();
        assert_eq!(map.region_count(), 1);
        assert!(map.labels().iter().all(|&l| l == 0));
    }

    #[test]
    fn constant_image_splits_into_quadrants() {
        let map = run_slic(&constant_lab(100, 100), &SlicParams::new(4)).unwrap();
        assert_eq!(map.region_count(), 4);
        // Color distance vanishes, so each pixel goes to the nearest seed of
        // the 2×2 grid; the equidistant row/column 50 ties to the lower index.
        for y in 0..100 {
            for x in 0..100 {
                let expect = (y > 50) as u32 * 2 + (x > 50) as u32;
                assert_eq!(map.get(x, y), expect, "({x},{y})");
            }
        }
    }

    #[test]
    fn assignment_respects_window() {
        let img = RgbImage::from_fn(60, 40, |x, y| [(x * 4) as u8, (y * 6) as u8, ((x * y) % 256) as u8])
            .unwrap();
        let lab = rgb_to_lab(&img);
        let k = 24;
        let s = grid_spacing(60, 40, k);
        let centers = init_seeds(&lab, k).unwrap();
        let mut labels = vec![0u32; 60 * 40];
        let mut dist = vec![0.0; 60 * 40];
        assign(&lab, &centers, s, 10.0, &mut labels, &mut dist);
        for (i, &l) in labels.iter().enumerate() {
            let c = centers[l as usize];
            let dx = ((i % 60) as f64 - c.x).abs();
            let dy = ((i / 60) as f64 - c.y).abs();
            assert!(dx.max(dy) <= 2.0 * s);
        }
    }
}
