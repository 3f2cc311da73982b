//! Compositing: one resized, color-shifted copy of the whole image per
//! fitted ellipse.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{fit_ellipse, region_stats, Ellipse, Rect, RegionStats};
use crate::raster::{
    masked_mean_color, mean_color, mse, resize_bilinear, rgb_to_lab, rotate_image, save_image,
    Color3, FloatImage, Image, RgbImage, Sample,
};
use crate::slic::{run_slic, LabelMap, SlicParams};

/// What sits under (and between) the painted ellipses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Background {
    /// Each pixel takes the mean color of its segment.
    #[default]
    SegmentMean,
    Original,
    Black,
}

impl FromStr for Background {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "segment-mean" => Ok(Background::SegmentMean),
            "original" => Ok(Background::Original),
            "black" => Ok(Background::Black),
            other => Err(Error::Param(format!(
                "unknown background {other:?} (expected segment-mean, original or black)"
            ))),
        }
    }
}

impl fmt::Display for Background {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Background::SegmentMean => "segment-mean",
            Background::Original => "original",
            Background::Black => "black",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameExport {
    pub dir: PathBuf,
    /// Write a frame after every `stride` painted regions.
    pub stride: usize,
}

/// Regions are always painted in ascending label order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderConfig {
    /// Rotate each tile to the ellipse orientation before masking.
    pub rotated_tiles: bool,
    /// Clamp shifted tiles to `[0, 255]`.
    pub clip_output: bool,
    pub background: Background,
    pub frames: Option<FrameExport>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            rotated_tiles: false,
            clip_output: true,
            background: Background::SegmentMean,
            frames: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub segmentation_ms: f64,
    pub geometry_ms: f64,
    pub render_ms: f64,
    pub metric_ms: f64,
}

impl StageTimings {
    pub fn total_ms(&self) -> f64 {
        self.segmentation_ms + self.geometry_ms + self.render_ms + self.metric_ms
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelfceptionReport {
    pub requested_k: usize,
    pub achieved_regions: usize,
    pub mse: f64,
    pub timings: StageTimings,
    pub slic: SlicParams,
    pub config: RenderConfig,
}

/// Initial canvas. Segment means are left unquantized; rounding happens
/// with the rest of the canvas.
pub fn base_layer<T: Sample>(
    img: &Image<T>,
    labels: &LabelMap,
    stats: &[RegionStats],
    mode: Background,
) -> Result<FloatImage> {
    if labels.width() != img.width() || labels.height() != img.height() {
        return Err(Error::Dimension(format!(
            "label map {}x{} vs image {}x{}",
            labels.width(),
            labels.height(),
            img.width(),
            img.height()
        )));
    }
    match mode {
        Background::Original => Ok(img.convert()),
        Background::Black => FloatImage::new(img.width(), img.height()),
        Background::SegmentMean => {
            if stats.len() != labels.region_count() {
                return Err(Error::Dimension(format!(
                    "{} region stats for {} regions",
                    stats.len(),
                    labels.region_count()
                )));
            }
            let data = labels
                .labels()
                .iter()
                .flat_map(|&l| stats[l as usize].mean_color.to_array())
                .collect();
            FloatImage::from_raw(img.width(), img.height(), data)
        }
    }
}

/// Adds `rang − total_mean` to every sample, optionally clamping to
/// `[0, 255]` afterwards.
pub fn shifted_tile<T: Sample>(
    resized: &Image<T>,
    rang: Color3,
    total_mean: Color3,
    clip: bool,
) -> Image<T> {
    let shift = (rang - total_mean).to_array();
    let mut out = resized.clone();
    for px in out.as_raw_mut().chunks_exact_mut(3) {
        for c in 0..3 {
            let mut v = px[c].to_f64() + shift[c];
            if clip {
                v = v.clamp(0.0, 255.0);
            }
            px[c] = T::from_f64(v);
        }
    }
    out
}

/// A shifted tile ready to be painted through its ellipse mask.
#[derive(Clone, Debug)]
pub struct Tile {
    pub bbox: Rect,
    pub pixels: FloatImage,
    /// Canvas pixels to overwrite, in raster order.
    pub mask: Vec<(usize, usize)>,
}

impl Tile {
    pub fn paint(&self, canvas: &mut FloatImage) {
        let (x0, y0) = (self.bbox.x0 as usize, self.bbox.y0 as usize);
        for &(x, y) in &self.mask {
            canvas.set_pixel(x, y, self.pixels.pixel(x - x0, y - y0));
        }
    }
}

/// Resizes (and with `rotated_tiles`, rotates) `original` into the
/// ellipse's clipped bounding box and applies the mean shift.
pub fn prepare_tile(
    original: &FloatImage,
    e: &Ellipse,
    mask: Vec<(usize, usize)>,
    rang: Color3,
    total_mean: Color3,
    cfg: &RenderConfig,
) -> Result<Tile> {
    let bbox = e.bbox(&Rect::of_image(original.width(), original.height()));
    let (bw, bh) = (bbox.width(), bbox.height());
    let resized = if cfg.rotated_tiles {
        let fw = ((2.0 * e.a).ceil() as usize).max(1);
        let fh = ((2.0 * e.b).ceil() as usize).max(1);
        let frame = resize_bilinear(original, fw, fh)?;
        // After the shift below, uncovered corners land on `rang`.
        rotate_image(&frame, e.theta, bw, bh, total_mean)?
    } else {
        resize_bilinear(original, bw, bh)?
    };
    Ok(Tile {
        bbox,
        pixels: shifted_tile(&resized, rang, total_mean, cfg.clip_output),
        mask,
    })
}

/// Paints one ellipse into `canvas` and returns the pixels written. `rang`
/// is the target mean (normally the original's mean inside the ellipse).
pub fn render_region(
    canvas: &mut FloatImage,
    original: &FloatImage,
    e: &Ellipse,
    rang: Color3,
    total_mean: Color3,
    cfg: &RenderConfig,
) -> Result<Vec<(usize, usize)>> {
    if !canvas.same_dims(original) {
        return Err(Error::Dimension(format!(
            "canvas {}x{} vs original {}x{}",
            canvas.width(),
            canvas.height(),
            original.width(),
            original.height()
        )));
    }
    let mask = e.raster_mask(original.width(), original.height());
    let tile = prepare_tile(original, e, mask, rang, total_mean, cfg)?;
    tile.paint(canvas);
    Ok(tile.mask)
}

/// Intermediate products of one run, for callers that need more than the
/// final image (debug dumps, tests).
#[derive(Clone, Debug)]
pub struct Selfception {
    pub labels: LabelMap,
    pub stats: Vec<RegionStats>,
    pub ellipses: Vec<Ellipse>,
    /// Unquantized composite.
    pub canvas: FloatImage,
    pub output: RgbImage,
    pub report: SelfceptionReport,
}

/// Segment, fit, composite and score `img`.
pub fn self_ception(
    img: &RgbImage,
    slic: &SlicParams,
    cfg: &RenderConfig,
) -> Result<(RgbImage, SelfceptionReport)> {
    let run = self_ception_detailed(img, slic, cfg)?;
    Ok((run.output, run.report))
}

pub fn self_ception_detailed(
    img: &RgbImage,
    slic: &SlicParams,
    cfg: &RenderConfig,
) -> Result<Selfception> {
    if let Some(frames) = &cfg.frames {
        if frames.stride == 0 {
            return Err(Error::Param("frame stride must be at least 1".into()));
        }
    }
    let mut timings = StageTimings::default();

    let clock = Instant::now();
    let labels = run_slic(&rgb_to_lab(img), slic)?;
    timings.segmentation_ms = ms(clock);

    let clock = Instant::now();
    let stats = region_stats(&labels, img)?;
    let ellipses: Vec<Ellipse> = stats.iter().map(fit_ellipse).collect();
    timings.geometry_ms = ms(clock);

    let clock = Instant::now();
    let original: FloatImage = img.convert();
    let total_mean = mean_color(img);
    let mut canvas = base_layer(img, &labels, &stats, cfg.background)?;
    let tiles = ellipses
        .par_iter()
        .map(|e| {
            let mask = e.raster_mask(img.width(), img.height());
            let rang = masked_mean_color(&original, &mask)?;
            prepare_tile(&original, e, mask, rang, total_mean, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut frame_no = 0usize;
    for (i, tile) in tiles.iter().enumerate() {
        tile.paint(&mut canvas);
        if let Some(frames) = &cfg.frames {
            if (i + 1) % frames.stride == 0 {
                frame_no += 1;
                save_image(&canvas.convert(), frame_path(&frames.dir, frame_no))?;
            }
        }
    }
    let output: RgbImage = canvas.convert();
    timings.render_ms = ms(clock);

    let clock = Instant::now();
    let error = mse(&output, img)?;
    timings.metric_ms = ms(clock);

    let report = SelfceptionReport {
        requested_k: slic.target_regions,
        achieved_regions: labels.region_count(),
        mse: error,
        timings,
        slic: slic.clone(),
        config: cfg.clone(),
    };
    Ok(Selfception {
        labels,
        stats,
        ellipses,
        canvas,
        output,
        report,
    })
}

/// `frame_000001.png`, `frame_000002.png`, …
pub fn frame_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("frame_{n:06}.png"))
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}
