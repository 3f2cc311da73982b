//! Image self-ception: rebuild an image out of resized, color-shifted copies
//! of itself.
//!
//! The pipeline has four stages:
//!
//! 1. [`slic`] over-segments the image into superpixels (localized k-means in
//!    CIELAB + image coordinates).
//! 2. [`geometry`] fits the equivalent ellipse of every region from its
//!    second-order central moments.
//! 3. [`render`] shrinks the whole image into each ellipse's bounding box,
//!    shifts its colors so the tile's mean moves to the ellipse's mean, and
//!    paints it through the ellipse mask.
//! 4. [`raster::mse`] measures how close the mosaic is to the original.
//!
//! ```no_run
//! use selfception::{raster, render::{self_ception, RenderConfig}, slic::SlicParams};
//!
//! let img = raster::load_image("chelsea.png").unwrap();
//! let (out, report) = self_ception(&img, &SlicParams::new(600), &RenderConfig::default()).unwrap();
//! println!("regions={} mse={:.2}", report.achieved_regions, report.mse);
//! raster::save_image(&out, "out.png").unwrap();
//! ```

pub mod error;
pub mod geometry;
pub mod raster;
pub mod render;
pub mod slic;

pub use error::{Error, Result};
pub use geometry::{Ellipse, Rect, RegionStats};
pub use raster::{Color3, FloatImage, Image, LabImage, RgbImage};
pub use render::{Background, FrameExport, RenderConfig, SelfceptionReport};
pub use slic::{LabelMap, SlicParams};
