use crate::error::{Error, Result};

/// Per-pixel region assignment, row-major, with labels dense in
/// `0..region_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    region_count: usize,
}

impl LabelMap {
    /// Validates that `labels` covers the raster and that every label in
    /// `0..=max` occurs at least once. Connectivity is not checked.
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 || labels.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} labels for a {width}x{height} raster",
                labels.len()
            )));
        }
        let region_count = labels.iter().max().map_or(0, |&m| m as usize + 1);
        let mut seen = vec![false; region_count];
        for &l in &labels {
            seen[l as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Param(format!("label {missing} has no pixels")));
        }
        Ok(LabelMap {
            width,
            height,
            labels,
            region_count,
        })
    }

    pub(crate) fn from_dense(width: usize, height: usize, labels: Vec<u32>, region_count: usize) -> Self {
        debug_assert_eq!(labels.len(), width * height);
        LabelMap {
            width,
            height,
            labels,
            region_count,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn region_count(&self) -> usize {
        self.region_count
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Raw dump: little-endian u32 width, u32 height, then one u32 per pixel.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 4 * self.labels.len());
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        for &l in &self.labels {
            out.extend_from_slice(&l.to_le_bytes());
        }
        out
    }

    pub fn from_le_bytes(bytes: &[u8]) -> Result<Self> {
        let word = |i: usize| -> Result<u32> {
            bytes
                .get(4 * i..4 * i + 4)
                .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .ok_or_else(|| Error::Format("label raster truncated".into()))
        };
        let width = word(0)? as usize;
        let height = word(1)? as usize;
        let n = width * height;
        if bytes.len() != 8 + 4 * n {
            return Err(Error::Format(format!(
                "label raster: expected {} bytes for {width}x{height}, got {}",
                8 + 4 * n,
                bytes.len()
            )));
        }
        let labels = (0..n).map(|i| word(i + 2)).collect::<Result<Vec<_>>>()?;
        LabelMap::new(width, height, labels)
    }
}
