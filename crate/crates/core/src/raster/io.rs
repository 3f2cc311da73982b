use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder, ImageFormat};

use super::RgbImage;
use crate::error::{Error, Result};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Reads a PNG or binary PPM (P6) file. The format is sniffed from the
/// leading bytes, not the extension.
///
/// Grayscale PNGs are replicated across channels and alpha is dropped.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let decoded = if bytes.starts_with(b"P6") {
        decode_ppm(&bytes)
    } else if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(&bytes)
    } else {
        Err(Error::Format("not a PNG or binary PPM file".into()))
    };
    decoded.map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Writes `img` losslessly; `.ppm`/`.pnm` selects P6, `.png` selects PNG.
pub fn save_image(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let encode_ppm_file = match ext.as_deref() {
        Some("png") => false,
        Some("ppm") | Some("pnm") => true,
        _ => {
            return Err(Error::Format(format!(
                "{}: unsupported output extension (expected .png or .ppm)",
                path.display()
            )))
        }
    };

    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    if encode_ppm_file {
        out.write_all(&encode_ppm(img))
            .map_err(|e| Error::io(path, e))?;
    } else {
        PngEncoder::new(&mut out)
            .write_image(
                img.as_raw(),
                img.width() as u32,
                img.height() as u32,
                ExtendedColorType::Rgb8,
            )
            .map_err(|e| match e {
                image::ImageError::IoError(io) => Error::io(path, io),
                other => Error::Format(format!("{}: {other}", path.display())),
            })?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn decode_png(bytes: &[u8]) -> Result<RgbImage> {
    let dynamic = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::Format(format!("PNG decode failed: {e}")))?;
    let rgb = dynamic.to_rgb8();
    let (w, h) = rgb.dimensions();
    RgbImage::from_raw(w as usize, h as usize, rgb.into_raw())
}

/// `P6\n<w> <h>\n255\n` followed by raw RGB bytes.
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.as_raw().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.as_raw());
    out
}

/// Parses a binary PPM. Header tokens may be separated by any whitespace and
/// `#` comments; only maxval 255 is accepted.
pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos)?;
    if magic != b"P6" {
        return Err(Error::Format("PPM magic must be P6".into()));
    }
    let width = parse_number(next_token(bytes, &mut pos)?)?;
    let height = parse_number(next_token(bytes, &mut pos)?)?;
    let maxval = parse_number(next_token(bytes, &mut pos)?)?;
    if maxval != 255 {
        return Err(Error::Format(format!(
            "PPM maxval {maxval} unsupported (only 255)"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::Format("PPM header not terminated".into())),
    }
    let needed = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::Format("PPM dimensions overflow".into()))?;
    let body = &bytes[pos..];
    if body.len() < needed {
        return Err(Error::Format(format!(
            "PPM raster truncated: expected {needed} bytes, found {}",
            body.len()
        )));
    }
    RgbImage::from_raw(width, height, body[..needed].to_vec())
        .map_err(|e| Error::Format(format!("PPM: {e}")))
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        match bytes.get(*pos) {
            Some(c) if c.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&c) = bytes.get(*pos) {
                    *pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(Error::Format("PPM header truncated".into())),
        }
    }
    let start = *pos;
    while matches!(bytes.get(*pos), Some(c) if !c.is_ascii_whitespace()) {
        *pos += 1;
    }
    Ok(&bytes[start..*pos])
}

fn parse_number(tok: &[u8]) -> Result<usize> {
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| {
            Error::Format(format!(
                "bad PPM header field {:?}",
                String::from_utf8_lossy(tok)
            ))
        })
}
