//! 8-bit raster images normalized to `[0, 1]`, with binary PGM/PPM and PNG I/O.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ExtendedColorType, ImageFormat};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    /// Row-major, channel-interleaved intensities.
    samples: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidArgument(format!(
                "images have 1 or 3 channels, got {channels}"
            )));
        }
        crate::error::check_len(width * height * channels, samples.len())?;
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    /// Interleaves per-channel planes of `width * height` samples each.
    pub fn from_planes(width: usize, height: usize, planes: &[Vec<f64>]) -> Result<Self> {
        let channels = planes.len();
        for p in planes {
            crate::error::check_len(width * height, p.len())?;
        }
        let mut samples = Vec::with_capacity(width * height * channels);
        for i in 0..width * height {
            samples.extend(planes.iter().map(|p| p[i]));
        }
        Self::new(width, height, channels, samples)
    }

    pub fn from_bytes(width: usize, height: usize, channels: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            bytes.iter().map(|&v| f64::from(v) / 255.0).collect(),
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn pixel(&self, col: usize, row: usize, channel: usize) -> f64 {
        self.samples[(row * self.width + col) * self.channels + channel]
    }

    pub fn plane(&self, channel: usize) -> Vec<f64> {
        self.samples
            .iter()
            .skip(channel)
            .step_by(self.channels)
            .copied()
            .collect()
    }

    /// 8-bit samples: clamp to `[0, 1]`, then round half away from zero.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.samples.iter().map(|&v| quantize(v)).collect()
    }

    /// The image as it would be stored on disk.
    pub fn quantized(&self) -> Self {
        Self::from_bytes(self.width, self.height, self.channels, &self.to_bytes())
            .expect("shape already validated")
    }

    /// Grayscale copy replicated into three identical channels.
    pub fn gray_to_rgb(&self) -> Result<Self> {
        if self.channels != 1 {
            return Err(Error::InvalidArgument("image is not grayscale".into()));
        }
        Self::new(
            self.width,
            self.height,
            3,
            self.samples.iter().flat_map(|&v| [v, v, v]).collect(),
        )
    }
}

pub fn quantize(v: f64) -> u8 {
    (255.0 * v.clamp(0.0, 1.0)).round() as u8
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Loads a binary PGM (P5), PPM (P6) or 8-bit gray/RGB PNG, detected from
/// the file contents.
pub fn load_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(&bytes).map_err(|m| format_err(path, m))
    } else if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        decode_png(&bytes).map_err(|m| format_err(path, m))
    } else {
        Err(format_err(path, "unsupported format (expected P5/P6 PNM or PNG)"))
    }
}

/// Writes the quantized image; the format follows the file extension
/// (`pgm`, `ppm`, `png`).
pub fn save_image(path: impl AsRef<Path>, img: &RasterImage) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    let data = img.to_bytes();
    let (w, h) = (img.width(), img.height());
    match (ext.as_str(), img.channels()) {
        ("pgm", 1) | ("ppm", 3) => {
            let magic = if img.channels() == 1 { "P5" } else { "P6" };
            let mut out = format!("{magic}\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(&data);
            fs::write(path, out)?;
            Ok(())
        }
        ("png", c) => {
            let color = if c == 1 {
                ExtendedColorType::L8
            } else {
                ExtendedColorType::Rgb8
            };
            image::save_buffer_with_format(path, &data, w as u32, h as u32, color, ImageFormat::Png)
                .map_err(|e| match e {
                    image::ImageError::IoError(io) => Error::Io(io),
                    other => format_err(path, other.to_string()),
                })
        }
        ("pgm", _) | ("ppm", _) => Err(format_err(
            path,
            format!("{} channels cannot be stored as .{ext}", img.channels()),
        )),
        _ => Err(format_err(path, "unsupported output extension")),
    }
}

fn decode_pnm(bytes: &[u8]) -> std::result::Result<RasterImage, String> {
    let channels = if bytes[1] == b'5' { 1 } else { 3 };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // skip whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err("truncated header".into()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("malformed header field at byte {start}"))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(format!("only 8-bit images (maxval 255) are supported, got {maxval}"));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("missing whitespace after header".into());
    }
    pos += 1;
    let expected = width * height * channels;
    let data = &bytes[pos..];
    if data.len() < expected {
        return Err(format!(
            "expected {expected} bytes of pixel data, found {}",
            data.len()
        ));
    }
    RasterImage::from_bytes(width, height, channels, &data[..expected]).map_err(|e| e.to_string())
}

fn decode_png(bytes: &[u8]) -> std::result::Result<RasterImage, String> {
    let img = image::load(Cursor::new(bytes), ImageFormat::Png).map_err(|e| e.to_string())?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => {
            RasterImage::from_bytes(w, h, 1, buf.as_raw()).map_err(|e| e.to_string())
        }
        DynamicImage::ImageRgb8(buf) => {
            RasterImage::from_bytes(w, h, 3, buf.as_raw()).map_err(|e| e.to_string())
        }
        other => Err(format!(
            "unsupported PNG color type {:?} (8-bit gray or RGB only)",
            other.color()
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_tiny_pgm() {
        let img = decode_pnm(b"P5\n1 1\n255\n\xff").unwrap();
        assert_eq!(img.samples(), &[1.0]);

        let img = decode_pnm(b"P5 # comment\n2 2\n255\n\x00\x55\xaa\xff").unwrap();
        let want = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        for (a, b) in img.samples().iter().zip(want) {
            assert!((a - b).abs() < 0.5 / 255.0);
        }
    }

    #[test]
    fn rejects_bad_pnm() {
        assert!(decode_pnm(b"P5\n2 2\n65535\n").is_err());
        assert!(decode_pnm(b"P5\n2 2\n255\n\x00").is_err());
        assert!(decode_pnm(b"P5\n2").is_err());
    }

    #[test]
    fn quantization_rounds_half_away() {
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(-0.2), 0);
        assert_eq!(quantize(1.7), 255);
        assert_eq!(quantize(1.5 / 255.0), 2);
    }

    #[test]
    fn planes_interleave() {
        let img = RasterImage::from_planes(2, 1, &[vec![0.1, 0.2], vec![0.3, 0.4], vec![0.5, 0.6]])
            .unwrap();
        assert_eq!(img.samples(), &[0.1, 0.3, 0.5, 0.2, 0.4, 0.6]);
        assert_eq!(img.plane(1), vec![0.3, 0.4]);
        assert_eq!(img.pixel(1, 0, 2), 0.6);
        assert!(RasterImage::from_planes(2, 1, &[vec![0.0, 0.0], vec![0.0, 0.0]]).is_err());
    }
}
