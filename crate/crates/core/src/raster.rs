//! Image ingestion, grayscale conversion and median-filter denoising.

use std::io::Write;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::RasterError;

/// Row-major 8-bit intensity raster. 0 is black, 255 is white.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(data.len()) {
            return Err(RasterError::BadDimensions {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    /// An image filled with a single intensity.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.data[row * self.width + col] = value;
    }

    /// 256-bin intensity histogram.
    pub fn histogram(&self) -> [u64; 256] {
        let mut hist = [0u64; 256];
        for &v in &self.data {
            hist[v as usize] += 1;
        }
        hist
    }

    /// Binary PGM (P5) encoding with maxval 255.
    pub fn to_pgm(&self) -> Vec<u8> {
        let header = format!("P5\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + self.data.len());
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(&self.data);
        out
    }

    pub fn write_pgm<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        writer.write_all(&self.to_pgm())
    }
}

/// BT.601 luma, rounded half-up. Integer arithmetic keeps the rounding exact.
#[inline]
pub fn luminance(r: u8, g: u8, b: u8) -> u8 {
    let y = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((y + 500) / 1000).min(255) as u8
}

/// Reads a PNG, JPEG or binary PGM file and reduces it to intensities.
pub fn load_grayscale(path: impl AsRef<Path>) -> Result<GrayImage, RasterError> {
    let path = path.as_ref();
    let bytes = match std::fs::read(path) {
        Ok(bytes) => bytes,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(RasterError::FileNotFound(path.to_path_buf()))
        }
        Err(source) => {
            return Err(RasterError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    decode_grayscale(&bytes).map_err(|e| match e {
        DecodeError::Unsupported => RasterError::UnsupportedFormat(path.to_path_buf()),
        DecodeError::Corrupt(reason) => RasterError::CorruptImage {
            path: path.to_path_buf(),
            reason,
        },
    })
}

#[derive(Debug)]
enum DecodeError {
    Unsupported,
    Corrupt(String),
}

fn decode_grayscale(bytes: &[u8]) -> Result<GrayImage, DecodeError> {
    if bytes.starts_with(b"P5") {
        return parse_pgm(bytes).map_err(DecodeError::Corrupt);
    }
    let format = match image::guess_format(bytes) {
        Ok(f @ (ImageFormat::Png | ImageFormat::Jpeg)) => f,
        _ => return Err(DecodeError::Unsupported),
    };
    let decoded =
        image::load_from_memory_with_format(bytes, format).map_err(|e| DecodeError::Corrupt(e.to_string()))?;
    Ok(from_dynamic(decoded))
}

fn from_dynamic(img: DynamicImage) -> GrayImage {
    let (width, height) = (img.width() as usize, img.height() as usize);
    let data = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) => img.to_luma8().into_raw(),
        other => other
            .to_rgb8()
            .pixels()
            .map(|p| luminance(p.0[0], p.0[1], p.0[2]))
            .collect(),
    };
    GrayImage { width, height, data }
}

fn parse_pgm(bytes: &[u8]) -> Result<GrayImage, String> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err("malformed PGM header".into());
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or("PGM header value out of range")?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("malformed PGM header".into());
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(format!("PGM has zero dimension {width}x{height}"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("PGM maxval {maxval} out of range"));
    }
    let pixels = width.checked_mul(height).ok_or("PGM dimensions overflow")?;
    let sample_bytes = if maxval > 255 { 2 } else { 1 };
    let body = &bytes[pos..];
    if body.len() < pixels * sample_bytes {
        return Err(format!(
            "PGM body truncated: expected {} bytes, found {}",
            pixels * sample_bytes,
            body.len()
        ));
    }
    let rescale = |v: usize| ((v * 255 * 2 + maxval) / (2 * maxval)).min(255) as u8;
    let data = if sample_bytes == 2 {
        body[..pixels * 2]
            .chunks_exact(2)
            .map(|c| rescale(u16::from_be_bytes([c[0], c[1]]) as usize))
            .collect()
    } else if maxval == 255 {
        body[..pixels].to_vec()
    } else {
        body[..pixels].iter().map(|&v| rescale(v as usize)).collect()
    };
    Ok(GrayImage { width, height, data })
}

/// Median of each `window`×`window` neighborhood. Out-of-range coordinates
/// clamp to the nearest edge pixel, so a window taller than a single-row
/// image is fine; the window may not exceed the image's longer side.
pub fn median_filter(img: &GrayImage, window: usize) -> Result<GrayImage, RasterError> {
    let limit = img.width.max(img.height);
    if window == 0 || window.is_multiple_of(2) || window > limit {
        return Err(RasterError::BadWindow { window, limit });
    }
    if window == 1 {
        return Ok(img.clone());
    }
    let radius = (window / 2) as isize;
    let (w, h) = (img.width, img.height);
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    // Column offsets per output column, clamped once.
    let col_index: Vec<Vec<usize>> = (0..w)
        .map(|c| (-radius..=radius).map(|d| clamp(c as isize + d, w)).collect())
        .collect();

    let mid = window * window / 2;
    let mut out = vec![0u8; w * h];
    let mut buf = Vec::with_capacity(window * window);
    for r in 0..h {
        let rows: Vec<&[u8]> = (-radius..=radius)
            .map(|d| {
                let rr = clamp(r as isize + d, h);
                &img.data[rr * w..(rr + 1) * w]
            })
            .collect();
        for (c, cols) in col_index.iter().enumerate() {
            buf.clear();
            for row in &rows {
                buf.extend(cols.iter().map(|&cc| row[cc]));
            }
            let (_, median, _) = buf.select_nth_unstable(mid);
            out[r * w + c] = *median;
        }
    }
    Ok(GrayImage {
        width: w,
        height: h,
        data: out,
    })
}
