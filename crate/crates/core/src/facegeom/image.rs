//! Value-semantic RGB raster images with binary PPM (P6) persistence.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("image dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("pixel buffer holds {got} pixels but {width}x{height} needs {expected}")]
    PixelCountMismatch {
        width: usize,
        height: usize,
        expected: usize,
        got: usize,
    },
    #[error("not a binary PPM (P6) file")]
    BadMagic,
    #[error("malformed PPM header: {0}")]
    BadHeader(String),
    #[error("unsupported PPM maxval {0}, only 255 is supported")]
    UnsupportedMaxval(u32),
    #[error("truncated PPM payload: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// An RGB image, 8 bits per channel, pixels stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroDimension { width, height });
        }
        let expected = width * height;
        if pixels.len() != expected {
            return Err(ImageError::PixelCountMismatch {
                width,
                height,
                expected,
                got: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Uniform-color image.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self, ImageError> {
        Self::new(width, height, vec![rgb; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }

    /// Pixel lookup with clamp-to-edge semantics for out-of-bounds reads.
    pub fn pixel_clamped(&self, x: i64, y: i64) -> [u8; 3] {
        let cx = x.clamp(0, self.width as i64 - 1) as usize;
        let cy = y.clamp(0, self.height as i64 - 1) as usize;
        self.pixels[cy * self.width + cx]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x] = rgb;
    }

    /// Serializes as a binary PPM: `P6\n<w> <h>\n255\n` followed by raw RGB.
    pub fn to_ppm_bytes(&self) -> Vec<u8> {
        let header = format!("P6\n{} {}\n255\n", self.width, self.height);
        let mut bytes = Vec::with_capacity(header.len() + self.pixels.len() * 3);
        bytes.extend_from_slice(header.as_bytes());
        for px in &self.pixels {
            bytes.extend_from_slice(px);
        }
        bytes
    }

    /// Parses a binary PPM with 8-bit maxval. Header comments (`#`) are
    /// honored per the PPM grammar.
    pub fn from_ppm_bytes(bytes: &[u8]) -> Result<Self, ImageError> {
        let mut cursor = HeaderCursor::new(bytes);
        let magic = cursor.token()?;
        if magic != b"P6" {
            return Err(ImageError::BadMagic);
        }
        let width = cursor.unsigned("width")?;
        let height = cursor.unsigned("height")?;
        let maxval = cursor.unsigned("maxval")?;
        if maxval != 255 {
            return Err(ImageError::UnsupportedMaxval(maxval));
        }
        cursor.single_whitespace()?;
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroDimension {
                width: width as usize,
                height: height as usize,
            });
        }
        let (width, height) = (width as usize, height as usize);
        let expected = width * height * 3;
        let payload = cursor.rest();
        if payload.len() < expected {
            return Err(ImageError::Truncated {
                expected,
                got: payload.len(),
            });
        }
        let pixels = payload[..expected]
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect();
        Self::new(width, height, pixels)
    }

    /// Flattens the image into classifier features: row-major RGB channel
    /// values scaled to [0, 1], length `width * height * 3`.
    pub fn to_features(&self) -> Vec<f64> {
        let mut features = Vec::with_capacity(self.pixels.len() * 3);
        for px in &self.pixels {
            for c in 0..3 {
                features.push(f64::from(px[c]) / 255.0);
            }
        }
        features
    }

    pub fn write_ppm<P: AsRef<Path>>(&self, path: P) -> Result<(), ImageError> {
        let mut file = fs::File::create(path)?;
        file.write_all(&self.to_ppm_bytes())?;
        Ok(())
    }

    pub fn read_ppm<P: AsRef<Path>>(path: P) -> Result<Self, ImageError> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_ppm_bytes(&bytes)
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8], ImageError> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::BadHeader("unexpected end of header".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn unsigned(&mut self, field: &str) -> Result<u32, ImageError> {
        let token = self.token()?;
        std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::BadHeader(format!("invalid {field}")))
    }

    /// The PPM grammar requires exactly one whitespace byte between the
    /// maxval and the raster.
    fn single_whitespace(&mut self) -> Result<(), ImageError> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(ImageError::BadHeader(
                "missing whitespace before raster".into(),
            )),
        }
    }

    fn rest(&self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }
}
