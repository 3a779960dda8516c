//! Rasters, binary masks, foreground maps, their file formats, and the Jaccard index.
//!
//! Supported formats are PNG (8-bit gray/RGB, other color types are expanded),
//! binary PPM (`P6`) and binary PGM (`P5`) with maxval up to 255.

use std::cell::Cell;
use std::fs;
use std::io::{self, BufRead, Cursor, Read, Seek, SeekFrom};
use std::path::Path;
use std::rc::Rc;

use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl Raster {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "raster must be at least 1x1, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "raster {width}x{height} needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Raster {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, color: Rgb) -> Result<Self> {
        Raster::new(width, height, vec![color; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "mask {width}x{height} needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        BinaryMask {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// In-place union with another mask of the same dimensions.
    pub fn union_with(&mut self, other: &BinaryMask) -> Result<()> {
        check_same_dims(self.dimensions(), other.dimensions())?;
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(())
    }
}

/// Per-pixel confidence values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl FloatMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "map {width}x{height} needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "map value {v} outside [0, 1]"
            )));
        }
        Ok(FloatMap {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        FloatMap {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// 8-bit rendering, `round(value * 255)`.
    pub fn to_gray_bytes(&self) -> Vec<u8> {
        self.values
            .iter()
            .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }
}

fn check_same_dims(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `|a ∩ b| / |a ∪ b|`; two empty masks score 1.
pub fn jaccard(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    check_same_dims(a.dimensions(), b.dimensions())?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &q) in a.bits.iter().zip(&b.bits) {
        inter += (p && q) as usize;
        union += (p || q) as usize;
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

/// Decoded 8-bit image with 1 (gray) or 3 (RGB) channels.
struct Decoded {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

fn decode_any(bytes: &[u8], origin: &str) -> Result<Decoded> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(bytes, origin)
    } else if bytes.starts_with(b"P6") || bytes.starts_with(b"P5") {
        decode_pnm(bytes, origin)
    } else {
        Err(Error::Decode {
            origin: origin.to_string(),
            offset: 0,
            reason: "unrecognized magic (expected PNG, P5 or P6)".into(),
        })
    }
}

struct PnmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    origin: &'a str,
}

impl PnmCursor<'_> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Decode {
            origin: self.origin.to_string(),
            offset: self.pos as u64,
            reason: reason.into(),
        }
    }

    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                _ => break,
            }
        }
    }

    fn read_uint(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                let mut e = self.err(format!("{what} out of range"));
                if let Error::Decode { offset, .. } = &mut e {
                    *offset = start as u64;
                }
                e
            })
    }
}

fn decode_pnm(bytes: &[u8], origin: &str) -> Result<Decoded> {
    let channels = if bytes[1] == b'6' { 3 } else { 1 };
    let mut cur = PnmCursor {
        bytes,
        pos: 2,
        origin,
    };
    let width = cur.read_uint("width")?;
    let height = cur.read_uint("height")?;
    let maxval = cur.read_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(cur.err("zero image dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(cur.err(format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => return Err(cur.err("expected whitespace after maxval")),
        None => return Err(cur.err("truncated header")),
    }
    let needed = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| cur.err("image dimensions overflow"))?;
    let available = bytes.len() - cur.pos;
    if available < needed {
        return Err(Error::Decode {
            origin: origin.to_string(),
            offset: bytes.len() as u64,
            reason: format!("truncated pixel data: need {needed} bytes, found {available}"),
        });
    }
    let mut data = bytes[cur.pos..cur.pos + needed].to_vec();
    if maxval != 255 {
        for (i, v) in data.iter_mut().enumerate() {
            if *v as usize > maxval {
                return Err(Error::Decode {
                    origin: origin.to_string(),
                    offset: (cur.pos + i) as u64,
                    reason: format!("sample {v} exceeds maxval {maxval}"),
                });
            }
            *v = ((*v as usize * 255 + maxval / 2) / maxval) as u8;
        }
    }
    Ok(Decoded {
        width,
        height,
        channels,
        data,
    })
}

/// Cursor wrapper that remembers how far the decoder has read, so PNG errors
/// can carry a byte offset.
struct TrackedCursor<'a> {
    inner: Cursor<&'a [u8]>,
    high_water: Rc<Cell<u64>>,
}

impl TrackedCursor<'_> {
    fn note(&self) {
        let pos = self.inner.position();
        if pos > self.high_water.get() {
            self.high_water.set(pos);
        }
    }
}

impl Read for TrackedCursor<'_> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.note();
        Ok(n)
    }
}

impl BufRead for TrackedCursor<'_> {
    fn fill_buf(&mut self) -> io::Result<&[u8]> {
        self.inner.fill_buf()
    }

    fn consume(&mut self, amt: usize) {
        self.inner.consume(amt);
        self.note();
    }
}

impl Seek for TrackedCursor<'_> {
    fn seek(&mut self, pos: SeekFrom) -> io::Result<u64> {
        let p = self.inner.seek(pos)?;
        self.note();
        Ok(p)
    }
}

fn decode_png(bytes: &[u8], origin: &str) -> Result<Decoded> {
    let high_water = Rc::new(Cell::new(0u64));
    let reader = TrackedCursor {
        inner: Cursor::new(bytes),
        high_water: Rc::clone(&high_water),
    };
    let fail = |e: png::DecodingError| Error::Decode {
        origin: origin.to_string(),
        offset: high_water.get(),
        reason: e.to_string(),
    };
    let mut decoder = png::Decoder::new(reader);
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(fail)?;
    let size = reader.output_buffer_size().ok_or_else(|| Error::Decode {
        origin: origin.to_string(),
        offset: high_water.get(),
        reason: "image too large".into(),
    })?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(fail)?;
    buf.truncate(info.buffer_size());
    let (width, height) = (info.width as usize, info.height as usize);
    let src_channels = info.color_type.samples();
    let channels = if src_channels < 3 { 1 } else { 3 };
    let data = buf
        .chunks_exact(src_channels)
        .flat_map(|px| px[..channels].to_vec())
        .collect();
    Ok(Decoded {
        width,
        height,
        channels,
        data,
    })
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn decode_raster(bytes: &[u8], origin: &str) -> Result<Raster> {
    let d = decode_any(bytes, origin)?;
    let pixels = match d.channels {
        1 => d.data.iter().map(|&g| [g, g, g]).collect(),
        _ => d.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
    };
    Raster::new(d.width, d.height, pixels)
}

/// Any nonzero sample marks the pixel as foreground.
pub fn decode_mask(bytes: &[u8], origin: &str) -> Result<BinaryMask> {
    let d = decode_any(bytes, origin)?;
    let bits = d
        .data
        .chunks_exact(d.channels)
        .map(|px| px.iter().any(|&v| v > 0))
        .collect();
    BinaryMask::new(d.width, d.height, bits)
}

/// Raw single-channel samples, without thresholding.
pub(crate) fn decode_gray_samples(bytes: &[u8], origin: &str) -> Result<(usize, usize, Vec<u8>)> {
    let d = decode_any(bytes, origin)?;
    if d.channels != 1 {
        return Err(Error::Decode {
            origin: origin.to_string(),
            offset: 0,
            reason: "expected a single-channel image".into(),
        });
    }
    Ok((d.width, d.height, d.data))
}

pub fn load_raster(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    decode_raster(&read_file(path)?, &path.display().to_string())
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    decode_mask(&read_file(path)?, &path.display().to_string())
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

pub fn encode_ppm(raster: &Raster) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", raster.width, raster.height).into_bytes();
    out.extend(raster.pixels.iter().flatten());
    out
}

pub fn encode_pgm(width: usize, height: usize, data: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(data);
    out
}

fn encode_png(
    width: usize,
    height: usize,
    color: png::ColorType,
    data: &[u8],
    origin: &str,
) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let fail = |e: png::EncodingError| Error::Encode {
        origin: origin.to_string(),
        reason: e.to_string(),
    };
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(fail)?;
        writer.write_image_data(data).map_err(fail)?;
        writer.finish().map_err(fail)?;
    }
    Ok(out)
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes PNG when the extension is `.png`, binary PPM otherwise.
pub fn save_raster(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = if is_png(path) {
        let data: Vec<u8> = raster.pixels.iter().flatten().copied().collect();
        encode_png(
            raster.width,
            raster.height,
            png::ColorType::Rgb,
            &data,
            &path.display().to_string(),
        )?
    } else {
        encode_ppm(raster)
    };
    write_file(path, &bytes)
}

/// Writes an 8-bit gray image (PNG by extension, PGM otherwise) with foreground stored as 255.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let data: Vec<u8> = mask.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
    save_gray(mask.width, mask.height, &data, path.as_ref())
}

/// Renders `value * 255`, rounded.
pub fn save_float_map(map: &FloatMap, path: impl AsRef<Path>) -> Result<()> {
    save_gray(map.width, map.height, &map.to_gray_bytes(), path.as_ref())
}

fn save_gray(width: usize, height: usize, data: &[u8], path: &Path) -> Result<()> {
    let bytes = if is_png(path) {
        encode_png(
            width,
            height,
            png::ColorType::Grayscale,
            data,
            &path.display().to_string(),
        )?
    } else {
        encode_pgm(width, height, data)
    };
    write_file(path, &bytes)
}
