//! Frame stacks, 4D volumes and RGB rasters, plus the on-disk formats they
//! are read from and written to.
//!
//! Frames are PGM (P5, maxval 255 or 65535) or grayscale PNG (8 or 16 bit).
//! Intensities are held as `f64`, which carries every 16-bit sample exactly.

mod pgm;
mod volume;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use volume::{load_volume4d, write_volume4d};

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

fn check_intensities(data: &[f64]) -> Result<()> {
    if data.iter().all(|v| v.is_finite() && *v >= 0.0) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(
            "intensities must be finite and non-negative".into(),
        ))
    }
}

/// Ordered temporal sequence of equally sized grayscale frames.
///
/// Samples are stored frame-major: frame `t`, row `y`, column `x` lives at
/// `t * width * height + y * width + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStack {
    width: usize,
    height: usize,
    frame_count: usize,
    source_bit_depth: u8,
    data: Vec<f64>,
}

impl FrameStack {
    pub fn new(width: usize, height: usize, frames: Vec<Vec<f64>>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::EmptyStack);
        }
        let frame_len = width * height;
        if frames.iter().any(|f| f.len() != frame_len) {
            return Err(Error::GeometryMismatch(format!(
                "every frame must hold {width}x{height} samples"
            )));
        }
        let frame_count = frames.len();
        Self::from_raw(width, height, frame_count, frames.concat())
    }

    /// Builds a stack from frame-major contiguous samples.
    pub fn from_raw(width: usize, height: usize, frame_count: usize, data: Vec<f64>) -> Result<Self> {
        if frame_count == 0 {
            return Err(Error::EmptyStack);
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("frames must be at least 1x1".into()));
        }
        if data.len() != width * height * frame_count {
            return Err(Error::GeometryMismatch(format!(
                "{} samples for {frame_count} frames of {width}x{height}",
                data.len()
            )));
        }
        check_intensities(&data)?;
        Ok(FrameStack {
            width,
            height,
            frame_count,
            source_bit_depth: 16,
            data,
        })
    }

    pub fn with_bit_depth(mut self, bit_depth: u8) -> Self {
        self.source_bit_depth = bit_depth;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn frame_len(&self) -> usize {
        self.width * self.height
    }

    pub fn source_bit_depth(&self) -> u8 {
        self.source_bit_depth
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn frame(&self, index: usize) -> &[f64] {
        let len = self.frame_len();
        &self.data[index * len..(index + 1) * len]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.frame_len())
    }

    pub fn get(&self, frame: usize, x: usize, y: usize) -> f64 {
        self.data[frame * self.frame_len() + y * self.width + x]
    }

    /// Temporal series of one pixel.
    pub fn pixel_series(&self, x: usize, y: usize) -> Vec<f64> {
        let offset = y * self.width + x;
        self.frames().map(|f| f[offset]).collect()
    }

    pub fn global_max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn global_min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Time-ordered sequence of 3D grayscale volumes, indexed `(t, z, y, x)` with
/// `x` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume4D {
    nx: usize,
    ny: usize,
    nz: usize,
    nt: usize,
    spacing: [f64; 3],
    data: Vec<f64>,
}

impl Volume4D {
    pub fn from_raw(nx: usize, ny: usize, nz: usize, nt: usize, data: Vec<f64>) -> Result<Self> {
        if nt == 0 {
            return Err(Error::EmptyStack);
        }
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidParameter("volumes must be at least 1x1x1".into()));
        }
        if data.len() != nx * ny * nz * nt {
            return Err(Error::GeometryMismatch(format!(
                "{} samples for {nt} timepoints of {nx}x{ny}x{nz}",
                data.len()
            )));
        }
        check_intensities(&data)?;
        Ok(Volume4D {
            nx,
            ny,
            nz,
            nt,
            spacing: [1.0; 3],
            data,
        })
    }

    /// Voxel spacing `(x, y, z)`; carried as metadata only.
    pub fn with_spacing(mut self, spacing: [f64; 3]) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn timepoint_len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, t: usize, z: usize, y: usize, x: usize) -> f64 {
        self.data[t * self.timepoint_len() + (z * self.ny + y) * self.nx + x]
    }

    pub fn voxel_series(&self, z: usize, y: usize, x: usize) -> Vec<f64> {
        let offset = (z * self.ny + y) * self.nx + x;
        self.data
            .chunks_exact(self.timepoint_len())
            .map(|tp| tp[offset])
            .collect()
    }

    pub fn global_max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn global_min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// 8-bit-per-channel RGB raster, row-major, no alpha.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        RgbImage {
            width,
            height,
            pixels: vec![0; width * height * 3],
        }
    }

    /// Wraps packed `rgbrgb...` bytes.
    pub fn from_raw(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height * 3 {
            return Err(Error::GeometryMismatch(format!(
                "{} bytes for a {width}x{height} RGB image",
                pixels.len()
            )));
        }
        Ok(RgbImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    pub fn as_bytes_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn put(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }
}

struct GrayFrame {
    width: usize,
    height: usize,
    bit_depth: u8,
    samples: Vec<u16>,
}

fn read_gray_frame(path: &Path) -> Result<GrayFrame> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P5") {
        let r = pgm::decode(&bytes).map_err(|e| match e {
            Error::UnsupportedFormat(msg) => {
                Error::UnsupportedFormat(format!("{}: {msg}", path.display()))
            }
            other => other,
        })?;
        return Ok(GrayFrame {
            width: r.width,
            height: r.height,
            bit_depth: r.bit_depth,
            samples: r.samples,
        });
    }
    if bytes.starts_with(b"P6") || bytes.starts_with(b"P3") || bytes.starts_with(b"P7") {
        return Err(Error::NotGrayscale { path: path.into() });
    }
    if bytes.starts_with(&PNG_SIGNATURE) {
        return read_gray_png(path, &bytes);
    }
    Err(Error::UnsupportedFormat(format!(
        "{}: expected binary PGM or PNG",
        path.display()
    )))
}

fn read_gray_png(path: &Path, bytes: &[u8]) -> Result<GrayFrame> {
    // IHDR is always the first chunk: bit depth at byte 24, colour type at 25.
    if bytes.len() < 26 || &bytes[12..16] != b"IHDR" {
        return Err(Error::Decode {
            path: path.into(),
            message: "PNG without IHDR".into(),
        });
    }
    let (bit_depth, color_type) = (bytes[24], bytes[25]);
    if color_type != 0 {
        return Err(Error::NotGrayscale { path: path.into() });
    }
    if bit_depth != 8 && bit_depth != 16 {
        return Err(Error::UnsupportedFormat(format!(
            "{}: {bit_depth}-bit grayscale PNG",
            path.display()
        )));
    }
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png).map_err(|e| {
        Error::Decode {
            path: path.into(),
            message: e.to_string(),
        }
    })?;
    let (width, height) = (img.width() as usize, img.height() as usize);
    let samples = match img {
        image::DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u16::from).collect(),
        image::DynamicImage::ImageLuma16(buf) => buf.into_raw(),
        _ => return Err(Error::NotGrayscale { path: path.into() }),
    };
    Ok(GrayFrame {
        width,
        height,
        bit_depth,
        samples,
    })
}

fn is_frame_file(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("png"))
            .unwrap_or(false)
}

/// Frame files in a directory, in strict byte-lexicographic filename order.
fn directory_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if is_frame_file(&path) {
            paths.push(path);
        }
    }
    paths.sort_by(|a, b| {
        let name = |p: &PathBuf| p.file_name().map(|n| n.as_encoded_bytes().to_vec());
        name(a).cmp(&name(b))
    });
    Ok(paths)
}

/// Frame paths listed in a manifest. Relative entries resolve against the
/// manifest's own directory.
pub fn read_manifest(manifest: &Path) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let base = manifest.parent().unwrap_or_else(|| Path::new(""));
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let p = Path::new(l);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        })
        .collect())
}

/// Loads a stack from a directory of frames or from a manifest file.
pub fn load_stack(source: &Path) -> Result<FrameStack> {
    let paths = if source.is_dir() {
        directory_frames(source)?
    } else {
        read_manifest(source)?
    };
    load_frames(&paths)
}

/// Loads the given frame files in order.
pub fn load_frames(paths: &[PathBuf]) -> Result<FrameStack> {
    if paths.is_empty() {
        return Err(Error::EmptyStack);
    }
    let frames: Vec<GrayFrame> = paths
        .par_iter()
        .map(|p| read_gray_frame(p))
        .collect::<Result<_>>()?;

    let (width, height) = (frames[0].width, frames[0].height);
    if let Some((path, _)) = paths
        .iter()
        .zip(&frames)
        .find(|(_, f)| f.width != width || f.height != height)
    {
        return Err(Error::InconsistentGeometry { path: path.clone() });
    }
    let bit_depth = frames.iter().map(|f| f.bit_depth).max().unwrap_or(8);
    let mut data = Vec::with_capacity(width * height * frames.len());
    for f in &frames {
        data.extend(f.samples.iter().map(|&v| f64::from(v)));
    }
    Ok(FrameStack::from_raw(width, height, frames.len(), data)?.with_bit_depth(bit_depth))
}

fn to_u16_samples(values: &[f64]) -> Result<Vec<u16>> {
    values
        .iter()
        .map(|&v| {
            if v.fract() == 0.0 && (0.0..=65535.0).contains(&v) {
                Ok(v as u16)
            } else {
                Err(Error::InvalidParameter(format!(
                    "sample {v} is not representable as uint16"
                )))
            }
        })
        .collect()
}

/// Writes one frame as a 16-bit binary PGM. Samples must be integers in
/// `0..=65535`.
pub fn write_frame_pgm(path: &Path, width: usize, height: usize, frame: &[f64]) -> Result<()> {
    if frame.len() != width * height {
        return Err(Error::GeometryMismatch("frame length".into()));
    }
    let samples = to_u16_samples(frame)?;
    fs::write(path, pgm::encode(width, height, 16, &samples)).map_err(|e| Error::io(path, e))
}

/// Writes every frame of `stack` into `dir` as `frame_0000.pgm`, `frame_0001.pgm`, ...
pub fn write_stack(stack: &FrameStack, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    stack
        .frames()
        .enumerate()
        .map(|(i, frame)| {
            let path = dir.join(format!("frame_{i:04}.pgm"));
            write_frame_pgm(&path, stack.width(), stack.height(), frame)?;
            Ok(path)
        })
        .collect()
}

fn image_error(path: &Path, err: image::ImageError) -> Error {
    match err {
        image::ImageError::IoError(source) => Error::io(path, source),
        other => Error::Decode {
            path: path.into(),
            message: other.to_string(),
        },
    }
}

/// Writes an 8-bit RGB PNG.
pub fn write_rgb(image: &RgbImage, path: &Path) -> Result<()> {
    if image.width == 0 || image.height == 0 {
        return Err(Error::EmptyImage);
    }
    image::save_buffer_with_format(
        path,
        &image.pixels,
        image.width as u32,
        image.height as u32,
        image::ExtendedColorType::Rgb8,
        image::ImageFormat::Png,
    )
    .map_err(|e| image_error(path, e))
}

/// Reads an RGB PNG previously written by [`write_rgb`].
pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| image_error(path, e))?;
    match img {
        image::DynamicImage::ImageRgb8(buf) => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            RgbImage::from_raw(w, h, buf.into_raw())
        }
        _ => Err(Error::UnsupportedFormat(format!(
            "{}: expected 8-bit RGB PNG",
            path.display()
        ))),
    }
}
