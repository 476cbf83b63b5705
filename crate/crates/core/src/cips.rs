//! Per-pixel temporal statistics and their mapping to hue, saturation and
//! brightness:
//!
//! * brightness = MaxIP, normalised by the largest MaxIP in the image
//! * saturation = (MaxIP - MinIP) / MaxIP, zero where MaxIP is zero
//! * hue = (frame index of the first maximum) / (frames per hue cycle), wrapped into `[0, 1)`

use rayon::prelude::*;

use crate::colorspace::HsbTriple;
use crate::error::{Error, Result};
use crate::stack_io::{FrameStack, Volume4D};

/// Pixels per parallel work unit.
const CHUNK: usize = 4096;

/// Tunables for a CIPs computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CipsParams {
    /// Frames per hue cycle. Ignored when `cycling` is false.
    pub period: f64,
    /// When false the hue wheel spans the whole stack once.
    pub cycling: bool,
    pub saturation_gain: f64,
    pub invert: bool,
    pub interp_factor: usize,
}

impl Default for CipsParams {
    fn default() -> Self {
        CipsParams {
            period: 22.0,
            cycling: false,
            saturation_gain: 1.0,
            invert: false,
            interp_factor: 1,
        }
    }
}

impl CipsParams {
    /// Cycling hue with the given period.
    pub fn cycling(period: f64) -> Self {
        CipsParams {
            period,
            cycling: true,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "period must be positive, got {}",
                self.period
            )));
        }
        if !(self.saturation_gain.is_finite() && self.saturation_gain >= 0.0) {
            return Err(Error::InvalidGain(self.saturation_gain));
        }
        if self.interp_factor == 0 {
            return Err(Error::InvalidParameter("interpolation factor must be >= 1".into()));
        }
        Ok(())
    }

    /// Period actually used for a stack of `frame_count` frames.
    pub fn effective_period(&self, frame_count: usize) -> f64 {
        if self.cycling {
            self.period
        } else {
            frame_count as f64
        }
    }
}

/// Temporal statistics of one pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelStats {
    pub max_ip: f64,
    pub min_ip: f64,
    /// First frame index attaining `max_ip`.
    pub argmax_index: usize,
}

pub fn pixel_stats(series: &[f64]) -> Result<PixelStats> {
    let (&first, rest) = series.split_first().ok_or(Error::EmptySeries)?;
    let mut stats = PixelStats {
        max_ip: first,
        min_ip: first,
        argmax_index: 0,
    };
    for (i, &v) in rest.iter().enumerate() {
        if v > stats.max_ip {
            stats.max_ip = v;
            stats.argmax_index = i + 1;
        }
        if v < stats.min_ip {
            stats.min_ip = v;
        }
    }
    Ok(stats)
}

/// Fractional part of `index / period`, in `[0, 1)`.
///
/// Computed as `(index - floor(index / period) * period) / period`, so for an
/// integral period the result is exactly `(index mod period) / period` and
/// indices one period apart give bit-identical hues.
pub fn hue_from_index(index: usize, period: f64) -> f64 {
    let x = index as f64;
    let cycles = (x / period).floor();
    let hue = (x - cycles * period) / period;
    if hue >= 1.0 {
        hue - 1.0
    } else if hue < 0.0 {
        hue + 1.0
    } else {
        hue
    }
}

/// Stats for every sample position of frame-major `data`.
pub(crate) fn temporal_stats(data: &[f64], frame_len: usize) -> Vec<PixelStats> {
    let frame_count = data.len() / frame_len;
    let mut stats = vec![
        PixelStats {
            max_ip: 0.0,
            min_ip: 0.0,
            argmax_index: 0,
        };
        frame_len
    ];
    stats
        .par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(chunk, out)| {
            let start = chunk * CHUNK;
            let first = &data[start..start + out.len()];
            for (s, &v) in out.iter_mut().zip(first) {
                s.max_ip = v;
                s.min_ip = v;
            }
            for t in 1..frame_count {
                let base = t * frame_len + start;
                let frame = &data[base..base + out.len()];
                for (s, &v) in out.iter_mut().zip(frame) {
                    if v > s.max_ip {
                        s.max_ip = v;
                        s.argmax_index = t;
                    }
                    if v < s.min_ip {
                        s.min_ip = v;
                    }
                }
            }
        });
    stats
}

struct Planes {
    brightness: Vec<f64>,
    hue: Vec<f64>,
    saturation: Vec<f64>,
}

fn planes_from_samples(data: &[f64], frame_len: usize, params: &CipsParams) -> Result<Planes> {
    params.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyStack);
    }
    let period = params.effective_period(data.len() / frame_len);
    let stats = temporal_stats(data, frame_len);
    let peak = stats.iter().map(|s| s.max_ip).fold(0.0, f64::max);

    let mut planes = Planes {
        brightness: vec![0.0; frame_len],
        hue: vec![0.0; frame_len],
        saturation: vec![0.0; frame_len],
    };
    planes
        .brightness
        .par_iter_mut()
        .zip(planes.hue.par_iter_mut())
        .zip(planes.saturation.par_iter_mut())
        .zip(stats.par_iter())
        .for_each(|(((b, h), s), st)| {
            if st.max_ip > 0.0 {
                *b = st.max_ip / peak;
                *s = (st.max_ip - st.min_ip) / st.max_ip;
            }
            *h = hue_from_index(st.argmax_index, period);
        });
    Ok(planes)
}

fn check_planes(len: usize, brightness: &[f64], hue: &[f64], saturation: &[f64]) -> Result<()> {
    if brightness.len() != len || hue.len() != len || saturation.len() != len {
        return Err(Error::GeometryMismatch("plane lengths differ from geometry".into()));
    }
    let unit = |v: f64| (0.0..=1.0).contains(&v);
    for ((&b, &h), &s) in brightness.iter().zip(hue).zip(saturation) {
        if !unit(b) || !unit(s) || !(0.0..1.0).contains(&h) {
            return Err(Error::InvalidParameter(format!(
                "plane values out of range: b={b} h={h} s={s}"
            )));
        }
        if b == 0.0 && s != 0.0 {
            return Err(Error::InvalidParameter(
                "saturation must be zero where brightness is zero".into(),
            ));
        }
    }
    Ok(())
}

/// A 2D hue/saturation/brightness image.
#[derive(Debug, Clone, PartialEq)]
pub struct CipsImage {
    width: usize,
    height: usize,
    brightness: Vec<f64>,
    hue: Vec<f64>,
    saturation: Vec<f64>,
}

impl CipsImage {
    pub fn from_planes(
        width: usize,
        height: usize,
        brightness: Vec<f64>,
        hue: Vec<f64>,
        saturation: Vec<f64>,
    ) -> Result<Self> {
        check_planes(width * height, &brightness, &hue, &saturation)?;
        Ok(CipsImage {
            width,
            height,
            brightness,
            hue,
            saturation,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn brightness(&self) -> &[f64] {
        &self.brightness
    }

    pub fn hue(&self) -> &[f64] {
        &self.hue
    }

    pub fn saturation(&self) -> &[f64] {
        &self.saturation
    }

    pub fn get(&self, x: usize, y: usize) -> HsbTriple {
        let i = y * self.width + x;
        HsbTriple {
            h: self.hue[i],
            s: self.saturation[i],
            b: self.brightness[i],
        }
    }
}

/// A 3D hue/saturation/brightness volume, indexed `(z, y, x)` with `x` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct CipsVolume {
    nx: usize,
    ny: usize,
    nz: usize,
    brightness: Vec<f64>,
    hue: Vec<f64>,
    saturation: Vec<f64>,
}

impl CipsVolume {
    pub fn from_planes(
        nx: usize,
        ny: usize,
        nz: usize,
        brightness: Vec<f64>,
        hue: Vec<f64>,
        saturation: Vec<f64>,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidParameter("volumes must be at least 1x1x1".into()));
        }
        check_planes(nx * ny * nz, &brightness, &hue, &saturation)?;
        Ok(CipsVolume {
            nx,
            ny,
            nz,
            brightness,
            hue,
            saturation,
        })
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

    pub fn brightness(&self) -> &[f64] {
        &self.brightness
    }

    pub fn hue(&self) -> &[f64] {
        &self.hue
    }

    pub fn saturation(&self) -> &[f64] {
        &self.saturation
    }

    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.ny + y) * self.nx + x
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> HsbTriple {
        let i = self.index(x, y, z);
        HsbTriple {
            h: self.hue[i],
            s: self.saturation[i],
            b: self.brightness[i],
        }
    }

    /// The `z`-th slice as an image.
    pub fn slice(&self, z: usize) -> CipsImage {
        let len = self.nx * self.ny;
        let range = z * len..(z + 1) * len;
        CipsImage {
            width: self.nx,
            height: self.ny,
            brightness: self.brightness[range.clone()].to_vec(),
            hue: self.hue[range.clone()].to_vec(),
            saturation: self.saturation[range].to_vec(),
        }
    }
}

/// Applies the CIPs mapping to an already preprocessed stack.
pub fn compute_cips(stack: &FrameStack, params: &CipsParams) -> Result<CipsImage> {
    let p = planes_from_samples(stack.data(), stack.frame_len(), params)?;
    Ok(CipsImage {
        width: stack.width(),
        height: stack.height(),
        brightness: p.brightness,
        hue: p.hue,
        saturation: p.saturation,
    })
}

/// Voxelwise CIPs over the time axis; brightness is normalised over the whole volume.
pub fn compute_cips_volume(volume: &Volume4D, params: &CipsParams) -> Result<CipsVolume> {
    let p = planes_from_samples(volume.data(), volume.timepoint_len(), params)?;
    Ok(CipsVolume {
        nx: volume.nx(),
        ny: volume.ny(),
        nz: volume.nz(),
        brightness: p.brightness,
        hue: p.hue,
        saturation: p.saturation,
    })
}

fn check_gain(gain: f64) -> Result<()> {
    if gain.is_finite() && gain >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidGain(gain))
    }
}

fn amplify(saturation: &mut [f64], gain: f64) {
    saturation
        .par_iter_mut()
        .for_each(|s| *s = (gain * *s).min(1.0));
}

/// Scales saturation by `gain`, clamping at 1.
pub fn amplify_saturation(mut image: CipsImage, gain: f64) -> Result<CipsImage> {
    check_gain(gain)?;
    if gain != 1.0 {
        amplify(&mut image.saturation, gain);
    }
    Ok(image)
}

pub fn amplify_volume_saturation(mut volume: CipsVolume, gain: f64) -> Result<CipsVolume> {
    check_gain(gain)?;
    if gain != 1.0 {
        amplify(&mut volume.saturation, gain);
    }
    Ok(volume)
}
