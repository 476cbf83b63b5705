//! Hue/saturation/brightness to 8-bit RGB.
//!
//! Sextant conversion in `f64`, hue order red, yellow, green, cyan, blue,
//! magenta and back to red. Each channel is quantised as `floor(x * 255 + 0.5)`.

use rayon::prelude::*;

use crate::cips::CipsImage;
use crate::error::{Error, Result};
use crate::stack_io::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsbTriple {
    /// Only the fractional part is significant.
    pub h: f64,
    pub s: f64,
    pub b: f64,
}

#[inline]
fn quantize(x: f64) -> u8 {
    (x * 255.0 + 0.5).floor() as u8
}

/// Conversion without range checks; callers guarantee `s, b` in `[0, 1]`.
#[inline]
pub(crate) fn hsb_to_rgb_unchecked(hue: f64, s: f64, b: f64) -> [u8; 3] {
    if s == 0.0 {
        let v = quantize(b);
        return [v; 3];
    }
    let h = (hue - hue.floor()) * 6.0;
    // hue a hair below an integer can round up to exactly 6
    let (sector, f) = if h >= 6.0 { (0, 0.0) } else { (h.floor() as u8, h - h.floor()) };
    let p = b * (1.0 - s);
    let q = b * (1.0 - s * f);
    let t = b * (1.0 - s * (1.0 - f));
    let (r, g, bl) = match sector {
        0 => (b, t, p),
        1 => (q, b, p),
        2 => (p, b, t),
        3 => (p, q, b),
        4 => (t, p, b),
        _ => (b, p, q),
    };
    [quantize(r), quantize(g), quantize(bl)]
}

pub fn hsb_to_rgb(h: f64, s: f64, b: f64) -> Result<[u8; 3]> {
    if !h.is_finite() || !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&b) {
        return Err(Error::InvalidColorComponent { h, s, b });
    }
    Ok(hsb_to_rgb_unchecked(h, s, b))
}

impl HsbTriple {
    pub fn to_rgb(&self) -> Result<[u8; 3]> {
        hsb_to_rgb(self.h, self.s, self.b)
    }
}

/// Converts every pixel of a CIPs image.
pub fn render_rgb(image: &CipsImage) -> RgbImage {
    let mut out = RgbImage::new(image.width(), image.height());
    out.as_bytes_mut()
        .par_chunks_mut(3)
        .zip(image.hue().par_iter())
        .zip(image.saturation().par_iter())
        .zip(image.brightness().par_iter())
        .for_each(|(((px, &h), &s), &b)| {
            px.copy_from_slice(&hsb_to_rgb_unchecked(h, s, b));
        });
    out
}
